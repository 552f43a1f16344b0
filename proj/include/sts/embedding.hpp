#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sts/core.hpp"
#include "sts/doubling.hpp"
#include "sts/generators.hpp"
#include "sts/subsystems.hpp"

namespace sts {

enum class BlockParity { even, odd };

/// Smallest padded order >= max(lower, u, 13) in the congruence class that
/// makes the padded leave even-degreed with edge count divisible by 6:
/// 1,9 (mod 12) for an even block count, 3,7 (mod 12) for an odd one.
inline int padding_order(int u, BlockParity parity, int lower = 0) {
    int m = std::max({lower, u, 13});
    for (;; ++m) {
        int r = m % 12;
        if (parity == BlockParity::even ? (r == 1 || r == 9) : (r == 3 || r == 7)) return m;
    }
}

/// Rotates/reflects the traversal so the smallest vertex comes first followed
/// by its smaller cycle neighbor.
inline SixCycle normalize_cycle(const SixCycle& h) {
    SixCycle best = h;
    bool first = true;
    for (int rot = 0; rot < 6; ++rot)
        for (int dir = 0; dir < 2; ++dir) {
            SixCycle cand;
            for (int k = 0; k < 6; ++k) {
                int idx = dir == 0 ? (rot + k) % 6 : (rot - k + 12) % 6;
                cand.x[static_cast<std::size_t>(k)] = h.x[static_cast<std::size_t>(idx)];
            }
            if (first || cand.x < best.x) best = cand;
            first = false;
        }
    return best;
}

namespace detail {

class CycleDecomposer {
public:
    CycleDecomposer(const LeaveGraph& leave, std::size_t budget, std::optional<std::uint64_t> seed)
        : n_(leave.order), adj_(static_cast<std::size_t>(leave.order), PointSet(leave.order)),
          budget_(budget) {
        if (seed) rng_.emplace(*seed);
        for (auto [a, b] : leave.edges) {
            adj_[static_cast<std::size_t>(a)].set(b);
            adj_[static_cast<std::size_t>(b)].set(a);
            ++edges_;
        }
    }

    std::optional<std::vector<SixCycle>> run() {
        if (!solve(edges_)) return std::nullopt;
        return out_;
    }

    bool exhausted() const { return exhausted_; }

private:
    bool solve(int remaining) {
        if (remaining == 0) return true;
        if (spend()) return false;
        int anchor = -1;
        for (int v = 0; v < n_ && anchor < 0; ++v)
            if (!adj_[static_cast<std::size_t>(v)].empty()) anchor = v;
        std::array<Point, 6> path{};
        path[0] = anchor;
        PointSet used(n_);
        used.set(anchor);
        return grow(path, used, 1, remaining);
    }

    /// Extends a path from the anchor to a full 6-cycle; on closing, removes
    /// its edges and recurses into the rest of the graph.
    bool grow(std::array<Point, 6>& path, PointSet& used, int depth, int remaining) {
        if (spend()) return false;
        Point tail = path[static_cast<std::size_t>(depth - 1)];
        std::vector<Point> cands = adj_[static_cast<std::size_t>(tail)].to_vector();
        if (rng_) rng_->shuffle(cands);
        for (Point c : cands) {
            if (used.test(c)) continue;
            if (depth == 5) {
                // Close the cycle; demand v1 < v5 to skip mirrored traversals.
                if (c < path[1] || !adj_[static_cast<std::size_t>(c)].test(path[0])) continue;
                path[5] = c;
                SixCycle cyc;
                cyc.x = path;
                toggle(cyc, false);
                out_.push_back(cyc);
                if (solve(remaining - 6)) return true;
                out_.pop_back();
                toggle(cyc, true);
                if (exhausted_) return false;
            } else {
                path[static_cast<std::size_t>(depth)] = c;
                used.set(c);
                if (grow(path, used, depth + 1, remaining)) return true;
                used.reset(c);
                if (exhausted_) return false;
            }
        }
        return false;
    }

    void toggle(const SixCycle& cyc, bool on) {
        for (auto [a, b] : cyc.edges()) {
            if (on) {
                adj_[static_cast<std::size_t>(a)].set(b);
                adj_[static_cast<std::size_t>(b)].set(a);
            } else {
                adj_[static_cast<std::size_t>(a)].reset(b);
                adj_[static_cast<std::size_t>(b)].reset(a);
            }
        }
    }

    bool spend() {
        if (budget_ == 0) {
            exhausted_ = true;
            return true;
        }
        --budget_;
        return false;
    }

    int n_;
    std::vector<PointSet> adj_;
    int edges_ = 0;
    std::size_t budget_;
    std::optional<Rng> rng_;
    std::vector<SixCycle> out_;
    bool exhausted_ = false;
};

}  // namespace detail

/// Partition of a graph's edges into 6-cycles by backtracking, or nullopt if
/// the node budget runs out. Requires all degrees even and |E| = 0 (mod 6).
inline std::optional<std::vector<SixCycle>> six_cycle_decomposition(
    const LeaveGraph& leave, std::size_t budget = 5'000'000,
    std::optional<std::uint64_t> seed = {}) {
    if (leave.edges.size() % 6 != 0) throw BadEdgeCount("edge count not divisible by 6");
    std::vector<int> deg(static_cast<std::size_t>(leave.order), 0);
    for (auto [a, b] : leave.edges) {
        ++deg[static_cast<std::size_t>(a)];
        ++deg[static_cast<std::size_t>(b)];
    }
    for (int d : deg)
        if (d % 2 != 0) throw BadDegrees("vertex of odd degree");
    detail::CycleDecomposer dec(leave, budget, seed);
    return dec.run();
}

/// Lexicographically smallest 6-cycle of a graph, if any.
inline std::optional<SixCycle> find_six_cycle(const LeaveGraph& leave) {
    int n = leave.order;
    std::vector<PointSet> adj(static_cast<std::size_t>(n), PointSet(n));
    for (auto [a, b] : leave.edges) {
        adj[static_cast<std::size_t>(a)].set(b);
        adj[static_cast<std::size_t>(b)].set(a);
    }
    std::array<Point, 6> path{};
    PointSet used(n);
    std::function<bool(int)> grow = [&](int depth) -> bool {
        Point tail = path[static_cast<std::size_t>(depth - 1)];
        bool ok = false;
        adj[static_cast<std::size_t>(tail)].for_each([&](int c) {
            if (ok || used.test(c)) return;
            if (depth == 5) {
                if (c > path[1] && adj[static_cast<std::size_t>(c)].test(path[0])) {
                    path[5] = c;
                    ok = true;
                }
                return;
            }
            path[static_cast<std::size_t>(depth)] = c;
            used.set(c);
            if (grow(depth + 1)) ok = true;
            if (!ok) used.reset(c);
        });
        return ok;
    };
    for (int a = 0; a < n; ++a) {
        if (adj[static_cast<std::size_t>(a)].empty()) continue;
        path[0] = a;
        used = PointSet(n);
        used.set(a);
        if (grow(1)) {
            SixCycle h;
            h.x = path;
            return normalize_cycle(h);
        }
    }
    return std::nullopt;
}

struct EmbedOptions {
    int lower = 0;                          // lower bound for the padded order
    std::size_t decomposition_budget = 5'000'000;
    int max_padding = 999;                  // escalation cap
    int restarts = 8;                       // seeded retries per padded order
    std::optional<std::uint64_t> seed;      // drives retries and doubling choices
};

struct EmbeddingPlan {
    PartialSts padded;        // input with isolated points appended
    int input_order = 0;
    int padded_order = 0;
    std::vector<SixCycle> cycles;  // H_1..H_t in processing order
};

/// Pads the input to a qualifying order and fixes a 6-cycle decomposition of
/// the padded leave, escalating to the next congruent order when the search
/// budget runs out at the current one.
inline EmbeddingPlan plan_embedding(const PartialSts& ps, const EmbedOptions& opts = {}) {
    BlockParity parity = ps.block_count() % 2 == 0 ? BlockParity::even : BlockParity::odd;
    int target = padding_order(ps.order(), parity, opts.lower);
    while (target <= opts.max_padding) {
        PartialSts padded = PartialSts::make(target, ps.blocks());
        LeaveGraph leave = leave_graph(padded);
        if (leave.edges.size() % 6 != 0) throw InternalInconsistency("padded leave size mod 6");
        std::optional<std::vector<SixCycle>> cycles;
        for (int attempt = 0; attempt <= opts.restarts && !cycles; ++attempt) {
            std::optional<std::uint64_t> s;
            if (attempt > 0)
                s = (opts.seed ? *opts.seed : 0) * 1000003u + static_cast<std::uint64_t>(attempt);
            cycles = six_cycle_decomposition(leave, opts.decomposition_budget, s);
        }
        if (cycles) {
            for (auto& c : *cycles) c = normalize_cycle(c);
            std::sort(cycles->begin(), cycles->end(), [](const SixCycle& a, const SixCycle& b) {
                auto ka = a.x, kb = b.x;
                std::sort(ka.begin(), ka.end());
                std::sort(kb.begin(), kb.end());
                return std::tie(ka, a.x) < std::tie(kb, b.x);
            });
            return EmbeddingPlan{std::move(padded), ps.order(), target, std::move(*cycles)};
        }
        target = padding_order(ps.order(), parity, target + 1);
    }
    throw DecompositionNotFound("no 6-cycle decomposition within the padding cap");
}

enum class VerifyMode { full, steps, off };
enum class RunStatus { complete, truncated, failed };

struct StepCertificate {
    int step = 0;
    int order = 0;  // order after the step
    DoublingCert cert;
    VerificationReport report;
    bool verified = false;  // report filled and passing
};

struct RunOptions {
    int step_limit = 3;
    VerifyMode verify = VerifyMode::full;
    int verify_order_cap = 500;
    int construct_order_cap = 100'000;
    std::optional<std::uint64_t> seed;
    /// Called after each step; a nonempty string fails the run with it.
    std::function<std::string(int step, const PartialSts& current)> on_step;
};

struct EmbeddingRun {
    EmbeddingPlan plan;
    int steps_done = 0;
    PartialSts current;
    std::vector<StepCertificate> certificates;
    RunStatus status = RunStatus::truncated;
    std::string failure;
    int failed_step = -1;
};

/// Applies the doubling step along the planned cycles. Every step checks the
/// leave-chain invariant (the leave equals exactly the edges of the cycles
/// still pending) and, per verify mode, the full no-new-subsystem
/// certificate.
inline EmbeddingRun run_embedding(EmbeddingPlan plan, const RunOptions& opts = {}) {
    EmbeddingRun run;
    run.current = plan.padded;
    run.plan = std::move(plan);
    int t = static_cast<int>(run.plan.cycles.size());
    for (int k = 1; k <= t; ++k) {
        if (k > opts.step_limit) {
            run.status = RunStatus::truncated;
            run.failure = "step limit";
            return run;
        }
        int next_order = 2 * run.current.order() + 1;
        int cap = opts.verify == VerifyMode::off ? opts.construct_order_cap
                                                 : std::min(opts.verify_order_cap,
                                                            opts.construct_order_cap);
        if (next_order > cap) {
            run.status = RunStatus::truncated;
            run.failure = "order cap";
            return run;
        }
        const SixCycle& h = run.plan.cycles[static_cast<std::size_t>(k - 1)];
        StepCertificate sc;
        sc.step = k;
        try {
            DoublingResult res = double_system(run.current, h, opts.seed);
            sc.order = res.output.order();
            sc.cert = res.cert;
            if (opts.verify == VerifyMode::full) {
                sc.report = verify_doubling(run.current, res, h);
                sc.verified = sc.report.pass();
                if (!sc.verified) {
                    run.certificates.push_back(std::move(sc));
                    run.status = RunStatus::failed;
                    run.failed_step = k;
                    run.failure = "step verification failed";
                    return run;
                }
            } else if (opts.verify == VerifyMode::steps) {
                sc.report.valid_system = true;
                LeaveGraph after = leave_graph(res.output);
                std::vector<std::pair<Point, Point>> pending;
                for (int j = k; j < t; ++j)
                    for (auto e : run.plan.cycles[static_cast<std::size_t>(j)].edges())
                        pending.push_back(e);
                std::sort(pending.begin(), pending.end());
                sc.report.leave_delta_ok = (after.edges == pending);
                sc.verified = sc.report.leave_delta_ok;
                if (!sc.verified) {
                    run.certificates.push_back(std::move(sc));
                    run.status = RunStatus::failed;
                    run.failed_step = k;
                    run.failure = "leave chain broken";
                    return run;
                }
            }
            run.current = res.output;
        } catch (const Error& e) {
            run.status = RunStatus::failed;
            run.failed_step = k;
            run.failure = e.what();
            return run;
        }
        run.steps_done = k;
        // Leave-chain invariant, cheap and always on.
        {
            LeaveGraph after = leave_graph(run.current);
            std::vector<std::pair<Point, Point>> pending;
            for (int j = k; j < t; ++j)
                for (auto e : run.plan.cycles[static_cast<std::size_t>(j)].edges())
                    pending.push_back(e);
            std::sort(pending.begin(), pending.end());
            if (after.edges != pending)
                throw InternalInconsistency("leave chain invariant violated at step " +
                                            std::to_string(k));
        }
        if (opts.on_step) {
            std::string err = opts.on_step(k, run.current);
            if (!err.empty()) {
                run.status = RunStatus::failed;
                run.failed_step = k;
                run.failure = err;
                return run;
            }
        }
        run.certificates.push_back(std::move(sc));
    }
    if (!run.current.complete())
        throw InternalInconsistency("all cycles consumed but the system is incomplete");
    run.status = RunStatus::complete;
    return run;
}

/// Candidate systems for witness search, ascending order, lazily built.
inline std::vector<std::function<PartialSts()>> witness_catalog() {
    std::vector<std::function<PartialSts()>> cat;
    cat.push_back([] { return skolem(13); });
    for (int k = 0; k < 24; ++k)
        cat.push_back([k] { return pasch_variant(skolem(13), k); });
    cat.push_back([] { return bose(15); });
    for (int k = 0; k < 8; ++k)
        cat.push_back([k] { return pasch_variant(bose(15), k); });
    cat.push_back([] { return skolem(19); });
    cat.push_back([] { return bose(21); });
    cat.push_back([] { return skolem(25); });
    cat.push_back([] { return bose(27); });
    return cat;
}

/// True iff `candidate` is isomorphic to some subsystem of a member of F.
inline bool isomorphic_to_forbidden_subsystem(const PartialSts& candidate,
                                              const std::vector<PartialSts>& forbidden) {
    for (const auto& f : forbidden) {
        if (candidate.order() > f.order()) continue;
        SubsystemLattice lat = enumerate_subsystems(f);
        for (const auto& rec : lat.records) {
            if (rec.order != candidate.order()) continue;
            if (are_isomorphic(extract_subsystem(f, rec), candidate)) return true;
        }
    }
    return false;
}

/// A subsystem-free complete system not isomorphic to any subsystem of any
/// member of F; such a system witnesses that F-free systems can always grow.
inline PartialSts find_good_witness(const std::vector<PartialSts>& forbidden) {
    for (const auto& f : forbidden) {
        if (f.order() <= 3) throw TrivialForbidden("forbidden class members must be nontrivial");
        if (!f.complete()) throw Incomplete("forbidden class members must be complete");
    }
    for (const auto& make_candidate : witness_catalog()) {
        PartialSts cand;
        try {
            cand = make_candidate();
        } catch (const SearchExhausted&) {
            continue;
        }
        if (!is_subsystem_free(cand)) continue;
        if (isomorphic_to_forbidden_subsystem(cand, forbidden)) continue;
        return cand;
    }
    throw WitnessNotFound("catalog exhausted");
}

struct AmalgamationProblem {
    PartialSts left;
    PartialSts right;
    /// Identification (left point, right point) of the shared subsystem;
    /// empty for a joint embedding.
    std::vector<std::pair<Point, Point>> overlap;
    std::vector<PartialSts> forbidden;
    std::optional<PartialSts> witness;
};

struct AmalgamationOutcome {
    EmbeddingRun run;
    PartialSts witness;
    std::vector<Point> left_injection;     // into the union universe
    std::vector<Point> right_injection;
    std::vector<Point> witness_injection;
};

/// True iff every block of base maps to a block of big under the injection.
inline bool embeds_block_preserving(const PartialSts& big, const PartialSts& base,
                                    const std::vector<Point>& injection) {
    if (static_cast<int>(injection.size()) != base.order()) return false;
    for (const Block& b : base.blocks())
        if (!big.has_block(Block::of(injection[static_cast<std::size_t>(b.p[0])],
                                     injection[static_cast<std::size_t>(b.p[1])],
                                     injection[static_cast<std::size_t>(b.p[2])])))
            return false;
    return true;
}

/// Joint embedding / amalgamation: glue the two systems along the specified
/// common subsystem, adjoin a good witness disjointly, and embed the union.
/// Completed steps are checked to stay clear of the forbidden class.
inline AmalgamationOutcome amalgamate(const AmalgamationProblem& problem,
                                      const RunOptions& run_opts = {},
                                      const EmbedOptions& embed_opts = {}) {
    const PartialSts& left = problem.left;
    const PartialSts& right = problem.right;

    // The identified points must carry one common subsystem.
    PointSet left_pts(left.order()), right_pts(right.order());
    for (auto [pl, pr] : problem.overlap) {
        if (pl < 0 || pl >= left.order() || pr < 0 || pr >= right.order())
            throw OverlapNotSubsystem("identified point out of range");
        left_pts.set(pl);
        right_pts.set(pr);
    }
    if (static_cast<int>(problem.overlap.size()) != left_pts.count() ||
        left_pts.count() != right_pts.count())
        throw OverlapNotSubsystem("identification not injective");
    if (!problem.overlap.empty()) {
        auto sub_l = subsystem_from_points(left, left_pts);
        auto sub_r = subsystem_from_points(right, right_pts);
        if (!sub_l || !sub_r) throw OverlapNotSubsystem("identified points are not a subsystem");
        std::vector<Point> to_right(static_cast<std::size_t>(left.order()), -1);
        for (auto [pl, pr] : problem.overlap) to_right[static_cast<std::size_t>(pl)] = pr;
        for (const Block& b : sub_l->blocks)
            if (!right.has_block(Block::of(to_right[static_cast<std::size_t>(b.p[0])],
                                           to_right[static_cast<std::size_t>(b.p[1])],
                                           to_right[static_cast<std::size_t>(b.p[2])])))
                throw OverlapNotSubsystem("overlap blocks do not correspond");
    }

    PartialSts witness = problem.witness ? *problem.witness
                                         : find_good_witness(problem.forbidden);
    if (!witness.complete() || !is_subsystem_free(witness) ||
        isomorphic_to_forbidden_subsystem(witness, problem.forbidden))
        throw WitnessInvalid("witness must be subsystem-free and outside the forbidden class");

    AmalgamationOutcome out{EmbeddingRun{}, witness, {}, {}, {}};
    out.left_injection.resize(static_cast<std::size_t>(left.order()));
    for (int i = 0; i < left.order(); ++i) out.left_injection[static_cast<std::size_t>(i)] = i;
    out.right_injection.assign(static_cast<std::size_t>(right.order()), -1);
    for (auto [pl, pr] : problem.overlap) out.right_injection[static_cast<std::size_t>(pr)] = pl;
    int next = left.order();
    for (Point pr = 0; pr < right.order(); ++pr)
        if (out.right_injection[static_cast<std::size_t>(pr)] == -1)
            out.right_injection[static_cast<std::size_t>(pr)] = next++;
    PartialSts united = glued_union(left, right, problem.overlap);
    out.witness_injection.resize(static_cast<std::size_t>(witness.order()));
    for (int i = 0; i < witness.order(); ++i)
        out.witness_injection[static_cast<std::size_t>(i)] = united.order() + i;
    PartialSts total = glued_union(united, witness, {});

    RunOptions opts = run_opts;
    const auto& forbidden = problem.forbidden;
    auto user_hook = run_opts.on_step;
    opts.on_step = [&forbidden, user_hook](int step, const PartialSts& cur) -> std::string {
        if (!forbidden.empty() && !is_class_free(cur, forbidden))
            return "forbidden subsystem present after step " + std::to_string(step);
        return user_hook ? user_hook(step, cur) : std::string{};
    };

    out.run = run_embedding(plan_embedding(total, embed_opts), opts);

    if (out.run.status == RunStatus::complete) {
        if (!embeds_block_preserving(out.run.current, left, out.left_injection) ||
            !embeds_block_preserving(out.run.current, right, out.right_injection) ||
            !embeds_block_preserving(out.run.current, witness, out.witness_injection)) {
            out.run.status = RunStatus::failed;
            out.run.failure = "inputs not embedded block-preservingly";
        } else if (!forbidden.empty() && !is_class_free(out.run.current, forbidden)) {
            out.run.status = RunStatus::failed;
            out.run.failure = "final system is not class-free";
        }
    }
    return out;
}

}  // namespace sts
