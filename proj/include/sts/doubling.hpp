#pragma once

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sts/algebra.hpp"
#include "sts/core.hpp"
#include "sts/subsystems.hpp"

namespace sts {

/// A 6-cycle x1-x2-...-x6-x1 whose edges all lie in the host's leave.
struct SixCycle {
    std::array<Point, 6> x{};

    std::array<std::pair<Point, Point>, 6> edges() const {
        std::array<std::pair<Point, Point>, 6> e;
        for (int i = 0; i < 6; ++i) {
            Point a = x[static_cast<std::size_t>(i)];
            Point b = x[static_cast<std::size_t>((i + 1) % 6)];
            e[static_cast<std::size_t>(i)] = {std::min(a, b), std::max(a, b)};
        }
        return e;
    }
};

inline void validate_six_cycle(const PartialSts& ps, const SixCycle& h) {
    for (int i = 0; i < 6; ++i) {
        Point a = h.x[static_cast<std::size_t>(i)];
        if (a < 0 || a >= ps.order()) throw BadCycle("cycle point out of range");
        for (int j = i + 1; j < 6; ++j)
            if (a == h.x[static_cast<std::size_t>(j)]) throw BadCycle("cycle points not distinct");
    }
    for (auto [a, b] : h.edges())
        if (ps.pair_covered(a, b)) throw BadCycle("cycle edge not in the leave");
}

/// The pinned start of the bijection: phi(1)=x1, phi(0)=x2, phi(2)=x3,
/// phi(4)=x4, phi(6)=x5, phi(5)=x6; the remaining indices up to (u+1)/2 are
/// filled injectively from the unused points, lowest first or seeded.
inline std::vector<Point> initial_injection(const PartialSts& ps, const SixCycle& h,
                                            std::optional<std::uint64_t> seed = {}) {
    int u = ps.order();
    if (u < 11 || u % 2 == 0) throw OrderTooSmall("doubling needs odd order >= 11");
    validate_six_cycle(ps, h);
    int domain = (u + 3) / 2;  // indices 0..(u+1)/2
    std::vector<Point> phi(static_cast<std::size_t>(domain), -1);
    phi[1] = h.x[0];
    phi[0] = h.x[1];
    phi[2] = h.x[2];
    phi[4] = h.x[3];
    phi[6] = h.x[4];
    phi[5] = h.x[5];
    std::vector<char> used(static_cast<std::size_t>(u), 0);
    for (Point p : phi)
        if (p >= 0) used[static_cast<std::size_t>(p)] = 1;
    std::vector<Point> pool;
    for (Point p = 0; p < u; ++p)
        if (!used[static_cast<std::size_t>(p)]) pool.push_back(p);
    if (seed) {
        Rng rng(*seed);
        rng.shuffle(pool);
    }
    std::size_t next = 0;
    for (int i = 0; i < domain; ++i)
        if (phi[static_cast<std::size_t>(i)] < 0) phi[static_cast<std::size_t>(i)] = pool[next++];
    return phi;
}

/// Per-step audit data from the bijection extension.
struct StepAudit {
    int index = 0;             // i
    std::vector<int> divisors; // divisors whose coset hit the safety threshold
    int forbidden = 0;         // distinct unusable points at this step
    int pool = 0;              // |W| = u - i
};

struct BijectionBuilderState {
    int u = 0;
    std::vector<Point> phi;
    std::vector<StepAudit> history;
};

/// D_i and r_i of the safety counting argument, with the slack u-i-1 they are
/// measured against.
struct CountingAudit {
    int u = 0;
    int index = 0;
    std::vector<int> divisors;  // D_i
    double r = 0.0;             // r_i
    int slack = 0;              // u - i - 1

    bool ok() const { return r < slack; }
};

inline CountingAudit counting_audit(int u, int i) {
    if (u < 11 || u % 2 == 0) throw OutOfRange("u must be odd and >= 11");
    if (i < (u + 3) / 2 || i > u - 3) throw OutOfRange("i outside (u+3)/2 .. u-3");
    CountingAudit audit;
    audit.u = u;
    audit.index = i;
    audit.slack = u - i - 1;
    for (int d : admissible_coset_divisors(u)) {
        // d in D_i iff (2i-u+2)/3 <= d <= 2i-u.
        if (3 * d >= 2 * i - u + 2 && d <= 2 * i - u) {
            audit.divisors.push_back(d);
            audit.r += 0.5 * (u / d - 1);
        }
    }
    return audit;
}

/// Extends an injection on {0..(u+1)/2} to a bijection Z_u -> points such that
/// no coset of a nontrivial proper subgroup of Z_u maps onto the point set of
/// a subsystem. Safety bookkeeping follows the counting argument: at step i
/// only the coset containing i whose intersection with {0..i} just reached
/// (|C|+3)/2 can newly constrain the choice, and the unique small subsystem
/// over the partial image pins down the forbidden points. The final two values
/// are fixed by trying both completions against a full coset-safety check.
///
/// NoSafeChoice is a bug detector: the counting bound r_i < u-i-1 proves a
/// candidate always exists.
inline BijectionBuilderState extend_bijection(const PartialSts& ps,
                                              const std::vector<Point>& phi_prime,
                                              std::optional<std::uint64_t> seed = {},
                                              const SubsystemLattice* lattice = nullptr) {
    int u = ps.order();
    if (u < 11 || u % 2 == 0) throw OrderTooSmall("doubling needs odd order >= 11");
    if (static_cast<int>(phi_prime.size()) != (u + 3) / 2)
        throw NotBijective("phi' must cover 0..(u+1)/2");

    SubsystemLattice own_lattice;
    if (!lattice) {
        own_lattice = enumerate_subsystems(ps);
        lattice = &own_lattice;
    }
    std::map<int, std::vector<const PointSet*>> sets_by_size;
    for (const auto& rec : lattice->records)
        sets_by_size[rec.order].push_back(&rec.points);

    BijectionBuilderState st;
    st.u = u;
    st.phi.assign(static_cast<std::size_t>(u), -1);
    std::vector<char> used(static_cast<std::size_t>(u), 0);
    for (std::size_t i = 0; i < phi_prime.size(); ++i) {
        Point p = phi_prime[i];
        if (p < 0 || p >= u || used[static_cast<std::size_t>(p)])
            throw NotBijective("phi' is not an injection into the points");
        st.phi[i] = p;
        used[static_cast<std::size_t>(p)] = 1;
    }

    std::optional<Rng> rng;
    if (seed) rng.emplace(*seed);
    std::vector<int> divisors = admissible_coset_divisors(u);

    for (int i = (u + 3) / 2; i <= u - 3; ++i) {
        PointSet forbidden(u);
        StepAudit audit;
        audit.index = i;
        audit.pool = u - i;
        for (int d : divisors) {
            int size = u / d;
            if (i / d + 1 != (size + 3) / 2) continue;  // threshold not hit at this step
            audit.divisors.push_back(d);
            PointSet partial_image(u);
            for (int c = i % d; c < i; c += d)
                partial_image.set(st.phi[static_cast<std::size_t>(c)]);
            const PointSet* hit = nullptr;
            auto it = sets_by_size.find(size);
            if (it != sets_by_size.end())
                for (const PointSet* s : it->second)
                    if (partial_image.subset_of(*s)) {
                        if (hit) throw InternalInconsistency("two subsystems over a half coset");
                        hit = s;
                    }
            if (hit) forbidden = forbidden | *hit;
        }
        if (u % 6 == 3 && i == 2 * u / 3 - 1) {
            // Avoid completing a pair of blocks sharing a point over the two
            // special short cosets.
            Point pa = st.phi[static_cast<std::size_t>(u / 3 - 2)];
            Point pb = st.phi[static_cast<std::size_t>(2 * u / 3 - 2)];
            if (auto blk = ps.block_through(pa, pb)) {
                Point z = blk->third(pa, pb);
                Point pc = st.phi[static_cast<std::size_t>(u / 3 - 1)];
                if (pc != z)
                    if (auto blk2 = ps.block_through(pc, z)) forbidden.set(blk2->third(pc, z));
            }
        }
        std::vector<Point> candidates;
        for (Point w = 0; w < u; ++w)
            if (!used[static_cast<std::size_t>(w)] && !forbidden.test(w)) candidates.push_back(w);
        int banned = 0;
        for (Point w = 0; w < u; ++w)
            if (!used[static_cast<std::size_t>(w)] && forbidden.test(w)) ++banned;
        audit.forbidden = banned;
        st.history.push_back(audit);
        if (candidates.empty())
            throw NoSafeChoice("no safe value at index " + std::to_string(i));
        Point w = rng ? candidates[static_cast<std::size_t>(rng->index(candidates.size()))]
                      : candidates.front();
        st.phi[static_cast<std::size_t>(i)] = w;
        used[static_cast<std::size_t>(w)] = 1;
    }

    std::array<Point, 2> rest{-1, -1};
    for (Point w = 0, k = 0; w < u; ++w)
        if (!used[static_cast<std::size_t>(w)]) rest[static_cast<std::size_t>(k++)] = w;

    auto coset_image_is_subsystem = [&](int d, int r) {
        int size = u / d;
        auto it = sets_by_size.find(size);
        if (it == sets_by_size.end()) return false;
        PointSet image(u);
        for (int c = r; c < u; c += d) image.set(st.phi[static_cast<std::size_t>(c)]);
        for (const PointSet* s : it->second)
            if (image == *s) return true;
        return false;
    };
    auto completion_ok = [&]() {
        if (u % 6 == 3)
            for (int j = 1; j <= 2; ++j) {
                Point a = st.phi[static_cast<std::size_t>(u / 3 - j)];
                Point b = st.phi[static_cast<std::size_t>(2 * u / 3 - j)];
                Point c = st.phi[static_cast<std::size_t>(u - j)];
                auto blk = ps.block_through(a, b);
                if (blk && blk->contains(c)) return false;
            }
        for (int d : proper_divisors(u))
            for (int r = 0; r < d; ++r)
                if (coset_image_is_subsystem(d, r)) return false;
        return true;
    };

    for (int option = 0; option < 2; ++option) {
        st.phi[static_cast<std::size_t>(u - 2)] = rest[static_cast<std::size_t>(option)];
        st.phi[static_cast<std::size_t>(u - 1)] = rest[static_cast<std::size_t>(1 - option)];
        if (completion_ok()) return st;
    }
    throw NoSafeChoice("both final completions unsafe");
}

/// Certificate for one doubling step, enough to rebuild and re-verify it.
struct DoublingCert {
    int u = 0;
    std::optional<std::uint64_t> seed;
    std::vector<Point> phi;
    std::array<Point, 6> cycle{};

    std::string line() const {
        std::ostringstream out;
        out << "cert doubling u=" << u << " seed=";
        if (seed)
            out << *seed;
        else
            out << "-";
        out << " phi=";
        for (std::size_t i = 0; i < phi.size(); ++i) out << (i ? "," : "") << phi[i];
        out << " cycle=";
        for (int i = 0; i < 6; ++i) out << (i ? "," : "") << cycle[static_cast<std::size_t>(i)];
        return out.str();
    }

    static DoublingCert parse(const std::string& text) {
        std::istringstream in(text);
        std::string tag, kind, field;
        in >> tag >> kind;
        if (tag != "cert" || kind != "doubling") throw ParseError("not a doubling cert: " + text);
        DoublingCert c;
        auto parse_ints = [](const std::string& csv) {
            std::vector<Point> vals;
            std::istringstream s(csv);
            std::string item;
            while (std::getline(s, item, ',')) vals.push_back(std::stoi(item));
            return vals;
        };
        while (in >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) throw ParseError("bad cert field: " + field);
            std::string key = field.substr(0, eq), val = field.substr(eq + 1);
            if (key == "u")
                c.u = std::stoi(val);
            else if (key == "seed")
                c.seed = (val == "-") ? std::nullopt
                                      : std::optional<std::uint64_t>(std::stoull(val));
            else if (key == "phi")
                c.phi = parse_ints(val);
            else if (key == "cycle") {
                auto v = parse_ints(val);
                if (v.size() != 6) throw ParseError("cycle needs 6 points");
                for (int i = 0; i < 6; ++i) c.cycle[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            } else
                throw ParseError("unknown cert field: " + key);
        }
        if (c.u <= 0 || static_cast<int>(c.phi.size()) != c.u)
            throw ParseError("cert phi length mismatch");
        return c;
    }
};

struct DoublingResult {
    PartialSts output;
    std::vector<Point> phi;
    std::vector<Block> b_dagger;   // one block per factor edge
    std::vector<Block> b_ddagger;  // the six replaced blocks
    std::vector<Block> b0;         // two all-new blocks
    std::vector<Block> b1;         // b_dagger minus b_ddagger
    std::vector<Block> b2;         // six blocks consuming the cycle edges
    DoublingCert cert;
    BijectionBuilderState state;
};

/// Pure assembly of the doubled system from a finished bijection. New points
/// are appended: Z_u element z becomes u+z and infinity becomes 2u.
inline DoublingResult assemble_doubling(const PartialSts& ps, const SixCycle& h,
                                        std::vector<Point> phi,
                                        BijectionBuilderState state = {}) {
    int u = ps.order();
    validate_six_cycle(ps, h);
    if (static_cast<int>(phi.size()) != u) throw NotBijective("phi must cover Z_u");
    OneFactorisation fac = standard_one_factorisation(u);
    auto map = [u](int z) { return u + z; };  // factorisation vertex -> output id

    DoublingResult res{PartialSts{}, phi, {}, {}, {}, {}, {}, {}, std::move(state)};
    for (int i = 0; i < u; ++i)
        for (auto [x, y] : fac.factor(i))
            res.b_dagger.push_back(Block::of(map(x), map(y), phi[static_cast<std::size_t>(i)]));
    std::sort(res.b_dagger.begin(), res.b_dagger.end());

    const auto& x = h.x;
    res.b_ddagger = {Block::of(map(3), map(u - 1), x[0]), Block::of(map(u - 1), map(1), x[1]),
                     Block::of(map(1), map(3), x[2]),     Block::of(map(3), map(5), x[3]),
                     Block::of(map(5), map(7), x[4]),     Block::of(map(7), map(3), x[5])};
    for (const Block& b : res.b_ddagger)
        if (!std::binary_search(res.b_dagger.begin(), res.b_dagger.end(), b))
            throw InternalInconsistency("replaced block set is not inside the factor blocks");

    res.b0 = {Block::of(map(u - 1), map(1), map(3)), Block::of(map(3), map(5), map(7))};
    res.b2 = {Block::of(x[0], x[1], map(u - 1)), Block::of(x[1], x[2], map(1)),
              Block::of(x[2], x[3], map(3)),     Block::of(x[3], x[4], map(5)),
              Block::of(x[4], x[5], map(7)),     Block::of(x[0], x[5], map(3))};

    std::vector<Block> ddag_sorted = res.b_ddagger;
    std::sort(ddag_sorted.begin(), ddag_sorted.end());
    for (const Block& b : res.b_dagger)
        if (!std::binary_search(ddag_sorted.begin(), ddag_sorted.end(), b))
            res.b1.push_back(b);

    std::vector<Block> blocks = ps.blocks();
    blocks.insert(blocks.end(), res.b1.begin(), res.b1.end());
    blocks.insert(blocks.end(), res.b0.begin(), res.b0.end());
    blocks.insert(blocks.end(), res.b2.begin(), res.b2.end());
    try {
        res.output = PartialSts::make(2 * u + 1, std::move(blocks));
    } catch (const DuplicatePair& e) {
        throw InternalInconsistency(std::string("doubled system invalid: ") + e.what());
    }
    if (res.output.block_count() !=
        ps.block_count() + static_cast<std::size_t>(u) * (u + 1) / 2 + 2)
        throw InternalInconsistency("doubled block count is off");

    res.cert.u = u;
    res.cert.phi = res.phi;
    for (int i = 0; i < 6; ++i) res.cert.cycle[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    return res;
}

/// One doubling step: u -> 2u+1, consuming the cycle's edges from the leave
/// and adding no subsystems beyond the input's.
inline DoublingResult double_system(const PartialSts& ps, const SixCycle& h,
                                    std::optional<std::uint64_t> seed = {},
                                    const SubsystemLattice* lattice = nullptr) {
    std::vector<Point> phi_prime = initial_injection(ps, h, seed);
    BijectionBuilderState st = extend_bijection(ps, phi_prime, seed, lattice);
    DoublingResult res = assemble_doubling(ps, h, st.phi, std::move(st));
    res.cert.seed = seed;
    return res;
}

struct VerificationReport {
    bool valid_system = false;
    bool leave_delta_ok = false;
    bool no_new_subsystems = false;
    bool coset_safety_ok = false;
    std::array<std::size_t, 4> type_census{};  // blocks by count of original points
    std::vector<std::string> failures;

    bool pass() const {
        return valid_system && leave_delta_ok && no_new_subsystems && coset_safety_ok;
    }
};

/// Independent re-verification of a doubling step: revalidates the output,
/// checks the leave lost exactly the cycle's edges, re-enumerates subsystems
/// for the no-new-subsystem guarantee, and re-checks coset safety of phi from
/// scratch.
inline VerificationReport verify_doubling(const PartialSts& input, const DoublingResult& result,
                                          const SixCycle& h,
                                          std::size_t node_budget = 2'000'000) {
    VerificationReport rep;
    int u = input.order();
    const PartialSts& out = result.output;

    try {
        PartialSts rebuilt = PartialSts::make(out.order(), out.blocks());
        rep.valid_system = (out.order() == 2 * u + 1);
        if (!rep.valid_system) rep.failures.push_back("output order is not 2u+1");
    } catch (const Error& e) {
        rep.failures.push_back(std::string("output invalid: ") + e.what());
    }

    {
        LeaveGraph before = leave_graph(input);
        LeaveGraph after = leave_graph(out);
        std::vector<std::pair<Point, Point>> expected;
        auto cut = h.edges();
        std::vector<std::pair<Point, Point>> cut_sorted(cut.begin(), cut.end());
        std::sort(cut_sorted.begin(), cut_sorted.end());
        for (auto e : before.edges)
            if (!std::binary_search(cut_sorted.begin(), cut_sorted.end(), e))
                expected.push_back(e);
        rep.leave_delta_ok = (after.edges == expected);
        if (!rep.leave_delta_ok) rep.failures.push_back("leave is not old leave minus the cycle");
    }

    {
        std::vector<Point> identity(static_cast<std::size_t>(u));
        for (int i = 0; i < u; ++i) identity[static_cast<std::size_t>(i)] = i;
        try {
            auto bad = new_subsystem_violations(out, input, identity, node_budget);
            rep.no_new_subsystems = bad.empty();
            if (!bad.empty())
                rep.failures.push_back("output has " + std::to_string(bad.size()) +
                                       " subsystems not inherited from the input");
        } catch (const Error& e) {
            rep.failures.push_back(std::string("enumeration failed: ") + e.what());
        }
    }

    {
        rep.coset_safety_ok = true;
        for (int d : proper_divisors(u))
            for (int r = 0; r < d && rep.coset_safety_ok; ++r) {
                PointSet image(u);
                for (int c = r; c < u; c += d)
                    image.set(result.phi[static_cast<std::size_t>(c)]);
                if (subsystem_from_points(input, image)) {
                    rep.coset_safety_ok = false;
                    rep.failures.push_back("phi maps a coset onto a subsystem (d=" +
                                           std::to_string(d) + ", r=" + std::to_string(r) + ")");
                }
            }
    }

    for (const Block& b : out.blocks()) {
        int t = 0;
        for (Point p : b.p) t += (p < u) ? 1 : 0;
        ++rep.type_census[static_cast<std::size_t>(t)];
    }
    return rep;
}

/// Rebuilds a doubling step from its certificate and checks it reproduces the
/// recorded output exactly.
inline bool reverify_certificate(const PartialSts& input, const DoublingCert& cert,
                                 const PartialSts& output) {
    if (cert.u != input.order()) return false;
    SixCycle h;
    h.x = cert.cycle;
    DoublingResult res = assemble_doubling(input, h, cert.phi);
    if (!(res.output.order() == output.order() && res.output.blocks() == output.blocks()))
        return false;
    return verify_doubling(input, res, h).pass();
}

}  // namespace sts
