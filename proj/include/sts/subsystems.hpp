#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

#include "sts/core.hpp"

namespace sts {

/// A point set certified complete inside a host: every pair of S is covered
/// by a host block lying inside S. Trivial records have order <= 3.
struct SubsystemRecord {
    PointSet points;
    std::vector<Block> blocks;
    int order = 0;

    bool trivial() const { return order <= 3; }
};

/// All subsystems of a host up to max_order, deduplicated, sorted by
/// (order, point set). Contains every block as an order-3 record.
struct SubsystemLattice {
    int host_order = 0;
    int max_order = 0;
    std::vector<SubsystemRecord> records;
    bool truncated = false;

    bool contains_point_set(const PointSet& s) const {
        for (const auto& r : records)
            if (r.points == s) return true;
        return false;
    }

    /// Point sets of records with the given order.
    std::vector<const SubsystemRecord*> of_order(int k) const {
        std::vector<const SubsystemRecord*> out;
        for (const auto& r : records)
            if (r.order == k) out.push_back(&r);
        return out;
    }
};

/// Smallest superset of `seed` such that whenever two points of a block are
/// inside, the third is too. Extensive, monotone, idempotent.
inline PointSet closure(const PartialSts& ps, PointSet seed) {
    std::vector<int> queue = seed.to_vector();
    std::vector<int> members = queue;
    while (!queue.empty()) {
        int x = queue.back();
        queue.pop_back();
        for (std::size_t i = 0; i < members.size(); ++i) {
            int y = members[i];
            if (y == x) continue;
            auto b = ps.block_through(x, y);
            if (!b) continue;
            int z = b->third(x, y);
            if (!seed.test(z)) {
                seed.set(z);
                members.push_back(z);
                queue.push_back(z);
            }
        }
    }
    return seed;
}

/// The record on S if S carries a complete subsystem of the host, else none.
inline std::optional<SubsystemRecord> subsystem_from_points(const PartialSts& ps,
                                                            const PointSet& S) {
    std::vector<int> pts = S.to_vector();
    if (pts.size() == 2) return std::nullopt;  // a pair can never be covered inside
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            auto b = ps.block_through(pts[i], pts[j]);
            if (!b || !S.test(b->third(pts[i], pts[j]))) return std::nullopt;
            blocks.push_back(*b);
        }
    std::sort(blocks.begin(), blocks.end());
    blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
    return SubsystemRecord{S, std::move(blocks), static_cast<int>(pts.size())};
}

/// Exhaustive subsystem enumeration by breadth-first closure growth: start
/// from each block (blocks are themselves closed), then close S + {x} for
/// every found closed set S and outside point x. Growth past max_order is
/// pruned; every subsystem of order <= max_order is reachable through closed
/// subsets of itself, so none is missed. Only records of order >= 3 are kept.
inline SubsystemLattice enumerate_subsystems(const PartialSts& ps, int max_order = -1,
                                             std::size_t node_budget = 2'000'000) {
    int v = ps.order();
    if (max_order < 0 || max_order > v) max_order = v;
    SubsystemLattice lat;
    lat.host_order = v;
    lat.max_order = max_order;
    lat.truncated = max_order < v;

    std::unordered_set<PointSet, PointSetHash> visited;
    std::deque<PointSet> frontier;
    for (const Block& b : ps.blocks()) {
        if (max_order < 3) break;
        PointSet s = PointSet::of(v, {b.p[0], b.p[1], b.p[2]});
        if (visited.insert(s).second) frontier.push_back(s);
    }
    while (!frontier.empty()) {
        PointSet s = std::move(frontier.front());
        frontier.pop_front();
        if (auto rec = subsystem_from_points(ps, s)) lat.records.push_back(std::move(*rec));
        if (s.count() >= max_order) continue;
        for (int x = 0; x < v; ++x) {
            if (s.test(x)) continue;
            PointSet grown = s;
            grown.set(x);
            grown = closure(ps, std::move(grown));
            if (grown.count() > max_order) continue;
            if (visited.size() >= node_budget) {
                lat.truncated = true;
                frontier.clear();
                break;
            }
            if (visited.insert(grown).second) frontier.push_back(grown);
        }
    }
    // A blockless complete host (order <= 1) is still a subsystem of itself.
    if (ps.complete() && v <= 1 && max_order >= v) {
        PointSet all(v);
        for (int i = 0; i < v; ++i) all.set(i);
        lat.records.push_back(SubsystemRecord{all, {}, v});
    }
    std::sort(lat.records.begin(), lat.records.end(), [](const auto& a, const auto& b) {
        if (a.order != b.order) return a.order < b.order;
        return a.points.to_vector() < b.points.to_vector();
    });
    return lat;
}

/// Nontrivial proper subsystems of `big` that are not images of subsystems of
/// `base` under the given point injection. Empty result certifies the
/// embedding added no subsystems.
inline std::vector<SubsystemRecord> new_subsystem_violations(const PartialSts& big,
                                                             const PartialSts& base,
                                                             const std::vector<Point>& injection,
                                                             std::size_t node_budget = 2'000'000) {
    if (static_cast<int>(injection.size()) != base.order())
        throw NotEmbedded("injection size does not match base order");
    PointSet image(big.order());
    std::vector<char> seen(static_cast<std::size_t>(big.order()), 0);
    for (Point q : injection) {
        if (q < 0 || q >= big.order() || seen[static_cast<std::size_t>(q)])
            throw NotEmbedded("injection not injective into big");
        seen[static_cast<std::size_t>(q)] = 1;
        image.set(q);
    }
    for (const Block& b : base.blocks()) {
        Block m = Block::of(injection[static_cast<std::size_t>(b.p[0])],
                            injection[static_cast<std::size_t>(b.p[1])],
                            injection[static_cast<std::size_t>(b.p[2])]);
        if (!big.has_block(m)) throw NotEmbedded("a base block is missing from big");
    }

    SubsystemLattice lat = enumerate_subsystems(big, big.order(), node_budget);
    if (lat.truncated && lat.max_order == big.order())
        throw BudgetExceeded("subsystem enumeration budget exhausted; cannot certify");

    // Blocks of big lying inside the image that are images of base blocks.
    std::unordered_set<PointSet, PointSetHash> base_block_images;
    for (const Block& b : base.blocks())
        base_block_images.insert(
            PointSet::of(big.order(), {injection[static_cast<std::size_t>(b.p[0])],
                                       injection[static_cast<std::size_t>(b.p[1])],
                                       injection[static_cast<std::size_t>(b.p[2])]}));

    std::vector<SubsystemRecord> bad;
    for (const auto& rec : lat.records) {
        if (rec.trivial() || rec.order >= big.order()) continue;
        bool inherited = rec.points.subset_of(image);
        if (inherited)
            for (const Block& b : rec.blocks) {
                if (!base_block_images.count(PointSet::of(big.order(), {b.p[0], b.p[1], b.p[2]}))) {
                    inherited = false;
                    break;
                }
            }
        if (!inherited) bad.push_back(rec);
    }
    return bad;
}

/// The unique subsystem containing R with order at most 2|R|, if any. That
/// there is at most one such subsystem is a structural fact; finding two is
/// reported as an internal inconsistency.
inline std::optional<SubsystemRecord> unique_small_subsystem(const PartialSts& ps,
                                                             const PointSet& R,
                                                             const SubsystemLattice* lattice = nullptr) {
    int r = R.count();
    if (r == 0) return std::nullopt;
    int bound = 2 * r;
    std::optional<SubsystemRecord> found;
    auto consider = [&](const SubsystemRecord& rec) {
        if (rec.order > bound || !R.subset_of(rec.points)) return;
        if (found && !(found->points == rec.points))
            throw InternalInconsistency("two small subsystems over one R");
        found = rec;
    };
    if (r == 1) {
        // The singleton itself is a subsystem of order 1 <= 2.
        found = SubsystemRecord{R, {}, 1};
    }
    if (lattice) {
        for (const auto& rec : lattice->records) consider(rec);
    } else {
        SubsystemLattice lat = enumerate_subsystems(ps, std::min(bound, ps.order()));
        for (const auto& rec : lat.records) consider(rec);
    }
    return found;
}

/// True iff no subsystem has order strictly between 3 and the host order.
inline bool is_subsystem_free(const PartialSts& sts) {
    if (!sts.complete()) throw Incomplete("subsystem-freeness is defined for complete systems");
    SubsystemLattice lat = enumerate_subsystems(sts);
    for (const auto& rec : lat.records)
        if (rec.order > 3 && rec.order < sts.order()) return false;
    return true;
}

/// Extracts a record as a standalone system with dense point ids.
inline PartialSts extract_subsystem(const PartialSts& host, const SubsystemRecord& rec) {
    std::vector<int> pts = rec.points.to_vector();
    std::vector<int> dense(static_cast<std::size_t>(host.order()), -1);
    for (std::size_t i = 0; i < pts.size(); ++i)
        dense[static_cast<std::size_t>(pts[i])] = static_cast<int>(i);
    std::vector<Block> blocks;
    blocks.reserve(rec.blocks.size());
    for (const Block& b : rec.blocks)
        blocks.push_back(Block::of(dense[static_cast<std::size_t>(b.p[0])],
                                   dense[static_cast<std::size_t>(b.p[1])],
                                   dense[static_cast<std::size_t>(b.p[2])]));
    return PartialSts::make(rec.order, std::move(blocks));
}

// ---------------------------------------------------------------------------
// Isomorphism via canonical labeling.

/// Cycle structure of a pair {x,y} in a complete system: the graph on the
/// points outside the block through {x,y} whose edges join z to x*z and to
/// y*z is 2-regular, so it splits into even cycles. The sorted multiset of
/// cycle lengths is an isomorphism invariant of the pair.
inline std::vector<int> pair_cycle_structure(const PartialSts& sts, Point x, Point y) {
    int v = sts.order();
    Point z = sts.block_through(x, y)->third(x, y);
    std::vector<char> done(static_cast<std::size_t>(v), 0);
    done[static_cast<std::size_t>(x)] = done[static_cast<std::size_t>(y)] = 1;
    done[static_cast<std::size_t>(z)] = 1;
    std::vector<int> lengths;
    for (Point w0 = 0; w0 < v; ++w0) {
        if (done[static_cast<std::size_t>(w0)]) continue;
        // Walk the cycle alternating the two pencils.
        int len = 0;
        Point w = w0;
        bool via_x = true;
        do {
            done[static_cast<std::size_t>(w)] = 1;
            ++len;
            Point partner = via_x ? sts.block_through(x, w)->third(x, w)
                                  : sts.block_through(y, w)->third(y, w);
            via_x = !via_x;
            w = partner;
        } while (w != w0);
        lengths.push_back(len);
    }
    std::sort(lengths.begin(), lengths.end());
    return lengths;
}

/// Cheap isomorphism invariants: order, block count, and the multiset of all
/// pair cycle structures.
struct Fingerprint {
    int order = 0;
    std::size_t block_count = 0;
    std::vector<std::vector<int>> pair_cycles;  // sorted multiset

    auto operator<=>(const Fingerprint&) const = default;
};

inline Fingerprint fingerprint(const PartialSts& sts) {
    if (!sts.complete()) throw Incomplete("fingerprint needs a complete system");
    Fingerprint fp;
    fp.order = sts.order();
    fp.block_count = sts.block_count();
    for (Point y = 1; y < sts.order(); ++y)
        for (Point x = 0; x < y; ++x) fp.pair_cycles.push_back(pair_cycle_structure(sts, x, y));
    std::sort(fp.pair_cycles.begin(), fp.pair_cycles.end());
    return fp;
}

struct CanonicalForm {
    Fingerprint fp;
    std::vector<Block> blocks;  // block list under the canonical labeling

    bool operator==(const CanonicalForm&) const = default;
};

namespace detail {

/// Backtracking search for the canonical labeling. Positions are filled in
/// order; candidates at each depth are the unassigned points of the color
/// class that owns the position. The objective minimized is the sequence of
/// per-depth rows, where row k lists the relabeled blocks whose largest
/// position is k. Worse-than-best prefixes are pruned.
class CanonicalSearch {
public:
    CanonicalSearch(const PartialSts& sts, const std::vector<int>& color,
                    const std::vector<int>& class_of_position)
        : sts_(sts),
          v_(sts.order()),
          color_(color),
          class_at_(class_of_position),
          pos_(static_cast<std::size_t>(v_), -1),
          point_at_(static_cast<std::size_t>(v_), -1) {}

    std::vector<Block> run() {
        descend(0);
        std::vector<Block> blocks;
        for (auto& row : best_)
            blocks.insert(blocks.end(), row.begin(), row.end());
        std::sort(blocks.begin(), blocks.end());
        return blocks;
    }

private:
    void descend(int depth) {
        if (depth == v_) {
            if (!have_best_) {
                best_ = rows_;
                have_best_ = true;
            }
            return;
        }
        for (Point q = 0; q < v_; ++q) {
            if (pos_[static_cast<std::size_t>(q)] != -1) continue;
            if (color_[static_cast<std::size_t>(q)] != class_at_[static_cast<std::size_t>(depth)])
                continue;
            assign(depth, q);
            int cmp = have_best_ ? compare_row(depth) : -1;
            if (cmp <= 0) {
                if (cmp < 0 && have_best_) {
                    // Strictly better prefix: everything recorded so far is stale.
                    have_best_ = false;
                    best_.clear();
                }
                descend(depth + 1);
            }
            unassign(depth, q);
        }
    }

    void assign(int depth, Point q) {
        pos_[static_cast<std::size_t>(q)] = depth;
        point_at_[static_cast<std::size_t>(depth)] = q;
        std::vector<Block> row;
        for (int a = 0; a < depth; ++a) {
            Point pa = point_at_[static_cast<std::size_t>(a)];
            auto blk = sts_.block_through(q, pa);
            if (!blk) continue;
            int pr = pos_[static_cast<std::size_t>(blk->third(q, pa))];
            if (pr > a && pr < depth) row.push_back(Block::of(a, pr, depth));
        }
        std::sort(row.begin(), row.end());
        rows_.push_back(std::move(row));
    }

    void unassign(int depth, Point q) {
        rows_.pop_back();
        pos_[static_cast<std::size_t>(q)] = -1;
        point_at_[static_cast<std::size_t>(depth)] = -1;
    }

    /// -1 / 0 / +1: current row at `depth` versus the best one.
    int compare_row(int depth) const {
        auto idx = static_cast<std::size_t>(depth);
        if (idx >= best_.size()) return 0;
        const auto& cur = rows_[idx];
        const auto& ref = best_[idx];
        if (cur < ref) return -1;
        if (ref < cur) return 1;
        return 0;
    }

    const PartialSts& sts_;
    int v_;
    const std::vector<int>& color_;
    const std::vector<int>& class_at_;
    std::vector<int> pos_;
    std::vector<Point> point_at_;
    std::vector<std::vector<Block>> rows_;
    std::vector<std::vector<Block>> best_;
    bool have_best_ = false;
};

}  // namespace detail

/// Canonical form of a complete system: invariant fingerprint plus the block
/// list under a canonical labeling. Equal forms iff isomorphic.
inline CanonicalForm canonical_form(const PartialSts& sts) {
    CanonicalForm cf;
    cf.fp = fingerprint(sts);
    int v = sts.order();
    if (v == 0) return cf;

    // Initial point colors from the pair invariants.
    std::vector<std::vector<std::vector<int>>> point_inv(static_cast<std::size_t>(v));
    for (Point x = 0; x < v; ++x) {
        for (Point y = 0; y < v; ++y)
            if (y != x) point_inv[static_cast<std::size_t>(x)].push_back(
                pair_cycle_structure(sts, std::min(x, y), std::max(x, y)));
        std::sort(point_inv[static_cast<std::size_t>(x)].begin(),
                  point_inv[static_cast<std::size_t>(x)].end());
    }
    std::map<std::vector<std::vector<int>>, int> color_ids;
    for (const auto& inv : point_inv) color_ids.emplace(inv, 0);
    int next_color = 0;
    for (auto& [inv, id] : color_ids) id = next_color++;
    std::vector<int> color(static_cast<std::size_t>(v));
    std::vector<int> class_size(static_cast<std::size_t>(next_color), 0);
    for (Point x = 0; x < v; ++x) {
        color[static_cast<std::size_t>(x)] = color_ids[point_inv[static_cast<std::size_t>(x)]];
        ++class_size[static_cast<std::size_t>(color[static_cast<std::size_t>(x)])];
    }
    std::vector<int> class_at;
    class_at.reserve(static_cast<std::size_t>(v));
    for (int c = 0; c < next_color; ++c)
        class_at.insert(class_at.end(), static_cast<std::size_t>(class_size[static_cast<std::size_t>(c)]), c);

    detail::CanonicalSearch search(sts, color, class_at);
    cf.blocks = search.run();
    return cf;
}

inline bool are_isomorphic(const PartialSts& a, const PartialSts& b) {
    if (!a.complete() || !b.complete()) throw Incomplete("isomorphism needs complete systems");
    if (a.order() != b.order() || a.block_count() != b.block_count()) return false;
    Fingerprint fa = fingerprint(a), fb = fingerprint(b);
    if (fa != fb) return false;
    return canonical_form(a).blocks == canonical_form(b).blocks;
}

/// True iff no subsystem of sts (including sts itself when complete) is
/// isomorphic to a member of the forbidden class F.
inline bool is_class_free(const PartialSts& sts, const std::vector<PartialSts>& forbidden) {
    for (const auto& f : forbidden) {
        if (f.order() <= 3) throw TrivialForbidden("forbidden class members must be nontrivial");
        if (!f.complete()) throw Incomplete("forbidden class members must be complete");
    }
    if (forbidden.empty()) return true;
    std::vector<int> orders;
    for (const auto& f : forbidden) orders.push_back(f.order());
    SubsystemLattice lat = enumerate_subsystems(sts);
    for (const auto& rec : lat.records) {
        if (std::find(orders.begin(), orders.end(), rec.order) == orders.end()) continue;
        PartialSts sub = extract_subsystem(sts, rec);
        for (const auto& f : forbidden)
            if (f.order() == rec.order && are_isomorphic(sub, f)) return false;
    }
    return true;
}

}  // namespace sts
