#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sts/common.hpp"

namespace sts {

/// An unordered 3-set of points, stored sorted.
struct Block {
    std::array<Point, 3> p{};

    static Block of(Point a, Point b, Point c) {
        Block blk{{a, b, c}};
        std::sort(blk.p.begin(), blk.p.end());
        if (blk.p[0] == blk.p[1] || blk.p[1] == blk.p[2])
            throw BadBlock("block points not distinct");
        return blk;
    }

    bool contains(Point x) const { return p[0] == x || p[1] == x || p[2] == x; }

    /// The point of the block other than x and y.
    Point third(Point x, Point y) const {
        for (Point q : p)
            if (q != x && q != y) return q;
        return p[0];
    }

    auto operator<=>(const Block&) const = default;
};

/// O(1) unordered-pair -> block lookup. Flat triangular array for small
/// universes, hash map beyond (construction-only giant systems).
class PairIndex {
public:
    PairIndex() = default;

    explicit PairIndex(int n) : n_(n) {
        std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
        if (pairs <= kFlatLimit)
            flat_.assign(pairs, -1);
        else
            sparse_.reserve(1024);
    }

    /// Block index through {x,y}, or -1.
    std::int32_t get(Point x, Point y) const {
        if (!flat_.empty()) return flat_[tri(x, y)];
        auto it = sparse_.find(key(x, y));
        return it == sparse_.end() ? -1 : it->second;
    }

    /// Records block `id` for {x,y}; returns false if the pair was taken.
    bool put(Point x, Point y, std::int32_t id) {
        if (!flat_.empty()) {
            auto& slot = flat_[tri(x, y)];
            if (slot != -1) return false;
            slot = id;
            return true;
        }
        return sparse_.emplace(key(x, y), id).second;
    }

private:
    static constexpr std::size_t kFlatLimit = 1u << 26;

    static std::size_t tri(Point x, Point y) {
        if (x > y) std::swap(x, y);
        return static_cast<std::size_t>(y) * (y - 1) / 2 + x;
    }

    static std::uint64_t key(Point x, Point y) {
        if (x > y) std::swap(x, y);
        return (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint32_t>(y);
    }

    int n_ = 0;
    std::vector<std::int32_t> flat_;
    std::unordered_map<std::uint64_t, std::int32_t> sparse_;
};

/// Pairs covered by no block.
struct LeaveGraph {
    int order = 0;
    std::vector<std::pair<Point, Point>> edges;  // (x,y) with x<y, sorted
};

/// A partial Steiner triple system: every pair of points lies in at most one
/// block. A complete system covers every pair exactly once. Values are
/// immutable after construction; every operation builds a new system.
class PartialSts {
public:
    PartialSts() = default;

    /// Validates blocks (3 distinct in-range points each, no pair twice),
    /// builds the pair index and computes the completeness flag.
    static PartialSts make(int order, std::vector<Block> blocks,
                           std::vector<std::string> labels = {}) {
        if (order < 0) throw BadBlock("negative order");
        PartialSts s;
        s.order_ = order;
        std::sort(blocks.begin(), blocks.end());
        blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
        s.blocks_ = std::move(blocks);
        s.pairs_ = PairIndex(order);
        for (std::size_t i = 0; i < s.blocks_.size(); ++i) {
            const Block& b = s.blocks_[i];
            if (b.p[0] < 0 || b.p[2] >= order) throw BadBlock("block point out of range");
            if (b.p[0] == b.p[1] || b.p[1] == b.p[2]) throw BadBlock("block points not distinct");
            auto id = static_cast<std::int32_t>(i);
            if (!s.pairs_.put(b.p[0], b.p[1], id) || !s.pairs_.put(b.p[0], b.p[2], id) ||
                !s.pairs_.put(b.p[1], b.p[2], id))
                throw DuplicatePair("two blocks share a pair");
        }
        std::uint64_t all = static_cast<std::uint64_t>(order) * (order - 1) / 2;
        s.complete_ = (3 * static_cast<std::uint64_t>(s.blocks_.size()) == all);
        s.labels_ = std::move(labels);
        return s;
    }

    int order() const { return order_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t block_count() const { return blocks_.size(); }
    bool complete() const { return complete_; }
    const std::vector<std::string>& labels() const { return labels_; }

    bool pair_covered(Point x, Point y) const { return pairs_.get(x, y) != -1; }

    std::optional<Block> block_through(Point x, Point y) const {
        auto id = pairs_.get(x, y);
        if (id == -1) return std::nullopt;
        return blocks_[static_cast<std::size_t>(id)];
    }

    bool has_block(const Block& b) const {
        auto found = block_through(b.p[0], b.p[1]);
        return found && *found == b;
    }

    std::uint64_t leave_edge_count() const {
        return static_cast<std::uint64_t>(order_) * (order_ - 1) / 2 - 3 * blocks_.size();
    }

private:
    int order_ = 0;
    std::vector<Block> blocks_;
    PairIndex pairs_;
    bool complete_ = false;
    std::vector<std::string> labels_;
};

inline PartialSts make_partial_system(int order, std::vector<Block> blocks,
                                      std::vector<std::string> labels = {}) {
    return PartialSts::make(order, std::move(blocks), std::move(labels));
}

inline LeaveGraph leave_graph(const PartialSts& ps) {
    LeaveGraph g;
    g.order = ps.order();
    for (Point y = 1; y < ps.order(); ++y)
        for (Point x = 0; x < y; ++x)
            if (!ps.pair_covered(x, y)) g.edges.emplace_back(x, y);
    return g;
}

/// Steiner quasigroup operation: x*x = x, otherwise the third point of the
/// unique block through {x,y}.
inline Point quasigroup_op(const PartialSts& sts, Point x, Point y) {
    if (!sts.complete()) throw Incomplete("quasigroup view needs a complete system");
    if (x == y) return x;
    return sts.block_through(x, y)->third(x, y);
}

/// Image of a system under a point bijection.
inline PartialSts relabel(const PartialSts& ps, const std::vector<Point>& perm) {
    int n = ps.order();
    if (static_cast<int>(perm.size()) != n) throw NotBijective("permutation size mismatch");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (Point q : perm) {
        if (q < 0 || q >= n || seen[static_cast<std::size_t>(q)])
            throw NotBijective("not a bijection on points");
        seen[static_cast<std::size_t>(q)] = 1;
    }
    std::vector<Block> blocks;
    blocks.reserve(ps.block_count());
    for (const Block& b : ps.blocks())
        blocks.push_back(Block::of(perm[static_cast<std::size_t>(b.p[0])],
                                   perm[static_cast<std::size_t>(b.p[1])],
                                   perm[static_cast<std::size_t>(b.p[2])]));
    std::vector<std::string> labels;
    if (!ps.labels().empty()) {
        labels.resize(static_cast<std::size_t>(n));
        for (Point i = 0; i < n; ++i)
            labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
                ps.labels()[static_cast<std::size_t>(i)];
    }
    return PartialSts::make(n, std::move(blocks), std::move(labels));
}

/// Union of two systems glued along identified points. `identification` lists
/// (point of a, point of b) pairs; unidentified b-points are appended after
/// a's universe in ascending b order. Blocks meeting the overlap must agree,
/// otherwise the pair-at-most-once revalidation raises DuplicatePair.
inline PartialSts glued_union(const PartialSts& a, const PartialSts& b,
                              const std::vector<std::pair<Point, Point>>& identification) {
    std::vector<Point> b_to_merged(static_cast<std::size_t>(b.order()), -1);
    std::vector<char> a_used(static_cast<std::size_t>(a.order()), 0);
    for (auto [pa, pb] : identification) {
        if (pa < 0 || pa >= a.order() || pb < 0 || pb >= b.order())
            throw NotBijective("identification point out of range");
        if (a_used[static_cast<std::size_t>(pa)] || b_to_merged[static_cast<std::size_t>(pb)] != -1)
            throw NotBijective("identification not injective");
        a_used[static_cast<std::size_t>(pa)] = 1;
        b_to_merged[static_cast<std::size_t>(pb)] = pa;
    }
    int next = a.order();
    for (Point pb = 0; pb < b.order(); ++pb)
        if (b_to_merged[static_cast<std::size_t>(pb)] == -1)
            b_to_merged[static_cast<std::size_t>(pb)] = next++;

    std::vector<Block> blocks = a.blocks();
    for (const Block& blk : b.blocks())
        blocks.push_back(Block::of(b_to_merged[static_cast<std::size_t>(blk.p[0])],
                                   b_to_merged[static_cast<std::size_t>(blk.p[1])],
                                   b_to_merged[static_cast<std::size_t>(blk.p[2])]));
    return PartialSts::make(next, std::move(blocks));
}

}  // namespace sts
