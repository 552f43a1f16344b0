#pragma once

#include <optional>
#include <vector>

#include "sts/algebra.hpp"
#include "sts/core.hpp"

namespace sts {

/// Points and lines of PG(n,2): points are the nonzero vectors of a binary
/// (n+1)-space (point id = vector - 1), blocks the triples summing to zero.
inline PartialSts projective_triple_system(int n) {
    if (n < 1 || n > 12) throw BadDimension("projective dimension out of range");
    int v = (1 << (n + 1)) - 1;
    std::vector<Block> blocks;
    for (int a = 1; a <= v; ++a)
        for (int b = a + 1; b <= v; ++b) {
            int c = a ^ b;
            if (c > b) blocks.push_back(Block::of(a - 1, b - 1, c - 1));
        }
    return PartialSts::make(v, std::move(blocks));
}

/// Points and lines of AG(n,3): points are vectors of a ternary n-space
/// (base-3 encoding), blocks the collinear triples (componentwise sum zero).
inline PartialSts affine_triple_system(int n) {
    if (n < 1 || n > 8) throw BadDimension("affine dimension out of range");
    int v = 1;
    for (int i = 0; i < n; ++i) v *= 3;
    auto third = [&](int a, int b) {
        int c = 0, mul = 1;
        for (int i = 0; i < n; ++i) {
            int da = a % 3, db = b % 3;
            c += ((6 - da - db) % 3) * mul;
            a /= 3;
            b /= 3;
            mul *= 3;
        }
        return c;
    };
    std::vector<Block> blocks;
    for (int a = 0; a < v; ++a)
        for (int b = a + 1; b < v; ++b) {
            int c = third(a, b);
            if (c > b) blocks.push_back(Block::of(a, b, c));
        }
    return PartialSts::make(v, std::move(blocks));
}

/// Bose construction for v = 3 (mod 6): points Z_n x Z_3 with n = v/3,
/// id(x,i) = i*n + x.
inline PartialSts bose(int v) {
    if (v < 9 || v % 6 != 3) throw BadCongruence("bose needs v = 3 (mod 6), v >= 9");
    int n = v / 3;
    CycGroup g(n);
    auto id = [n](int x, int layer) { return layer * n + x; };
    std::vector<Block> blocks;
    for (int x = 0; x < n; ++x) blocks.push_back(Block::of(id(x, 0), id(x, 1), id(x, 2)));
    for (int layer = 0; layer < 3; ++layer)
        for (int x = 0; x < n; ++x)
            for (int y = x + 1; y < n; ++y)
                blocks.push_back(
                    Block::of(id(x, layer), id(y, layer), id(g.half(g.add(x, y)), (layer + 1) % 3)));
    return PartialSts::make(v, std::move(blocks));
}

/// Skolem-type construction for v = 1 (mod 6): points {inf} + Z_2t x Z_3 with
/// t = (v-1)/6, built over the half-idempotent commutative quasigroup on Z_2t.
/// Ids: (x, layer) -> layer*2t + x, inf -> v-1.
inline PartialSts skolem(int v) {
    if (v < 7 || v % 6 != 1) throw BadCongruence("skolem needs v = 1 (mod 6), v >= 7");
    int t = (v - 1) / 6;
    int m = 2 * t;
    auto sigma = [t](int s) { return (s % 2 == 0) ? s / 2 : t + (s - 1) / 2; };
    auto op = [&](int x, int y) { return sigma((x + y) % m); };
    auto id = [m](int x, int layer) { return layer * m + x; };
    Point inf = v - 1;
    std::vector<Block> blocks;
    for (int i = 0; i < t; ++i) blocks.push_back(Block::of(id(i, 0), id(i, 1), id(i, 2)));
    for (int i = 0; i < t; ++i)
        for (int k = 0; k < 3; ++k)
            blocks.push_back(Block::of(inf, id(t + i, k), id(i, (k + 1) % 3)));
    for (int k = 0; k < 3; ++k)
        for (int x = 0; x < m; ++x)
            for (int y = x + 1; y < m; ++y)
                blocks.push_back(Block::of(id(x, k), id(y, k), id(op(x, y), (k + 1) % 3)));
    return PartialSts::make(v, std::move(blocks));
}

/// A complete system of any admissible order.
inline PartialSts complete_system(int v) {
    if (v == 1) return PartialSts::make(1, {});
    if (v == 3) return PartialSts::make(3, {Block::of(0, 1, 2)});
    if (v >= 7 && v % 6 == 1) return skolem(v);
    if (v >= 9 && v % 6 == 3) return bose(v);
    throw BadCongruence("no complete system of inadmissible order");
}

/// Classical 2u+1 construction (no subsystem guarantee): new points Z_u + inf
/// appended after the input's, blocks {x, y, phi(i)} for {x,y} in factor i of
/// the standard 1-factorisation. The input stays embedded as a subsystem.
inline PartialSts classic_double(const PartialSts& input, std::optional<std::uint64_t> seed = {}) {
    if (!input.complete() || input.order() % 2 == 0)
        throw BadCongruence("classic doubling needs a complete system of odd order");
    int u = input.order();
    std::vector<Point> phi(static_cast<std::size_t>(u));
    for (int i = 0; i < u; ++i) phi[static_cast<std::size_t>(i)] = i;
    if (seed) {
        Rng rng(*seed);
        rng.shuffle(phi);
    }
    OneFactorisation fac = standard_one_factorisation(u);
    auto map = [u](int z) { return u + z; };  // finite z -> u+z, inf -> 2u
    std::vector<Block> blocks = input.blocks();
    for (int i = 0; i < u; ++i)
        for (auto [x, y] : fac.factor(i))
            blocks.push_back(Block::of(map(x), map(y), phi[static_cast<std::size_t>(i)]));
    return PartialSts::make(2 * u + 1, std::move(blocks));
}

/// Classical v -> 3v construction: three layered copies plus cross blocks
/// {(x,0),(y,1),(x*y,2)} over the Steiner quasigroup. Each layer stays
/// embedded as a subsystem.
inline PartialSts triple_product(const PartialSts& input) {
    if (!input.complete()) throw Incomplete("triple product needs a complete system");
    int v = input.order();
    auto id = [v](int x, int layer) { return layer * v + x; };
    std::vector<Block> blocks;
    for (int layer = 0; layer < 3; ++layer)
        for (const Block& b : input.blocks())
            blocks.push_back(Block::of(id(b.p[0], layer), id(b.p[1], layer), id(b.p[2], layer)));
    for (int x = 0; x < v; ++x)
        for (int y = 0; y < v; ++y)
            blocks.push_back(Block::of(id(x, 0), id(y, 1), id(quasigroup_op(input, x, y), 2)));
    return PartialSts::make(3 * v, std::move(blocks));
}

/// All Pasch configurations of a complete system: four blocks {a,b,c},
/// {a,d,e}, {f,b,d}, {f,c,e} on six points, sorted and deduplicated.
inline std::vector<std::array<Block, 4>> pasch_configurations(const PartialSts& sts) {
    std::vector<std::array<Block, 4>> found;
    const auto& blocks = sts.blocks();
    for (std::size_t i = 0; i < blocks.size(); ++i)
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            const Block &b1 = blocks[i], &b2 = blocks[j];
            Point shared = -1;
            int overlap = 0;
            for (Point p : b1.p)
                if (b2.contains(p)) {
                    shared = p;
                    ++overlap;
                }
            if (overlap != 1) continue;
            Point a = shared;
            std::array<Point, 2> bc{}, de{};
            for (int k = 0, t = 0; k < 3; ++k)
                if (b1.p[static_cast<std::size_t>(k)] != a)
                    bc[static_cast<std::size_t>(t++)] = b1.p[static_cast<std::size_t>(k)];
            for (int k = 0, t = 0; k < 3; ++k)
                if (b2.p[static_cast<std::size_t>(k)] != a)
                    de[static_cast<std::size_t>(t++)] = b2.p[static_cast<std::size_t>(k)];
            for (int pairing = 0; pairing < 2; ++pairing) {
                Point b = bc[0], c = bc[1];
                Point d = de[static_cast<std::size_t>(pairing)];
                Point e = de[static_cast<std::size_t>(1 - pairing)];
                auto b3 = sts.block_through(b, d);
                auto b4 = sts.block_through(c, e);
                if (!b3 || !b4) continue;
                Point f = b3->third(b, d);
                if (f == a || b4->third(c, e) != f) continue;
                std::array<Block, 4> cfg{b1, b2, *b3, *b4};
                std::sort(cfg.begin(), cfg.end());
                found.push_back(cfg);
            }
        }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    return found;
}

/// Switches the k-th Pasch configuration to its opposite quadrilateral,
/// producing a complete system on the same order that may fall in a different
/// isomorphism class.
inline PartialSts pasch_variant(const PartialSts& sts, int k) {
    auto configs = pasch_configurations(sts);
    if (k < 0 || static_cast<std::size_t>(k) >= configs.size())
        throw SearchExhausted("no such Pasch configuration");
    const auto& cfg = configs[static_cast<std::size_t>(k)];
    // Recover the labels: cfg[0] and cfg[1] meet in a.
    const Block &b1 = cfg[0], &b2 = cfg[1];
    Point a = -1;
    for (Point p : b1.p)
        if (b2.contains(p)) a = p;
    Point b = -1, c = -1, d = -1, e = -1;
    for (Point p : b1.p)
        if (p != a) (b < 0 ? b : c) = p;
    for (Point p : b2.p)
        if (p != a) (d < 0 ? d : e) = p;
    // Align (d,e) with the pairing actually present in the configuration.
    auto in_cfg = [&](const Block& blk) {
        return blk == cfg[0] || blk == cfg[1] || blk == cfg[2] || blk == cfg[3];
    };
    auto b3 = sts.block_through(b, d);
    if (!b3 || !in_cfg(*b3)) std::swap(d, e);
    Point f = sts.block_through(b, d)->third(b, d);
    std::vector<Block> blocks;
    blocks.reserve(sts.block_count());
    for (const Block& blk : sts.blocks())
        if (!in_cfg(blk)) blocks.push_back(blk);
    blocks.push_back(Block::of(f, b, c));
    blocks.push_back(Block::of(f, d, e));
    blocks.push_back(Block::of(a, b, d));
    blocks.push_back(Block::of(a, c, e));
    return PartialSts::make(sts.order(), std::move(blocks));
}

namespace detail {

/// One 6-cycle trade on a complete system: removes blocks {a,b,c}, {a,d,e},
/// {b,d,f} and adds {a,b,d}. The freed pairs minus the added block leave the
/// hexagon a-c-b-f-d-e. The three removed blocks always have this shape for
/// any block {a,b,c} and any second block through a avoiding b and c, and f
/// is automatically a sixth distinct point.
struct HexTrade {
    Block removed[3];
    Block added;
    std::array<Point, 6> cycle;  // in cycle order
};

inline std::optional<HexTrade> pick_hex_trade(const PartialSts& sts, Rng& rng,
                                              const std::vector<Block>& protected_blocks) {
    auto is_protected = [&](const Block& b) {
        for (const Block& p : protected_blocks)
            if (p == b) return true;
        return false;
    };
    for (int attempt = 0; attempt < 512; ++attempt) {
        const Block& b1 = sts.blocks()[rng.below(sts.block_count())];
        if (is_protected(b1)) continue;
        int ai = rng.index(3);
        Point a = b1.p[ai];
        Point b = b1.p[(ai + 1) % 3], c = b1.p[(ai + 2) % 3];
        if (b > c) std::swap(b, c);
        // Second block through a, meeting b1 only in a.
        Point d = -1, e = -1;
        for (int tries = 0; tries < 64 && d < 0; ++tries) {
            Point w = static_cast<Point>(rng.below(static_cast<std::uint64_t>(sts.order())));
            if (w == a || w == b || w == c) continue;
            Block b2 = *sts.block_through(a, w);
            if (b2.contains(b) || b2.contains(c) || is_protected(b2)) continue;
            d = std::min(w, b2.third(a, w));
            e = std::max(w, b2.third(a, w));
        }
        if (d < 0) continue;
        Block b2 = *sts.block_through(a, d);
        Block b3 = *sts.block_through(b, d);
        if (is_protected(b3)) continue;
        Point f = b3.third(b, d);
        HexTrade t;
        t.removed[0] = b1;
        t.removed[1] = b2;
        t.removed[2] = b3;
        t.added = Block::of(a, b, d);
        t.cycle = {a, c, b, f, d, e};
        return t;
    }
    return std::nullopt;
}

}  // namespace detail

/// Partial system of admissible order v >= 13 whose leave is exactly one
/// 6-cycle, obtained from a complete system by a seeded trade.
inline PartialSts partial_with_hexagon_leave(int v, std::uint64_t seed = 0,
                                             const std::vector<Block>& protected_blocks = {},
                                             const PartialSts* host = nullptr) {
    if (v < 13 || (v % 6 != 1 && v % 6 != 3))
        throw BadCongruence("hexagon-leave systems need admissible v >= 13");
    if (host && (!host->complete() || host->order() != v))
        throw BadCongruence("host must be a complete system of order v");
    PartialSts base = host ? *host : complete_system(v);
    Rng rng(seed);
    auto trade = detail::pick_hex_trade(base, rng, protected_blocks);
    if (!trade) throw SearchExhausted("no usable trade found; retry with another seed");
    std::vector<Block> blocks;
    blocks.reserve(base.block_count() - 2);
    for (const Block& b : base.blocks())
        if (b != trade->removed[0] && b != trade->removed[1] && b != trade->removed[2])
            blocks.push_back(b);
    blocks.push_back(trade->added);
    return PartialSts::make(v, std::move(blocks));
}

/// Greedy randomized maximal (or bounded) partial system packing.
inline PartialSts random_partial(int v, std::uint64_t seed, int max_blocks = -1) {
    if (v < 0) throw BadRange("negative order");
    std::vector<Block> all;
    for (int a = 0; a < v; ++a)
        for (int b = a + 1; b < v; ++b)
            for (int c = b + 1; c < v; ++c) all.push_back(Block{{a, b, c}});
    Rng rng(seed);
    rng.shuffle(all);
    PairIndex taken(v);
    std::vector<Block> chosen;
    for (const Block& b : all) {
        if (max_blocks >= 0 && static_cast<int>(chosen.size()) >= max_blocks) break;
        if (taken.get(b.p[0], b.p[1]) != -1 || taken.get(b.p[0], b.p[2]) != -1 ||
            taken.get(b.p[1], b.p[2]) != -1)
            continue;
        auto idx = static_cast<std::int32_t>(chosen.size());
        taken.put(b.p[0], b.p[1], idx);
        taken.put(b.p[0], b.p[2], idx);
        taken.put(b.p[1], b.p[2], idx);
        chosen.push_back(b);
    }
    return PartialSts::make(v, std::move(chosen));
}

}  // namespace sts
