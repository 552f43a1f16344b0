#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "sts/common.hpp"

namespace sts {

/// Additive group of integers modulo an odd n >= 3.
struct CycGroup {
    int n;

    explicit CycGroup(int modulus) : n(modulus) {
        if (n < 3 || n % 2 == 0) throw EvenModulus("modulus must be odd and >= 3");
    }

    int add(int a, int b) const { return (a + b) % n; }
    int dbl(int a) const { return (2 * a) % n; }
    /// Halving is well defined modulo odd n.
    int half(int a) const { return (a % 2 == 0) ? a / 2 : (a + n) / 2; }
};

/// A coset r + <d> of the subgroup generated by a divisor d of n.
struct Coset {
    int modulus = 0;
    int generator = 0;  // divisor d of modulus
    int rep = 0;        // representative in 0..d-1

    int size() const { return modulus / generator; }

    std::vector<int> elements() const {
        std::vector<int> e;
        e.reserve(static_cast<std::size_t>(size()));
        for (int x = rep; x < modulus; x += generator) e.push_back(x);
        return e;
    }

    bool contains(int x) const { return x % generator == rep; }
};

inline std::vector<int> proper_divisors(int n) {
    std::vector<int> d;
    for (int k = 2; k < n; ++k)
        if (n % k == 0) d.push_back(k);
    return d;
}

/// All cosets of the subgroup <d> in Z_n.
inline std::vector<Coset> cosets_of(int d, int n) {
    std::vector<Coset> cs;
    cs.reserve(static_cast<std::size_t>(d));
    for (int r = 0; r < d; ++r) cs.push_back(Coset{n, d, r});
    return cs;
}

/// Divisors d of u (1 < d < u) whose cosets have admissible size, i.e.
/// u/d = 1 or 3 (mod 6). These index the coset family relevant to
/// subsystem avoidance.
inline std::vector<int> admissible_coset_divisors(int u) {
    std::vector<int> out;
    for (int d : proper_divisors(u)) {
        int size = u / d;
        if (size % 6 == 1 || size % 6 == 3) out.push_back(d);
    }
    return out;
}

/// The standard 1-factorisation on Z_n + {inf} for odd n: factor i holds the
/// pairs {x,y} with x+y = 2i together with {inf, i}. The infinite vertex is
/// the sentinel index n.
struct OneFactorisation {
    int n = 0;

    int infinity() const { return n; }

    /// Factor index hosting the edge {x,y}; vertices in 0..n, with n = inf.
    int factor_of(int x, int y) const {
        if (x == y || x > n || y > n || x < 0 || y < 0) throw OutOfRange("bad edge");
        if (x == n) return y;
        if (y == n) return x;
        int s = (x + y) % n;
        return (s % 2 == 0) ? s / 2 : (s + n) / 2;
    }

    /// Edges of factor i as sorted pairs, finite pairs first.
    std::vector<std::pair<int, int>> factor(int i) const {
        std::vector<std::pair<int, int>> edges;
        edges.reserve(static_cast<std::size_t>((n + 1) / 2));
        for (int x = 0; x < n; ++x) {
            int y = (2 * i - x % n + 2 * n) % n;
            if (x < y) edges.emplace_back(x, y);
        }
        edges.emplace_back(i, n);
        std::sort(edges.begin(), edges.end());
        return edges;
    }
};

inline OneFactorisation standard_one_factorisation(int n) {
    if (n < 3 || n % 2 == 0) throw EvenModulus("standard 1-factorisation needs odd n >= 3");
    return OneFactorisation{n};
}

/// True iff a+b lies in S for all distinct a,b in S (subset of Z_n given as a
/// bitmask, n <= 63).
inline bool closed_under_distinct_sums_mask(std::uint64_t s, int n) {
    for (int a = 0; a < n; ++a) {
        if (!((s >> a) & 1)) continue;
        for (int b = a + 1; b < n; ++b) {
            if (!((s >> b) & 1)) continue;
            int c = (a + b) % n;
            if (!((s >> c) & 1)) return false;
        }
    }
    return true;
}

inline bool is_subgroup_mask(std::uint64_t s, int n) {
    if (!(s & 1)) return false;  // needs 0
    for (int a = 0; a < n; ++a) {
        if (!((s >> a) & 1)) continue;
        for (int b = a; b < n; ++b) {
            if (!((s >> b) & 1)) continue;
            if (!((s >> ((a + b) % n)) & 1)) return false;
        }
    }
    return true;
}

inline std::uint64_t mask_of(const std::vector<int>& set) {
    std::uint64_t m = 0;
    for (int x : set) m |= std::uint64_t{1} << x;
    return m;
}

inline bool closed_under_distinct_sums(const std::vector<int>& set, int n) {
    if (n <= 63) return closed_under_distinct_sums_mask(mask_of(set), n);
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int x : set) in[static_cast<std::size_t>(x)] = 1;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i + 1; j < set.size(); ++j)
            if (!in[static_cast<std::size_t>((set[i] + set[j]) % n)]) return false;
    return true;
}

inline bool is_subgroup(const std::vector<int>& set, int n) {
    if (n <= 63) return is_subgroup_mask(mask_of(set), n);
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int x : set) in[static_cast<std::size_t>(x)] = 1;
    if (!in[0]) return false;
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = i; j < set.size(); ++j)
            if (!in[static_cast<std::size_t>((set[i] + set[j]) % n)]) return false;
    return true;
}

/// If S (subset of Z_n + {inf}, with inf given as vertex n) induces a
/// sub-1-factorisation of the standard 1-factorisation, returns the sorted
/// factor indices used; otherwise nullopt.
///
/// The edge {x,y} of the complete graph on S lies in exactly one host factor,
/// so the partition of E(K_S) into candidate sub-factors is forced: group
/// edges by host factor and check every nonempty group is a perfect matching
/// on S. No search is needed.
inline std::optional<std::vector<int>> induced_sub_factorisation(const std::vector<int>& S,
                                                                 const OneFactorisation& fac) {
    int n = fac.n;
    std::size_t sz = S.size();
    if (sz < 2 || sz % 2 != 0) return std::nullopt;
    std::vector<std::vector<std::pair<int, int>>> groups(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < sz; ++i)
        for (std::size_t j = i + 1; j < sz; ++j) {
            int f = fac.factor_of(S[i], S[j]);
            groups[static_cast<std::size_t>(f)].emplace_back(S[i], S[j]);
        }
    std::vector<int> used;
    for (int f = 0; f < n; ++f) {
        const auto& g = groups[static_cast<std::size_t>(f)];
        if (g.empty()) continue;
        if (g.size() * 2 != sz) return std::nullopt;  // not a perfect matching on S
        std::vector<char> hit(static_cast<std::size_t>(n) + 1, 0);
        for (auto [x, y] : g) {
            if (hit[static_cast<std::size_t>(x)] || hit[static_cast<std::size_t>(y)])
                return std::nullopt;
            hit[static_cast<std::size_t>(x)] = hit[static_cast<std::size_t>(y)] = 1;
        }
        used.push_back(f);
    }
    if (used.empty()) return std::nullopt;
    return used;
}

struct HarmonicBound {
    double sum;
    double bound;
};

/// sum 1/d' + 1/(d'+2) + ... + 1/d'' against (1/2) ln((d''+1)/(d'-1)) for odd
/// 3 <= d' <= d''.
inline HarmonicBound harmonic_bound(int d1, int d2) {
    if (d1 % 2 == 0 || d2 % 2 == 0) throw BadParity("bounds must be odd");
    if (d1 < 3 || d2 < d1) throw BadRange("need 3 <= d' <= d''");
    double sum = 0.0;
    for (int d = d1; d <= d2; d += 2) sum += 1.0 / d;
    double bound = 0.5 * std::log(static_cast<double>(d2 + 1) / (d1 - 1));
    return {sum, bound};
}

}  // namespace sts
