#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sts {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define STS_ERROR_TYPE(Name)                                                   \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
    }

STS_ERROR_TYPE(BadBlock);
STS_ERROR_TYPE(DuplicatePair);
STS_ERROR_TYPE(Incomplete);
STS_ERROR_TYPE(NotBijective);
STS_ERROR_TYPE(EvenModulus);
STS_ERROR_TYPE(BadParity);
STS_ERROR_TYPE(BadRange);
STS_ERROR_TYPE(BadDimension);
STS_ERROR_TYPE(BadCongruence);
STS_ERROR_TYPE(SearchExhausted);
STS_ERROR_TYPE(TrivialForbidden);
STS_ERROR_TYPE(NotEmbedded);
STS_ERROR_TYPE(OrderTooSmall);
STS_ERROR_TYPE(BadCycle);
STS_ERROR_TYPE(NoSafeChoice);
STS_ERROR_TYPE(OutOfRange);
STS_ERROR_TYPE(InternalInconsistency);
STS_ERROR_TYPE(BadDegrees);
STS_ERROR_TYPE(BadEdgeCount);
STS_ERROR_TYPE(DecompositionNotFound);
STS_ERROR_TYPE(StepFailed);
STS_ERROR_TYPE(BudgetExceeded);
STS_ERROR_TYPE(OverlapNotSubsystem);
STS_ERROR_TYPE(WitnessInvalid);
STS_ERROR_TYPE(WitnessNotFound);
STS_ERROR_TYPE(ParseError);

#undef STS_ERROR_TYPE

/// Points are dense nonnegative indices within one system's universe.
using Point = int;

/// Fixed-universe bit set over point indices 0..universe-1.
class PointSet {
public:
    PointSet() = default;

    explicit PointSet(int universe)
        : n_(universe), words_((static_cast<std::size_t>(universe) + 63) / 64, 0) {}

    static PointSet of(int universe, std::initializer_list<int> pts) {
        PointSet s(universe);
        for (int p : pts) s.set(p);
        return s;
    }

    static PointSet of(int universe, const std::vector<int>& pts) {
        PointSet s(universe);
        for (int p : pts) s.set(p);
        return s;
    }

    int universe() const { return n_; }

    bool test(int i) const {
        return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
    }

    void set(int i) { words_[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }

    void reset(int i) { words_[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

    int count() const {
        int c = 0;
        for (auto w : words_) c += __builtin_popcountll(w);
        return c;
    }

    bool empty() const {
        for (auto w : words_) if (w != 0) return false;
        return true;
    }

    bool subset_of(const PointSet& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }

    bool intersects(const PointSet& other) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }

    PointSet operator&(const PointSet& other) const {
        PointSet r(n_);
        for (std::size_t i = 0; i < words_.size(); ++i)
            r.words_[i] = words_[i] & other.words_[i];
        return r;
    }

    PointSet operator|(const PointSet& other) const {
        PointSet r(n_);
        for (std::size_t i = 0; i < words_.size(); ++i)
            r.words_[i] = words_[i] | other.words_[i];
        return r;
    }

    bool operator==(const PointSet& other) const = default;

    /// Calls f(i) for every member, ascending.
    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                int b = __builtin_ctzll(bits);
                f(static_cast<int>(w * 64) + b);
                bits &= bits - 1;
            }
        }
    }

    std::vector<int> to_vector() const {
        std::vector<int> v;
        v.reserve(static_cast<std::size_t>(count()));
        for_each([&](int i) { v.push_back(i); });
        return v;
    }

    std::size_t hash() const {
        std::size_t h = 1469598103934665603ull;
        for (auto w : words_) {
            h ^= w;
            h *= 1099511628211ull;
        }
        return h ^ static_cast<std::size_t>(n_);
    }

private:
    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

struct PointSetHash {
    std::size_t operator()(const PointSet& s) const { return s.hash(); }
};

/// Seeded deterministic RNG. All randomness in the library flows through one
/// of these so a single 64-bit seed reproduces any run.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform-ish value in [0, n). Modulo bias is irrelevant here; only
    /// determinism matters.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : eng_() % n; }

    int index(std::size_t n) { return static_cast<int>(below(n)); }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace sts
