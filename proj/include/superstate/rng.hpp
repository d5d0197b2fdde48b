#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace superstate {

/// SplitMix64 generator (Steele, Lea & Flood, 2014). Counter-based: the state
/// advances by a fixed odd constant and the output is a bijective hash of the
/// counter, so streams are identical on every platform for a given 64-bit seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from (seed, stream). Used to split one
/// master seed across episodes, sweep cells, and sampling workers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x632be59bd9b4e019ull + stream * 0x9e3779b97f4a7c15ull));
    g.next_u64();
    return g.next_u64();
}

/// Samples an index from a probability row by inverse CDF walk. Zero-probability
/// entries are never returned; rounding overflow falls back to the last
/// positive-probability index.
inline int sample_categorical(std::span<const double> probs, SplitMix64& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    int last_positive = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = static_cast<int>(i);
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return last_positive;
}

/// Uniform draw from the probability simplex (Dirichlet(1,...,1)) via
/// normalized exponentials.
inline std::vector<double> dirichlet_uniform(int n, SplitMix64& rng) {
    std::vector<double> x(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.next_double();
        // -log(1-u) with u in [0,1) keeps the argument strictly positive.
        x[i] = -std::log(1.0 - u);
        total += x[i];
    }
    for (int i = 0; i < n; ++i) x[i] /= total;
    return x;
}

/// Standard normal via Box-Muller.
inline double gaussian(SplitMix64& rng) {
    double u1 = 1.0 - rng.next_double();
    double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace superstate
