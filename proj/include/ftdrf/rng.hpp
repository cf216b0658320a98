#pragma once

#include <cmath>
#include <cstdint>

namespace ftdrf {

// Seeded randomness for the whole library. Everything here is a fixed,
// platform-independent algorithm so that (data, params, seed) replays
// byte-identically on any build; the standard <random> distributions are
// implementation-defined and therefore not used.

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

}  // namespace detail

/// Derives the seed of an independent stream from a parent seed and a stream
/// index. Streams do not chain: stream j is the same whether or not streams
/// 0..j-1 were ever instantiated.
inline std::uint64_t hash_seed(std::uint64_t seed, std::uint64_t stream) {
    return detail::mix64(seed + detail::mix64(stream + detail::kGolden));
}

/// SplitMix64 generator with unbiased integer and 53-bit real draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    /// Uniform integer in [0, n), unbiased (Lemire's method with rejection).
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform real in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    /// Uniform real strictly inside (lo, hi); requires lo < hi. Falls back to
    /// the midpoint when rounding lands on an endpoint.
    double open_range(double lo, double hi) {
        double x = lo + unit() * (hi - lo);
        if (!(x > lo && x < hi)) x = lo + (hi - lo) / 2.0;
        return x;
    }

    template <typename T>
    void shuffle(T* data, std::size_t n) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            T tmp = data[i - 1];
            data[i - 1] = data[j];
            data[j] = tmp;
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace ftdrf
