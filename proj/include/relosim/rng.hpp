#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "relosim/error.hpp"

namespace relosim {

// xoshiro256++ with splitmix64 seeding. Self-contained so that draws are
// bit-identical across platforms and standard-library versions; reproducibility
// of simulation outputs depends on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_)
            word = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0)
            throw DomainError("Rng::next_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % n;
        }
    }

    // Standard normal via Box-Muller; caches the second deviate.
    double next_normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        while (u1 <= 0.0)
            u1 = next_double();
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Index draw proportional to nonnegative weights whose cumulative sums are
    // given in `cumulative` (last entry = total weight > 0).
    std::size_t next_weighted_index(std::span<const double> cumulative) {
        if (cumulative.empty() || cumulative.back() <= 0.0)
            throw DataError("Rng::next_weighted_index: total weight must be positive");
        const double u = next_double() * cumulative.back();
        std::size_t lo = 0, hi = cumulative.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cumulative[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// Independent stream keyed by (master, a, b). Adding entities never perturbs
// other entities' draws because every stream is derived, not split.
inline Rng derive_rng(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t x = master;
    std::uint64_t h = Rng::splitmix64(x);
    x = h ^ (a + 0x9e3779b97f4a7c15ULL);
    h = Rng::splitmix64(x);
    x = h ^ (b + 0xbf58476d1ce4e5b9ULL);
    h = Rng::splitmix64(x);
    return Rng(h);
}

} // namespace relosim
