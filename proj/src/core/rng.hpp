//
// Copyright (c) 2026 The edgeplan authors.
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace edgeplan {

// splitmix64 step; used to derive independent substream seeds from a
// (seed, index) pair so results do not depend on draw order elsewhere.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ull + 1));
}

// Deterministic RNG wrapper. std::mt19937_64 has a fixed, portable bit
// stream; the distributions below avoid std::normal_distribution and
// std::uniform_real_distribution, whose outputs may differ across
// standard libraries.
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1): 53-bit mantissa, same on every platform.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n); n must be > 0. Rejection-free modulo is
    // fine here: n is tiny compared to 2^64, so the bias is far below
    // anything the statistics in this project can resolve.
    uint64_t below(uint64_t n) { return gen_() % n; }

    // Standard normal via Box-Muller. Hand-rolled for the same
    // portability reason as next_double(); one value per call, the
    // second value of each pair is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace edgeplan
