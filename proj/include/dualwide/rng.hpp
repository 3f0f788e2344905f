// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation.  Gaussian variates are produced
// with an explicit Box-Muller transform on top of mt19937_64 so that a given
// seed yields the same stream on every standard library implementation.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "dualwide/types.hpp"

namespace dualwide {

class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /** Uniform double in [0, 1) with 53 random bits. */
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive range [lo, hi]
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(eng_() % span);
    }

    /** Standard normal via Box-Muller; one spare variate is cached. */
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = kTwoPi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /** Circularly-symmetric complex normal with total variance `var`. */
    cxd cnormal(double var) {
        double s = std::sqrt(var / 2.0);
        return cxd{s * normal(), s * normal()};
    }

    /**
     * Derive an independent stream seed from a master seed and up to two
     * indices (splitmix64 finalizer applied to the mixed words).
     */
    static uint64_t derive(uint64_t master, uint64_t a, uint64_t b = 0) {
        uint64_t x = master + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dualwide
