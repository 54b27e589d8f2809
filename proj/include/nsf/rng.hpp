// Copyright (c) 2026 the nsfstat authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace nsf {

// SplitMix64 over a counter; fully portable and reproducible, used to
// derive disjoint substreams from (seed, member, attempt, ...) keys.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    SplitMix64 h(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
    return h.next();
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t member, std::uint64_t attempt) {
    return hash_combine(hash_combine(seed, member), attempt);
}

// Standard normal variates by Box-Muller over SplitMix64; pinned
// arithmetic, identical on every platform.
class NormalStream {
  public:
    explicit NormalStream(std::uint64_t key) : rng_(key) {}

    double uniform() {
        // (0, 1]; never 0 so log() below is safe
        return (static_cast<double>(rng_.next() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    SplitMix64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nsf
