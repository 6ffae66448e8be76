// Copyright 2026 The SHA Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Seeded random streams used everywhere in the library.
 *
 * All randomness goes through two fully specified algorithms so results are
 * identical across platforms and standard libraries:
 *
 *  - SplitMix64 (Steele, Lea, Flood 2014) for deriving independent sub-seeds
 *    from a master seed and a counter.
 *  - std::mt19937_64 as the bulk generator. Its output sequence is fixed by
 *    the C++ standard. We never use std::*_distribution, whose algorithms are
 *    implementation-defined; doubles are built from the top 53 bits.
 */
#pragma once

#include <cstdint>
#include <random>

namespace sha {

/// One SplitMix64 output for state `x` (the state is advanced by the golden gamma first).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31U);
}

/// Counter-based sub-seed: stream `index` of master seed `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by rejection (unbiased); bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
        std::uint64_t r = engine_();
        while (r >= limit) {
            r = engine_();
        }
        return r % bound;
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace sha
