// Copyright 2026 The DRGame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace drgame {

// Seeded generator with platform-independent derived distributions.
//
// std::mt19937_64 output is fully specified by the standard, but the
// std::*_distribution adaptors are not, so shuffles and normal draws are
// built directly on the raw engine output here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent stream for a named purpose (shuffle, negatives, init...).
  static Rng stream(uint64_t seed, uint64_t purpose) {
    return Rng(splitmix64(seed ^ splitmix64(purpose + 0x632be59bd9b4e019ULL)));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased by rejection.
  uint64_t index(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (size_t i = values.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

// Stream ids, kept in one place so no two purposes collide.
namespace rng_stream {
inline constexpr uint64_t kSplit = 1;
inline constexpr uint64_t kDgiInit = 2;
inline constexpr uint64_t kDgiCorruption = 3;
inline constexpr uint64_t kKmeansUsers = 4;
inline constexpr uint64_t kKmeansItems = 5;
inline constexpr uint64_t kModelInit = 6;
inline constexpr uint64_t kShuffle = 7;
inline constexpr uint64_t kNegatives = 8;
inline constexpr uint64_t kSynthetic = 9;
}  // namespace rng_stream

}  // namespace drgame
