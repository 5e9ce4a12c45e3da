// Copyright 2026 The MSD Authors.
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

#ifndef MSD_CORE_RNG_HPP_
#define MSD_CORE_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace msd {

// Seeded random source. The engine is std::mt19937_64 (its output stream is
// fixed by the standard); the value transforms are spelled out here instead
// of going through std::*_distribution, whose bit-level behaviour is
// implementation defined. Checkpoints and sampled batches must reproduce
// byte-for-byte from a seed, so every transform is pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double NextUniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection keeps the draw unbiased.
  std::uint64_t NextBounded(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t value = engine_();
    while (value >= limit) value = engine_();
    return value % bound;
  }

  bool NextBool() { return (engine_() >> 63) != 0; }

  // Standard normal via Box-Muller; the spare value is cached.
  double NextNormal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = NextUniform();
    double u2 = NextUniform();
    while (u1 <= 0.0) u1 = NextUniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double NextNormal(double mean, double stddev) {
    return mean + stddev * NextNormal();
  }

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(NextBounded(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace msd

#endif  // MSD_CORE_RNG_HPP_
