// Copyright 2026 The mfglab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, particle, block), so results never depend on the order in
// which particles are visited or on the number of worker threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mfg::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3").
class Philox4x32 {
 public:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  static constexpr int kRounds = 10;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int r = 0; r < kRounds; ++r) {
      if (r > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

// Independent stream families. Keeping them apart guarantees, e.g., that the
// initial-law draws of particle k never reuse its Brownian increments.
enum class Stream : std::uint32_t {
  kBrownian = 0,
  kInitial = 1,
  kMixture = 2,
  kCatalog = 3,
  kDirections = 4,
  kAux = 5,
};

inline Counter raw(std::uint64_t seed, Stream stream, std::uint64_t particle,
                   std::uint32_t block) {
  const Counter ctr{block, static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(particle),
                    static_cast<std::uint32_t>(particle >> 32)};
  const Key key{static_cast<std::uint32_t>(seed),
                static_cast<std::uint32_t>(seed >> 32)};
  return Philox4x32::apply(ctr, key);
}

// 52-bit uniform strictly inside (0, 1); with 53 bits the top value would
// round to 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((std::uint64_t{hi} << 32) | std::uint64_t{lo}) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

inline std::array<double, 2> uniform_pair(std::uint64_t seed, Stream stream,
                                          std::uint64_t particle,
                                          std::uint32_t block) {
  const Counter w = raw(seed, stream, particle, block);
  return {to_open_unit(w[0], w[1]), to_open_unit(w[2], w[3])};
}

// Box-Muller on one Philox block: two independent standard normals.
inline std::array<double, 2> normal_pair(std::uint64_t seed, Stream stream,
                                         std::uint64_t particle,
                                         std::uint32_t block) {
  const auto [u1, u2] = uniform_pair(seed, stream, particle, block);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

// The i-th standard normal of a (seed, stream, particle) sequence.
inline double normal_at(std::uint64_t seed, Stream stream,
                        std::uint64_t particle, std::uint64_t index) {
  return normal_pair(seed, stream, particle,
                     static_cast<std::uint32_t>(index / 2))[index % 2];
}

inline double uniform_at(std::uint64_t seed, Stream stream,
                         std::uint64_t particle, std::uint64_t index) {
  return uniform_pair(seed, stream, particle,
                      static_cast<std::uint32_t>(index / 2))[index % 2];
}

// Derives a child seed, e.g. one per Monte Carlo repetition.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  const Counter w = raw(seed, Stream::kAux, tag, 0xFFFFFFFFu);
  return (std::uint64_t{w[0]} << 32) | w[1];
}

}  // namespace mfg::rng
