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

#include "mfg/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "mfg/stats.hpp"

namespace mfg::rng {
namespace {

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const Counter out = Philox4x32::apply({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const Counter out = Philox4x32::apply({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const Counter out = Philox4x32::apply({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Uniform, StaysInsideOpenInterval) {
  EXPECT_GT(to_open_unit(0, 0), 0.0);
  EXPECT_LT(to_open_unit(0xffffffffu, 0xffffffffu), 1.0);
}

TEST(Normal, StandardMoments) {
  RunningMoments acc;
  for (std::uint64_t i = 0; i < 200000; ++i) acc.add(normal_at(11, Stream::kAux, 3, i));
  EXPECT_NEAR(acc.mean(), 0.0, 4.0 / std::sqrt(200000.0));
  EXPECT_NEAR(acc.variance(), 1.0, 0.02);
}

TEST(Normal, StreamsAreSeparated) {
  EXPECT_NE(normal_at(1, Stream::kBrownian, 0, 0), normal_at(1, Stream::kInitial, 0, 0));
  EXPECT_NE(normal_at(1, Stream::kBrownian, 0, 0), normal_at(2, Stream::kBrownian, 0, 0));
  EXPECT_NE(normal_at(1, Stream::kBrownian, 0, 0), normal_at(1, Stream::kBrownian, 1, 0));
  EXPECT_EQ(normal_at(1, Stream::kBrownian, 5, 9), normal_at(1, Stream::kBrownian, 5, 9));
}

TEST(DeriveSeed, DistinctTags) {
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

}  // namespace
}  // namespace mfg::rng
