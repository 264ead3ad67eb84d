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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mfg/catalog.hpp"
#include "mfg/errors.hpp"
#include "mfg/hjb.hpp"
#include "mfg/mfe.hpp"
#include "mfg/relaxed.hpp"

namespace mfg {
namespace {

const TimeGrid kTime(1.0, 10);
const SpatialGrid kSpace({-2.0}, {2.0}, {5});

ActionGrid corners() { return ActionGrid::uniform(Box::cube(1, -1.0, 1.0), 2); }
ActionGrid five_atoms() { return ActionGrid::uniform(Box::cube(1, -1.0, 1.0), 5); }

// Probabilities that are multiples of 1/20, different at every row.
ControlField random_relaxed(const TimeGrid& time, const SpatialGrid& space, std::uint64_t seed) {
  const ActionGrid atoms = five_atoms();
  const std::size_t rows = time.steps() * space.nodes();
  std::vector<double> table(rows * atoms.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t u = 0; u < 20; ++u) {
      const auto i = static_cast<std::size_t>(rng::uniform_at(seed, rng::Stream::kAux, r, u) * 5.0);
      table[r * 5 + std::min<std::size_t>(i, 4)] += 0.05;
    }
  }
  return ControlField::relaxed(time, space, atoms, std::move(table));
}

TEST(Chattering, ApportionIsLargestRemainder) {
  const std::vector<double> half{0.5, 0.5}, third{1.0 / 3.0, 2.0 / 3.0};
  EXPECT_EQ(apportion(half, 10), (std::vector<std::size_t>{5, 5}));
  EXPECT_EQ(apportion(third, 8), (std::vector<std::size_t>{3, 5}));
  EXPECT_EQ(apportion(third, 16), (std::vector<std::size_t>{5, 11}));
  const std::vector<double> tie{0.25, 0.5, 0.25};
  EXPECT_EQ(apportion(tie, 2), (std::vector<std::size_t>{1, 1, 0}));
  const auto field = random_relaxed(kTime, kSpace, 3);
  for (std::size_t n : {1u, 3u, 7u, 64u}) {
    for (std::size_t j = 0; j < kTime.steps(); ++j) {
      const auto c = apportion(field.entry(j, 0), n);
      ASSERT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), n);
    }
  }
}

TEST(Chattering, PointMassIsReproduced) {
  const ActionGrid atoms = five_atoms();
  const std::vector<double> p{0.0, 0.0, 0.0, 1.0, 0.0};
  const auto relaxed = constant_relaxed(kTime, kSpace, atoms, p);
  const auto out = chattering_approximation(relaxed, 7);
  EXPECT_EQ(out.control.time_grid().steps(), 70u);
  for (double a : out.control.table()) ASSERT_EQ(a, 0.5);
  EXPECT_EQ(out.starved, 0u);
}

TEST(Chattering, HalfAndHalfSplitsEveryStep) {
  const std::vector<double> p{0.5, 0.5};
  const auto out = chattering_approximation(constant_relaxed(kTime, kSpace, corners(), p), 10);
  const auto& c = out.control;
  for (std::size_t j = 0; j < kTime.steps(); ++j) {
    for (std::size_t v = 0; v < kSpace.nodes(); ++v) {
      int minus = 0, plus = 0;
      for (std::size_t s = 0; s < 10; ++s) {
        const double a = c.entry(j * 10 + s, v)[0];
        (a < 0 ? minus : plus) += 1;
        // Round robin: the atoms alternate.
        ASSERT_EQ(a, s % 2 == 0 ? -1.0 : 1.0);
      }
      ASSERT_EQ(minus, 5);
      ASSERT_EQ(plus, 5);
    }
  }
}

TEST(Chattering, CoarseLevelWarnsInsteadOfFailing) {
  const std::vector<double> p{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  const ActionGrid atoms = ActionGrid::uniform(Box::cube(1, -1.0, 1.0), 3);
  const auto out = chattering_approximation(constant_relaxed(kTime, kSpace, atoms, p), 2);
  EXPECT_EQ(out.starved, kTime.steps() * kSpace.nodes());
  ASSERT_FALSE(out.warnings.empty());
  EXPECT_NE(out.warnings[0].find("raise N"), std::string::npos);
  EXPECT_EQ(chattering_approximation(constant_relaxed(kTime, kSpace, atoms, p), 3).starved, 0u);
  EXPECT_THROW(chattering_approximation(constant_relaxed(kTime, kSpace, atoms, p), 0),
               InvalidArgument);
}

TEST(Chattering, MeanDriftIsPreservedUpToRounding) {
  const auto relaxed = random_relaxed(kTime, kSpace, 5);
  for (std::size_t n : {3u, 8u, 13u}) {
    const auto c = chattering_approximation(relaxed, n).control;
    for (std::size_t j = 0; j < kTime.steps(); ++j) {
      for (std::size_t v = 0; v < kSpace.nodes(); ++v) {
        double target = 0.0, got = 0.0;
        const auto w = relaxed.entry(j, v);
        for (std::size_t i = 0; i < w.size(); ++i) target += w[i] * relaxed.atoms().atom(i)[0];
        for (std::size_t s = 0; s < n; ++s) got += c.entry(j * n + s, v)[0] / n;
        ASSERT_LE(std::abs(got - target), 5.0 / n * 2.0 + 1e-12);
      }
    }
  }
}

TEST(OccupationDistance, MatchesTranslationOracle) {
  // Constant -1 against constant +1: all mass moves by 2 along the action
  // axis, so each slice sees |u_a| * 2 * T.
  const auto minus = constant_relaxed(kTime, kSpace, corners(), std::vector<double>{1.0, 0.0});
  const auto plus = constant_relaxed(kTime, kSpace, corners(), std::vector<double>{0.0, 1.0});
  const auto dirs = slice_directions(2, kDefaultSlices);
  double oracle = 0.0;
  for (std::size_t s = 0; s < kDefaultSlices; ++s) oracle += std::abs(dirs[2 * s + 1]) * 2.0;
  oracle /= kDefaultSlices;
  EXPECT_NEAR(occupation_distance(minus, plus), oracle, 1e-9);
  EXPECT_NEAR(occupation_distance(minus, chattering_approximation(minus, 4).control), 0.0, 1e-12);
}

TEST(OccupationDistance, ChatteringErrorHalvesWithLevel) {
  const std::vector<double> p{1.0 / 3.0, 2.0 / 3.0};
  const auto relaxed = constant_relaxed(kTime, kSpace, corners(), p);
  std::vector<double> levels, errors;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    levels.push_back(static_cast<double>(n));
    errors.push_back(occupation_distance(relaxed, chattering_approximation(relaxed, n).control));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) EXPECT_LT(errors[i], errors[i - 1]);
  const double slope = loglog_slope(levels, errors);
  EXPECT_GE(slope, -1.3);
  EXPECT_LE(slope, -0.7);
}

TEST(OccupationDistance, PolynomialTestIntegralsConverge) {
  const auto relaxed = random_relaxed(kTime, kSpace, 9);
  for (auto [p, q] : {std::pair{1u, 1u}, {2u, 1u}, {0u, 2u}, {3u, 3u}}) {
    double previous = INFINITY;
    for (std::size_t n : {5u, 20u, 80u}) {
      const auto c = chattering_approximation(relaxed, n).control;
      const double err = std::abs(occupation_moment(c, 2, p, q) - occupation_moment(relaxed, 2, p, q));
      EXPECT_LE(err, 2.0 / n);
      EXPECT_LE(err, previous + 1e-12);
      previous = err;
    }
  }
}

struct SelectionSetup {
  TimeGrid time{1.0, 50};
  SpatialGrid space{{-4.0}, {4.0}, {81}};
  EmpiricalFlow flow;
};

SelectionSetup setup(const GameSpec& game) {
  SelectionSetup s;
  s.flow = drifted_flow(game, 0.3, 2000, s.time, 17);
  return s;
}

TEST(StrictSelection, PointMassIsSelected) {
  const GameSpec game = catalog::monotone_lq();
  const auto s = setup(game);
  const std::vector<double> p{0.0, 1.0, 0.0, 0.0, 0.0};
  const auto r = strict_selection(game, constant_relaxed(s.time, s.space, five_atoms(), p), s.flow);
  for (double a : r.control.table()) ASSERT_NEAR(a, -0.5, 1e-12);
  EXPECT_LE(r.report.max_drift_mismatch, 1e-12);
  EXPECT_EQ(r.report.violations, 0u);
}

TEST(StrictSelection, ConcaveRewardPicksMeanDrift) {
  const GameSpec game = catalog::monotone_lq();  // b = a, f = -a^2 / 2
  const auto s = setup(game);
  const std::vector<double> p{0.5, 0.5};
  const auto r = strict_selection(game, constant_relaxed(s.time, s.space, corners(), p), s.flow);
  // Grid search oracle over A: a with b = a = 0 maximizing f.
  double oracle = NAN, best = -INFINITY;
  for (int i = 0; i <= 2000; ++i) {
    const double a = -1.0 + i / 1000.0;
    if (std::abs(a) > 1e-9) continue;
    if (-a * a / 2 > best) best = -a * a / 2, oracle = a;
  }
  for (double a : r.control.table()) ASSERT_NEAR(a, oracle, 1e-12);
  EXPECT_GE(best, 0.5 * (-0.5) + 0.5 * (-0.5));
  EXPECT_EQ(r.report.violations, 0u);
  EXPECT_NEAR(r.report.worst_reward_gap, -0.5, 1e-12);
}

TEST(StrictSelection, ConvexRewardIsFlagged) {
  auto params = catalog::monotone_lq_params();
  params.faa = 1.0;  // f = a^2
  const GameSpec game = catalog::affine_poly(params, "convex");
  const auto s = setup(game);
  const std::vector<double> p{0.5, 0.5};
  const auto r = strict_selection(game, constant_relaxed(s.time, s.space, corners(), p), s.flow);
  EXPECT_EQ(r.report.violations, r.report.nodes);
  EXPECT_NEAR(r.report.worst_reward_gap, 1.0, 1e-12);
  EXPECT_LE(r.report.max_drift_mismatch, 1e-12);
}

TEST(StrictSelection, RequiresAffineDriftUnlessApproximate) {
  GameSpec game = catalog::monotone_lq();
  game.drift_affine_in_a = false;
  const auto s = setup(game);
  const auto relaxed = random_relaxed(s.time, s.space, 2);
  EXPECT_THROW(strict_selection(game, relaxed, s.flow), InvalidArgument);
  SelectionOptions o;
  o.allow_approximate = true;
  const auto r = strict_selection(game, relaxed, s.flow, o);
  EXPECT_TRUE(r.report.approximate);
  EXPECT_EQ(r.report.nodes, s.time.steps() * s.space.nodes());
}

TEST(StrictSelection, PayoffDominatesRelaxedOnConcaveCatalogGames) {
  SelectionOptions o;
  o.action_count = 401;  // contains every mean of 1/20-weighted atoms
  for (const GameSpec& game : {catalog::sign_drift(), catalog::monotone_lq(), catalog::target(),
                               catalog::crowd_aversion()}) {
    const auto s = setup(game);
    const auto relaxed = random_relaxed(s.time, s.space, 23);
    const auto r = strict_selection(game, relaxed, s.flow, o);
    EXPECT_EQ(r.report.violations, 0u) << game.name;
    EXPECT_LE(r.report.max_drift_mismatch, 1e-9) << game.name;
    const auto bundle = sample_brownian(29, 4000, s.time, 1);
    const auto jr = evaluate_payoff(game, s.flow, relaxed, bundle);
    const auto js = evaluate_payoff(game, s.flow, r.control, bundle);
    EXPECT_GE(js.value, jr.value - 1e-9) << game.name;
  }
}

TEST(StrictSelection, DeterministicAcrossThreadCounts) {
  const GameSpec game = catalog::crowd_aversion();
  const auto s = setup(game);
  const auto relaxed = random_relaxed(s.time, s.space, 4);
  const int saved = max_threads();
  set_threads(1);
  const auto a = strict_selection(game, relaxed, s.flow);
  set_threads(4);
  const auto b = strict_selection(game, relaxed, s.flow);
  set_threads(saved);
  EXPECT_EQ(a.control.table(), b.control.table());
}

}  // namespace
}  // namespace mfg
