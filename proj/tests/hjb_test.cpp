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
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/catalog.hpp"
#include "mfg/errors.hpp"
#include "mfg/hjb.hpp"
#include "mfg/simulate.hpp"

namespace mfg {
namespace {

// Flow of dX = c dt + dW from delta_0: its mean path is c t.
EmpiricalFlow drift_flow(double c, std::size_t n, const TimeGrid& grid, std::uint64_t seed) {
  auto p = catalog::mean_drift_params(catalog::MeanDrift::kNone, 0.0, 0.0, grid.horizon());
  p.b0 = c;
  const GameSpec game = catalog::affine_poly(p, "drift");
  const auto bundle = sample_brownian(seed, n, grid, 1);
  return simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), n), bundle,
                          initial_samples(game, bundle))
      .flow();
}

EmpiricalFlow zero_flow(const TimeGrid& grid) {
  return EmpiricalFlow(grid, 1, 1, std::vector<double>(grid.points(), 0.0));
}

ActionGrid actions_of(const GameSpec& game, std::size_t count) {
  return ActionGrid::uniform(game.actions, count);
}

TEST(Hjb, SignDriftPlusFlowGivesPlusOne) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid grid(1.0, 400);
  const auto flow = drift_flow(1.0, 20000, grid, 3);
  const auto space = default_spatial_grid(game, grid, 0.1);
  const auto sol = solve_hjb(game, flow, space, actions_of(game, 11));
  const double mT = flow.stats(grid.steps()).mean[0];
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    for (std::size_t node = 0; node < space.nodes(); ++node) {
      const double x = space.coordinate(node, 0);
      if (std::abs(x) > space.hi()[0] - 3 * space.spacing()[0]) continue;
      ASSERT_EQ(sol.control.entry(j, node)[0], 1.0) << "j=" << j << " x=" << x;
    }
  }
  // V(0, x) = (x + T) mean_T; at x = 0 this is T^2 up to the flow's noise.
  const std::vector<double> origin{0.0};
  EXPECT_NEAR(sol.value.value(0, origin), mT, 0.02);
  EXPECT_NEAR(sol.value.value(0, origin), 1.0, 0.05);
}

TEST(Hjb, ZeroObjectiveTiesToLowestIndex) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid grid(1.0, 100);
  const auto flow = zero_flow(grid);
  const auto space = default_spatial_grid(game, grid, 0.2);
  const auto sol = solve_hjb(game, flow, space, actions_of(game, 5));
  for (double v : sol.value.data()) ASSERT_EQ(v, 0.0);
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    for (std::size_t node = 0; node < space.nodes(); ++node) {
      ASSERT_EQ(sol.control.entry(j, node)[0], -1.0);
    }
  }
  const auto minimal = solve_hjb(game, flow, space, actions_of(game, 5),
                                 {0.0, TieBreak::kMinimalNorm});
  for (double a : minimal.control.table()) ASSERT_EQ(a, 0.0);
}

// Exhaustive dynamic programming for f = 0, g = -(x - 1)^2, b = a on a coarse
// lattice: 5 actions, 20 states, 20 steps, +-sqrt(dt) coin-flip noise with
// linear interpolation between states.
struct LatticeOracle {
  static constexpr int kStates = 20;
  static constexpr int kSteps = 20;
  static constexpr std::array<double, 5> kActions{-1.0, -0.5, 0.0, 0.5, 1.0};
  double lo = -3.0, hi = 3.0;
  double h = (hi - lo) / (kStates - 1);
  double dt = 1.0 / kSteps;
  std::vector<std::vector<double>> value;
  std::vector<std::vector<double>> policy;

  double x(int i) const { return lo + i * h; }

  double interpolate(const std::vector<double>& v, double y) const {
    const double pos = std::clamp((y - lo) / h, 0.0, double(kStates - 1));
    const int i = std::min(int(pos), kStates - 2);
    const double w = pos - i;
    return (1 - w) * v[i] + w * v[i + 1];
  }

  LatticeOracle() {
    value.assign(kSteps + 1, std::vector<double>(kStates));
    policy.assign(kSteps, std::vector<double>(kStates));
    for (int i = 0; i < kStates; ++i) value[kSteps][i] = -(x(i) - 1) * (x(i) - 1);
    for (int j = kSteps - 1; j >= 0; --j) {
      for (int i = 0; i < kStates; ++i) {
        double best = -1e300, arg = 0;
        for (double a : kActions) {
          const double mid = x(i) + a * dt;
          const double v = 0.5 * interpolate(value[j + 1], mid + std::sqrt(dt)) +
                           0.5 * interpolate(value[j + 1], mid - std::sqrt(dt));
          if (v > best + 1e-12) {
            best = v;
            arg = a;
          }
        }
        value[j][i] = best;
        policy[j][i] = arg;
      }
    }
  }
};

TEST(Hjb, TargetGameMatchesLatticeOracle) {
  const LatticeOracle oracle;
  const GameSpec game = catalog::target(1.0);
  const TimeGrid grid(1.0, 1000);
  const auto space = default_spatial_grid(game, grid, 0.05);
  const auto sol = solve_hjb(game, zero_flow(grid), space, actions_of(game, 5));
  const MeasureStats m = MeasureStats::point_mass(std::vector<double>{0.0});
  int compared = 0;
  for (int jo = LatticeOracle::kSteps - 4; jo < LatticeOracle::kSteps; ++jo) {
    const double t = jo * oracle.dt;
    const std::size_t j = grid.step_of(t);
    for (int i = 1; i < LatticeOracle::kStates - 1; ++i) {
      const double xi = oracle.x(i);
      if (xi >= 0.8) continue;
      ASSERT_EQ(oracle.policy[jo][i], 1.0) << "oracle at t=" << t << " x=" << xi;
      std::array<double, 1> a{};
      const std::array<double, 1> x{xi};
      sol.control.act(j, t, x, m, a);
      EXPECT_EQ(a[0], 1.0) << "t=" << t << " x=" << xi;
      ++compared;
    }
  }
  EXPECT_GT(compared, 20);
}

TEST(Hjb, ValueIsMonotoneInTerminalReward) {
  GameSpec low = catalog::target(0.5);
  GameSpec high = low;
  high.terminal = [g = low.terminal](std::span<const double> x, const MeasureStats& m) {
    return g(x, m) + std::exp(-x[0] * x[0]);
  };
  high.bounds.terminal += 1.0;
  const TimeGrid grid(1.0, 500);
  const auto space = default_spatial_grid(low, grid, 0.1);
  const auto a = solve_hjb(low, zero_flow(grid), space, actions_of(low, 9));
  const auto b = solve_hjb(high, zero_flow(grid), space, actions_of(high, 9));
  for (std::size_t i = 0; i < a.value.data().size(); ++i) {
    ASSERT_GE(b.value.data()[i], a.value.data()[i] - 1e-12);
  }
}

TEST(Hjb, ValueBound) {
  for (const GameSpec& game : {catalog::target(1.0), catalog::monotone_lq(), catalog::sign_drift()}) {
    const TimeGrid grid(1.0, 500);
    const auto flow = drift_flow(0.5, 2000, grid, 9);
    const auto sol = solve_hjb(game, flow, default_spatial_grid(game, grid, 0.1), actions_of(game, 9));
    const double bound = game.horizon * game.bounds.running + game.bounds.terminal;
    for (double v : sol.value.data()) ASSERT_LE(std::abs(v), bound) << game.name;
  }
}

TEST(Hjb, CflViolationReportsRequiredDt) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid grid(1.0, 10);
  const SpatialGrid space({-5.0}, {5.0}, {201});
  try {
    solve_hjb(game, zero_flow(grid), space, actions_of(game, 3));
    FAIL() << "expected CflViolation";
  } catch (const CflViolation& e) {
    const double required = cfl_limit(space, game.bounds.drift);
    EXPECT_DOUBLE_EQ(e.required_dt(), required);
    EXPECT_NE(std::string(e.what()).find("required"), std::string::npos) << e.what();
  }
}

TEST(Hjb, GridRefinementAndWiderBox) {
  const GameSpec game = catalog::target(1.0);
  const TimeGrid grid(1.0, 2000);
  const std::vector<double> origin{0.0};
  const auto coarse = solve_hjb(game, zero_flow(grid), default_spatial_grid(game, grid, 0.1),
                                actions_of(game, 9));
  const auto fine = solve_hjb(game, zero_flow(grid), default_spatial_grid(game, grid, 0.05),
                              actions_of(game, 9));
  const auto finer = solve_hjb(game, zero_flow(grid), default_spatial_grid(game, grid, 0.025),
                               actions_of(game, 9));
  // Upwinding is first order in h: 0.05 is the declared tolerance at h = 0.1,
  // and the next doubling must move the value by less.
  const double d1 = std::abs(coarse.value.value(0, origin) - fine.value.value(0, origin));
  const double d2 = std::abs(fine.value.value(0, origin) - finer.value.value(0, origin));
  EXPECT_LT(d1, 0.05);
  EXPECT_LT(d2, 0.75 * d1);

  Box wide = default_state_box(game);
  wide.lo[0] -= 3.0;
  wide.hi[0] += 3.0;
  const auto widened = solve_hjb(game, zero_flow(grid), SpatialGrid::with_spacing(wide, 0.1),
                                 actions_of(game, 9));
  EXPECT_NEAR(coarse.value.value(0, origin), widened.value.value(0, origin), 1e-3);
}

TEST(Payoff, TrivialRewards) {
  const TimeGrid grid(1.0, 50);
  const auto bundle = sample_brownian(1, 500, grid, 1);
  GameSpec game = catalog::sign_drift();
  game.running = [](double, std::span<const double>, const MeasureStats&, std::span<const double>) {
    return 0.0;
  };
  game.terminal = [](std::span<const double>, const MeasureStats&) { return 1.0; };
  const auto one = evaluate_payoff(game, zero_flow(grid), ControlField::constant({0.3}), bundle);
  EXPECT_EQ(one.value, 1.0);
  EXPECT_EQ(one.std_error, 0.0);

  game.running = [](double, std::span<const double>, const MeasureStats&, std::span<const double>) {
    return 1.0;
  };
  game.terminal = [](std::span<const double>, const MeasureStats&) { return 0.0; };
  const auto time = evaluate_payoff(game, zero_flow(grid), ControlField::constant({0.3}), bundle);
  EXPECT_NEAR(time.value, 1.0, 1e-12);
}

TEST(Payoff, SignDriftPlusOneGivesTSquared) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid grid(1.0, 200);
  const auto flow = drift_flow(1.0, 50000, grid, 5);
  const auto bundle = sample_brownian(6, 50000, grid, 1);
  const auto est = evaluate_payoff(game, flow, ControlField::constant({1.0}), bundle);
  EXPECT_NEAR(est.value, 1.0, 3.0 * est.std_error + 0.02);
}

// The grid best response beats every catalog feedback up to grid + MC error.
TEST(Payoff, BestResponseDominatesCatalogFeedbacks) {
  const TimeGrid grid(1.0, 500);
  for (const GameSpec& game : {catalog::target(1.0), catalog::monotone_lq(), catalog::crowd_aversion()}) {
    const auto flow = drift_flow(-0.5, 4000, grid, 12);
    const auto space = default_spatial_grid(game, grid, 0.1);
    const auto best = solve_hjb(game, flow, space, actions_of(game, 21));
    const auto bundle = sample_brownian(13, 20000, grid, 1);
    const auto ref = evaluate_payoff(game, flow, best.control, bundle);
    const std::vector<ControlField> rivals{
        ControlField::constant({-1.0}), ControlField::constant({0.0}), ControlField::constant({1.0}),
        catalog::linear_feedback(-1.0, 1.0, -1.0, 1.0), catalog::linear_feedback(1.0, 0.0, -1.0, 1.0),
        ControlField::sign_of_mean(0.0)};
    for (const auto& c : rivals) {
      const auto other = evaluate_payoff(game, flow, c, bundle);
      EXPECT_GE(ref.value, other.value - 0.02) << game.name << " vs " << c.name();
    }
  }
}

TEST(Hjb, CsvHeaders) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid grid(1.0, 2);
  const SpatialGrid space({-3.0}, {3.0}, {3});
  const auto sol = solve_hjb(game, zero_flow(grid), space, actions_of(game, 2));
  std::ostringstream v, c;
  write_value_csv(v, sol.value);
  write_control_csv(c, sol.control);
  EXPECT_EQ(v.str().substr(0, v.str().find("\r\n")), "time_index,time,x0,value");
  EXPECT_EQ(c.str().substr(0, c.str().find("\r\n")), "time_index,time,x0,a0");
  const std::string text = v.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 3);
}

}  // namespace
}  // namespace mfg
