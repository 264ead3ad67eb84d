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

#include <cmath>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/catalog.hpp"
#include "mfg/control.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/metrics.hpp"
#include "mfg/parallel.hpp"
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {
namespace {

TEST(TimeGrid, ExactProduct) {
  for (int m : {1, 3, 7, 10, 100, 1000, 333}) {
    const TimeGrid g(1.0, m);
    EXPECT_EQ(g.dt() * m, 1.0) << m;
    EXPECT_EQ(g.time(g.steps()), 1.0);
    for (std::size_t j = 1; j <= g.steps(); ++j) EXPECT_LT(g.time(j - 1), g.time(j));
  }
  EXPECT_THROW(TimeGrid(1.0, 0), InvalidArgument);
  EXPECT_THROW(TimeGrid(0.0, 10), InvalidArgument);
}

TEST(Brownian, RegenerationIsBitIdentical) {
  const TimeGrid g(1.0, 3);
  const auto a = sample_brownian(7, 2, g, 1);
  const auto b = sample_brownian(7, 2, g, 1);
  EXPECT_EQ(a.data(), b.data());
  const auto c = sample_brownian(8, 2, g, 1);
  EXPECT_NE(a.data(), c.data());
}

TEST(Brownian, IncrementDependsOnlyOnParticleAndStep) {
  const TimeGrid g(1.0, 20);
  const auto small = sample_brownian(3, 5, g, 2);
  const auto big = sample_brownian(3, 50, g, 2);
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t j = 0; j < 20; ++j) {
      for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_EQ(small.increment(k, j)[c], big.increment(k, j)[c]);
      }
    }
  }
}

TEST(Brownian, VarianceMatchesDt) {
  const TimeGrid g(10.0, 1000);
  const auto bundle = sample_brownian(11, 1000, g, 1);
  RunningMoments acc;
  for (double v : bundle.data()) acc.add(v);
  EXPECT_NEAR(acc.mean(), 0.0, 4.0 * acc.std_error());
  EXPECT_NEAR(acc.variance(), 0.01, 0.0001);
}

TEST(Brownian, ColumnsUncorrelated) {
  const TimeGrid g(1.0, 100);
  const auto bundle = sample_brownian(5, 1000, g, 2);
  RunningMoments prod;
  for (std::size_t k = 0; k < 1000; ++k) {
    for (std::size_t j = 0; j < 100; ++j) {
      const auto w = bundle.increment(k, j);
      prod.add(w[0] * w[1] / g.dt());
    }
  }
  EXPECT_NEAR(prod.mean(), 0.0, 3.0 * prod.std_error());
}

TEST(Game, CatalogGamesValidate) {
  EXPECT_NO_THROW(catalog::sign_drift().validate());
  EXPECT_NO_THROW(catalog::monotone_lq().validate());
  EXPECT_NO_THROW(catalog::target().validate());
  EXPECT_NO_THROW(catalog::crowd_aversion().validate());
  EXPECT_NO_THROW(catalog::mean_drift(catalog::MeanDrift::kLinear, -1.0, 1.0).validate());
}

TEST(Simulate, DriftlessConservationIsExact) {
  auto p = catalog::mean_drift_params(catalog::MeanDrift::kNone, 0.0, 0.0);
  p.initial = InitialLaw::gaussian({0.5}, {1.0});
  const GameSpec game = catalog::affine_poly(p, "driftless");
  const TimeGrid g(1.0, 50);
  const auto bundle = sample_brownian(21, 400, g, 1);
  const auto init = initial_samples(game, bundle);
  const auto ens = simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), 400),
                                    bundle, init);
  std::vector<double> acc(init);
  for (std::size_t j = 0; j <= g.steps(); ++j) {
    for (std::size_t k = 0; k < 400; ++k) EXPECT_EQ(ens.state(k, j)[0], acc[k]);
    if (j < g.steps()) {
      for (std::size_t k = 0; k < 400; ++k) acc[k] += bundle.increment(k, j)[0];
    }
  }
  // Terminal mean against lambda's mean, 3 sd / sqrt(n) with sd^2 = 1 + T.
  const auto flow = std::move(ens).flow();
  EXPECT_NEAR(mean_path(flow).back(), 0.5, 3.0 * std::sqrt(2.0 / 400.0));
}

TEST(Simulate, ConstantDriftShiftsMean) {
  auto p = catalog::mean_drift_params(catalog::MeanDrift::kNone, 0.0, 0.0);
  p.b0 = 0.7;
  const GameSpec game = catalog::affine_poly(p, "constant_drift");
  const TimeGrid g(1.0, 100);
  const auto bundle = sample_brownian(4, 4000, g, 1);
  const auto flow =
      simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), 4000), bundle,
                       initial_samples(game, bundle))
          .flow();
  const auto mp = mean_path(flow);
  for (std::size_t j = 0; j <= g.steps(); j += 10) {
    EXPECT_NEAR(mp[j], 0.7 * g.time(j), 4.0 * std::sqrt(g.time(j) / 4000.0) + 1e-12);
  }
}

TEST(Simulate, ThreadCountDoesNotChangeBits) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid g(1.0, 200);
  const auto bundle = sample_brownian(99, 777, g, 1);
  const auto init = initial_samples(game, bundle);
  const auto profile = ControlProfile::uniform(ControlField::sign_of_mean(0.0), 777);
  set_threads(1);
  const auto one = simulate_nplayer_with_payoffs(game, profile, bundle, init);
  set_threads(4);
  const auto four = simulate_nplayer_with_payoffs(game, profile, bundle, init);
  set_threads(0);
  EXPECT_EQ(one.ensemble.data(), four.ensemble.data());
  EXPECT_EQ(one.payoffs, four.payoffs);
}

TEST(Simulate, NonFiniteCoefficientReportsPoint) {
  GameSpec game = catalog::sign_drift();
  game.drift = [](double t, std::span<const double> x, const MeasureStats&,
                  std::span<const double>, std::span<double> out) {
    out[0] = (t > 0.5 && x[0] > -100.0) ? std::nan("") : 0.0;
  };
  const TimeGrid g(1.0, 10);
  const auto bundle = sample_brownian(1, 3, g, 1);
  try {
    simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), 3), bundle,
                     initial_samples(game, bundle));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("t = 0.6"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("x = ("), std::string::npos);
  }
}

// Halving dt on the same Brownian paths moves E|mean_T| by O(dt): the
// successive differences shrink with log-log slope close to 1.
TEST(Simulate, StepRefinementIsFirstOrder) {
  const GameSpec game = catalog::affine_poly(
      [] {
        auto p = catalog::mean_drift_params(catalog::MeanDrift::kLinear, -1.0, 1.0);
        p.bx = -0.5;
        return p;
      }(),
      "smooth");
  const std::size_t n = 2000;
  const auto fine = sample_brownian(5, n, TimeGrid(1.0, 64), 1);
  std::vector<double> value;
  for (std::size_t factor : {8, 4, 2, 1}) {
    const auto bundle = fine.coarsened(factor);
    const auto flow =
        simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), n), bundle,
                         initial_samples(game, bundle))
            .flow();
    RunningMoments abs_mean;
    for (double v : flow.at(flow.grid().steps())) abs_mean.add(std::abs(v));
    value.push_back(abs_mean.mean());
  }
  const std::vector<double> dts{1.0 / 8, 1.0 / 16, 1.0 / 32};
  const std::vector<double> diffs{std::abs(value[0] - value[1]), std::abs(value[1] - value[2]),
                                  std::abs(value[2] - value[3])};
  EXPECT_NEAR(loglog_slope(dts, diffs), 1.0, 0.3);
}

// Sign-drift game, sgn-of-mean feedback: E|mean_T|^2 is close to T^2.
TEST(Simulate, SignDriftSecondMoment) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid g(1.0, 1000);
  RunningMoments sq;
  for (std::uint64_t rep = 0; rep < 40; ++rep) {
    const auto bundle = sample_brownian(rng::derive_seed(123, rep), 1024, g, 1);
    const auto flow =
        simulate_nplayer(game, ControlProfile::uniform(ControlField::sign_of_mean(0.0), 1024),
                         bundle, initial_samples(game, bundle))
            .flow();
    const double m = mean_path(flow).back();
    sq.add(m * m);
  }
  EXPECT_NEAR(sq.mean(), 1.0, 0.1);
}

TEST(FrozenFlow, PlusOneControlGivesShiftedGaussian) {
  const GameSpec game = catalog::sign_drift();
  const TimeGrid g(1.0, 100);
  const std::size_t n = 100000;
  const auto bundle = sample_brownian(17, n, g, 1);
  auto p = catalog::mean_drift_params(catalog::MeanDrift::kNone, 0.0, 0.0);
  p.b0 = 1.0;
  const GameSpec shifted = catalog::affine_poly(p, "shift");
  const auto m1 = simulate_nplayer(shifted, ControlProfile::uniform(ControlField::constant({0.0}), n),
                                   bundle, initial_samples(shifted, bundle))
                      .flow();
  const auto bundle2 = sample_brownian(18, n, g, 1);
  const auto ens = simulate_frozen_flow(game, ControlField::constant({1.0}), m1, bundle2,
                                        initial_samples(game, bundle2));
  std::vector<double> exact(n);
  for (std::size_t k = 0; k < n; ++k) exact[k] = 1.0 + rng::normal_at(19, rng::Stream::kAux, k, 0);
  const auto terminal = ens.at(g.steps());
  EXPECT_LE(wasserstein1_1d(terminal, exact), 0.05);
  EXPECT_NEAR(mean_path(ens.flow()).back(), 1.0, 4.0 / std::sqrt(double(n)));
}

TEST(FrozenFlow, GridMismatchRejected) {
  const GameSpec game = catalog::sign_drift();
  const auto b1 = sample_brownian(1, 10, TimeGrid(1.0, 10), 1);
  const auto b2 = sample_brownian(1, 10, TimeGrid(1.0, 20), 1);
  const EmpiricalFlow flow(b1.grid(), 10, 1, std::vector<double>(11 * 10, 0.0));
  EXPECT_NO_THROW(
      simulate_frozen_flow(game, ControlField::constant({0.0}), flow, b1, initial_samples(game, b1)));
  EXPECT_THROW(simulate_frozen_flow(game, ControlField::constant({0.0}), flow, b2,
                                    initial_samples(game, b2)),
               InvalidArgument);
}

}  // namespace
}  // namespace mfg
