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
#include <sstream>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/markov_projection.hpp"

namespace mfg {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Fair +-1 coin per particle, independent of the Brownian stream.
double coin(std::uint64_t seed, std::size_t k) {
  return rng::uniform_at(seed, rng::Stream::kAux, k, 0) < 0.5 ? -1.0 : 1.0;
}

// X_t = gamma * max(t - delay, 0) + W_t from X_0 = 0.
AdaptedRun coin_run(std::size_t n, std::size_t steps, std::uint64_t seed, double delay = 0.0) {
  const auto bundle = sample_brownian(seed, n, TimeGrid(1.0, steps), 1);
  const std::vector<double> init(n, 0.0);
  return simulate_adapted(bundle, init,
                          [&](std::size_t k, std::size_t, double t, std::span<const double>,
                              std::span<double> out) { out[0] = t >= delay ? coin(seed, k) : 0.0; });
}

ProjectionBins line_bins(double lo, double hi, std::size_t count, std::size_t min_count = 30) {
  return ProjectionBins{{lo}, {hi}, {count}, min_count};
}

// E[gamma | X_t = x] by Bayes' rule with the two Gaussian likelihoods.
double coin_posterior_mean(double t, double x) {
  auto density = [t](double y) {
    return std::exp(-y * y / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
  };
  const double up = density(x - t), down = density(x + t);
  return (up - down) / (up + down);
}

TEST(MarkovProjection, ConstantDriftIsRecoveredExactly) {
  const std::size_t n = 2000;
  const auto bundle = sample_brownian(3, n, TimeGrid(1.0, 20), 1);
  const std::vector<double> init(n, 0.0);
  const auto run = simulate_adapted(bundle, init,
                                    [](std::size_t, std::size_t, double, std::span<const double>,
                                       std::span<double> out) { out[0] = 0.7; });
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-6, 6, 40));
  for (std::size_t j = 0; j < table.grid().steps(); ++j) {
    EXPECT_NEAR(table.slice_mean(j)[0], 0.7, 1e-12);
    for (std::size_t c = 0; c < table.cells(); ++c) {
      ASSERT_NEAR(table.value(j, c)[0], 0.7, 1e-12);
    }
  }
}

TEST(MarkovProjection, CoinDriftMatchesBayesOracle) {
  EXPECT_NEAR(coin_posterior_mean(0.5, 0.3), std::tanh(0.3), 1e-12);
  const auto run = coin_run(20000, 50, 11);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 80));
  const std::size_t j = table.grid().step_of(0.5);
  std::size_t checked = 0;
  for (std::size_t c = 0; c < table.cells(); ++c) {
    if (table.count(j, c) < 100) continue;
    ++checked;
    const double x = table.centre(c, 0);
    EXPECT_NEAR(table.value(j, c)[0], coin_posterior_mean(0.5, x), 0.15) << "x = " << x;
  }
  EXPECT_GT(checked, 20u);
}

TEST(MarkovProjection, SparseBinsFallBackToSliceMean) {
  const auto run = coin_run(500, 10, 4);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 80, 30));
  std::size_t flagged = 0;
  for (std::size_t j = 0; j < table.grid().steps(); ++j) {
    for (std::size_t c = 0; c < table.cells(); ++c) {
      if (table.count(j, c) < 30) {
        ASSERT_TRUE(table.fallback(j, c));
        ASSERT_EQ(table.value(j, c)[0], table.slice_mean(j)[0]);
        ++flagged;
      } else {
        ASSERT_FALSE(table.fallback(j, c));
      }
    }
  }
  EXPECT_GT(flagged, 0u);
}

TEST(MarkovProjection, UncoveredDataIsRejected) {
  const auto run = coin_run(500, 10, 4);
  EXPECT_THROW(project_drift(run.ensemble, run.drift, line_bins(-0.5, 0.5, 10)),
               InvalidArgument);
  EXPECT_THROW(project_drift(run.ensemble, run.drift, ProjectionBins{{1.0}, {0.0}, {4}, 30}),
               InvalidArgument);
}

TEST(MarkovProjection, TowerPropertyHoldsSliceBySlice) {
  const auto run = coin_run(3000, 20, 8);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 64, 1));
  const std::size_t n = run.ensemble.particles();
  for (std::size_t j = 0; j < table.grid().steps(); ++j) {
    double projected = 0.0, direct = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      projected += table.at(j, run.ensemble.state(k, j))[0];
      direct += run.drift.at(j, k)[0];
    }
    EXPECT_NEAR(projected / n, direct / n, 1e-12);
  }
}

TEST(MarkovProjection, BoundedDriftGivesBoundedProjection) {
  const auto run = coin_run(3000, 20, 9);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 64));
  for (std::size_t j = 0; j < table.grid().steps(); ++j) {
    for (std::size_t c = 0; c < table.cells(); ++c) {
      ASSERT_LE(std::abs(table.value(j, c)[0]), 1.0 + 1e-12);
    }
  }
}

TEST(MarkovProjection, MimickingDiffusionMatchesMarginals) {
  const std::size_t n = 20000;
  const auto run = coin_run(n, 50, 21);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 80));
  const auto fresh = sample_brownian(rng::derive_seed(21, 1), n, TimeGrid(1.0, 50), 1);
  const std::vector<double> init(n, 0.0);
  const auto flow = run.ensemble.flow();
  const auto mimic = mimic_and_compare(table, init, fresh, flow);
  ASSERT_EQ(mimic.distances.size(), 51u);
  EXPECT_EQ(mimic.distances[0], 0.0);
  EXPECT_LE(*std::max_element(mimic.distances.begin(), mimic.distances.end()), 0.05);
}

// The coin path law is itself Markov (posterior of the coin depends on X_t
// only), so the mimicking process has the same two-time covariances.
TEST(MarkovProjection, CoinHasNoAutocovarianceGap) {
  const std::size_t n = 20000;
  const auto run = coin_run(n, 50, 31);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 80));
  const auto fresh = sample_brownian(rng::derive_seed(31, 1), n, TimeGrid(1.0, 50), 1);
  const auto flow = run.ensemble.flow();
  const auto mimic = mimic_and_compare(table, std::vector<double>(n, 0.0), fresh, flow);
  const auto gap = autocovariance_gap(flow, mimic.flow, 25, 50);
  EXPECT_NEAR(gap.original.value, 0.5 + 0.5, 0.06);
  EXPECT_LT(gap.gap, 4.0 * gap.std_error);
}

// A coin revealed only after t = 1/2: the posterior depends on the path since
// then, so marginals match but the mimic forgets the past.
TEST(MarkovProjection, DelayedCoinShowsAutocovarianceGap) {
  const std::size_t n = 20000;
  const auto run = coin_run(n, 50, 41, 0.5);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 80));
  const auto fresh = sample_brownian(rng::derive_seed(41, 1), n, TimeGrid(1.0, 50), 1);
  const auto flow = run.ensemble.flow();
  const auto mimic = mimic_and_compare(table, std::vector<double>(n, 0.0), fresh, flow);
  EXPECT_LE(*std::max_element(mimic.distances.begin(), mimic.distances.end()), 0.05);
  const auto gap = autocovariance_gap(flow, mimic.flow, 25, 50);
  EXPECT_NEAR(gap.original.value, 0.5, 0.05);
  EXPECT_GT(gap.gap, 3.0 * gap.std_error);
}

TEST(MarkovProjection, DeterministicAcrossThreadCounts) {
  const int saved = max_threads();
  set_threads(1);
  const auto a = coin_run(2000, 20, 5);
  const auto ta = project_drift(a.ensemble, a.drift, line_bins(-8, 8, 32));
  set_threads(4);
  const auto b = coin_run(2000, 20, 5);
  const auto tb = project_drift(b.ensemble, b.drift, line_bins(-8, 8, 32));
  set_threads(saved);
  std::ostringstream sa, sb;
  write_drift_table_csv(sa, ta);
  write_drift_table_csv(sb, tb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(MarkovProjection, CsvLayout) {
  const auto run = coin_run(200, 4, 6);
  const auto table = project_drift(run.ensemble, run.drift, line_bins(-8, 8, 8));
  std::ostringstream os;
  write_drift_table_csv(os, table);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "time_index,time,bin_centre0,value0,count,fallback\r");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 4 * 8);
}

}  // namespace
}  // namespace mfg
