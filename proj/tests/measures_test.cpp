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
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/catalog.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/metrics.hpp"
#include "mfg/rng.hpp"
#include "mfg/simulate.hpp"

namespace mfg {
namespace {

std::vector<double> gaussian_cloud(std::uint64_t seed, std::size_t n, double mean, double sd) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = mean + sd * rng::normal_at(seed, rng::Stream::kAux, k, 0);
  }
  return out;
}

// W1 of two empirical laws as the integral of |F_a - F_b| over the merged
// support points.
double cdf_oracle(std::vector<double> a, std::vector<double> b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double x = pts[i];
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) /
                      static_cast<double>(a.size());
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) /
                      static_cast<double>(b.size());
    total += std::abs(fa - fb) * (pts[i + 1] - x);
  }
  return total;
}

TEST(Wasserstein1, PointMasses) {
  const std::vector<double> z(50, 0.0), three(50, 3.0);
  EXPECT_EQ(wasserstein1_1d(z, z), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1_1d(z, three), 3.0);
}

TEST(Wasserstein1, IdenticalMultisetsUpToOrder) {
  std::vector<double> a = gaussian_cloud(1, 300, 0.0, 1.0);
  std::vector<double> b(a.rbegin(), a.rend());
  EXPECT_EQ(wasserstein1_1d(a, b), 0.0);
  b[7] += 1e-3;
  EXPECT_GT(wasserstein1_1d(a, b), 0.0);
}

TEST(Wasserstein1, UnequalSizesMatchCdfOracle) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> size(1, 40);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> a(size(gen)), b(size(gen));
    for (double& v : a) v = z(gen);
    for (double& v : b) v = 0.3 + z(gen);
    EXPECT_NEAR(wasserstein1_1d(a, b), cdf_oracle(a, b), 1e-12);
  }
}

TEST(Wasserstein1, EmptyRejected) {
  const std::vector<double> a{1.0}, none;
  EXPECT_THROW(wasserstein1_1d(a, none), InvalidArgument);
  EXPECT_THROW(wasserstein_trunc(none, a), InvalidArgument);
  EXPECT_THROW(tv_binned(a, none), InvalidArgument);
}

// Repeated sampling: two independent 10^4 Gaussian clouds stay within 0.05.
TEST(Wasserstein1, IndependentGaussianClouds) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    worst = std::max(worst, wasserstein1_1d(gaussian_cloud(2 * s + 10, 10000, 0, 1),
                                            gaussian_cloud(2 * s + 11, 10000, 0, 1)));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Truncated, PointMasses) {
  const std::vector<double> z(10, 0.0), three(10, 3.0), quarter(10, 0.25);
  EXPECT_EQ(wasserstein_trunc(z, z), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein_trunc(z, three), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein_trunc(z, quarter), 0.25);
}

TEST(TotalVariation, Trivial) {
  const auto a = gaussian_cloud(4, 1000, 0, 1);
  EXPECT_EQ(tv_binned(a, a), 0.0);
  const auto far = gaussian_cloud(5, 1000, 100, 1);
  EXPECT_DOUBLE_EQ(tv_binned(a, far), 1.0);
}

TEST(TotalVariation, ShiftedGaussianAgainstQuadrature) {
  // (1/2) int |phi(x) - phi(x - 0.5)| dx by composite Simpson on [-12, 12].
  const auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  const int steps = 24000;
  const double lo = -12.0, h = 24.0 / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * std::abs(phi(x) - phi(x - 0.5));
  }
  const double oracle = 0.5 * integral * h / 3.0;
  EXPECT_NEAR(oracle, 0.197, 0.001);

  auto a = gaussian_cloud(6, 100000, 0.0, 1.0);
  auto b = gaussian_cloud(7, 100000, 0.5, 1.0);
  const auto clip = [](std::vector<double>& v) {
    for (double& x : v) x = std::clamp(x, -6.0, 6.0);
  };
  clip(a);
  clip(b);
  EXPECT_NEAR(tv_binned(a, b, {100, -6.0, 6.0}), oracle, 0.03);
}

TEST(TotalVariation, BinSpecValidation) {
  const std::vector<double> a{0.0, 1.0}, b{0.5};
  EXPECT_THROW(tv_binned(a, b, {10, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(tv_binned(a, b, {10, 0.2, 2.0}), InvalidArgument);
  EXPECT_NO_THROW(tv_binned(a, b, {10, 0.0, 1.0}));
}

TEST(TotalVariation, JointPermutationInvariance) {
  auto a = gaussian_cloud(8, 500, 0, 1);
  auto b = gaussian_cloud(9, 500, 0.2, 1);
  const double before = tv_binned(a, b, {37});
  std::mt19937_64 gen(1);
  std::shuffle(a.begin(), a.end(), gen);
  std::shuffle(b.begin(), b.end(), gen);
  EXPECT_EQ(tv_binned(a, b, {37}), before);
}

// Metric axioms on 10^4 random triples of small clouds with mixed sizes.
TEST(MetricAxioms, RandomTriples) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(1, 12);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> shift(-2, 2);
  const auto cloud = [&] {
    std::vector<double> v(size(gen));
    const double s = shift(gen);
    for (double& x : v) x = s + z(gen);
    return v;
  };
  int failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto a = cloud(), b = cloud(), c = cloud();
    const double ab = wasserstein1_1d(a, b), ba = wasserstein1_1d(b, a);
    const double bc = wasserstein1_1d(b, c), ac = wasserstein1_1d(a, c);
    const double tab = wasserstein_trunc(a, b), tba = wasserstein_trunc(b, a);
    const double vab = tv_binned(a, b), vba = tv_binned(b, a);
    bool ok = ab == ba && tab == tba && vab == vba;
    ok = ok && ac <= ab + bc + 1e-12;
    ok = ok && ab >= 0.0 && tab >= 0.0 && tab <= 1.0 && tab <= ab + 1e-12;
    ok = ok && vab >= 0.0 && vab <= 1.0;
    ok = ok && wasserstein1_1d(a, a) == 0.0 && wasserstein_trunc(a, a) == 0.0;
    if (!ok) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(Sliced, TranslatedPointMass) {
  // Shift v in R^2: each slice costs |<v, u>|; the estimate reports its count.
  const std::vector<double> a{0.0, 0.0, 0.0, 0.0}, b{1.0, 2.0, 1.0, 2.0};
  const auto est = sliced_wasserstein1(a, b, 2, 16);
  EXPECT_EQ(est.directions, 16u);
  const auto dirs = slice_directions(2, 16);
  double expected = 0.0;
  for (std::size_t s = 0; s < 16; ++s) expected += std::abs(dirs[2 * s] + 2.0 * dirs[2 * s + 1]);
  EXPECT_NEAR(est.value, expected / 16.0, 1e-12);
  EXPECT_LE(est.value, std::sqrt(5.0));
}

EmpiricalFlow constant_drift_flow(double c, std::size_t n, const BrownianBundle& bundle) {
  auto p = catalog::mean_drift_params(catalog::MeanDrift::kNone, 0.0, 0.0);
  p.b0 = c;
  const GameSpec game = catalog::affine_poly(p, "drift");
  return simulate_nplayer(game, ControlProfile::uniform(ControlField::constant({0.0}), n), bundle,
                          initial_samples(game, bundle))
      .flow();
}

TEST(FlowDistance, Definitions) {
  const TimeGrid g(1.0, 4);
  std::vector<double> xs(5 * 3, 0.0);
  const EmpiricalFlow a(g, 3, 1, xs);
  EXPECT_EQ(flow_distance(a, a), 0.0);
  for (std::size_t k = 0; k < 3; ++k) xs[4 * 3 + k] = 0.4;
  const EmpiricalFlow b(g, 3, 1, xs);
  EXPECT_DOUBLE_EQ(flow_distance(a, b), 0.4);
  const EmpiricalFlow c(TimeGrid(1.0, 5), 3, 1, std::vector<double>(6 * 3, 0.0));
  EXPECT_THROW(flow_distance(a, c), InvalidArgument);
}

TEST(FlowDistance, DriftShiftOnCommonNoise) {
  const auto bundle = sample_brownian(31, 2000, TimeGrid(1.0, 100), 1);
  const auto still = constant_drift_flow(0.0, 2000, bundle);
  const auto moving = constant_drift_flow(-0.8, 2000, bundle);
  EXPECT_NEAR(flow_distance(still, moving), 0.8, 1e-9);
  const auto other = sample_brownian(32, 2000, TimeGrid(1.0, 100), 1);
  EXPECT_NEAR(flow_distance(still, constant_drift_flow(-0.8, 2000, other)), 0.8, 0.1);
}

TEST(MeanPath, DriftlessAndConstant) {
  const auto bundle = sample_brownian(33, 4000, TimeGrid(1.0, 50), 1);
  const auto still = mean_path(constant_drift_flow(0.0, 4000, bundle));
  const auto moving = mean_path(constant_drift_flow(0.5, 4000, bundle));
  for (std::size_t j = 0; j < still.size(); ++j) {
    EXPECT_LE(std::abs(still[j]), 4.0 / std::sqrt(4000.0));
    EXPECT_NEAR(moving[j] - still[j], 0.5 * bundle.grid().time(j), 1e-12);
  }
}

TEST(Flow, SortedCacheIsPermutation) {
  const auto flow = constant_drift_flow(0.2, 100, sample_brownian(3, 100, TimeGrid(1.0, 5), 1));
  for (std::size_t j = 0; j <= 5; ++j) {
    std::vector<double> copy(flow.at(j).begin(), flow.at(j).end());
    std::sort(copy.begin(), copy.end());
    EXPECT_TRUE(std::equal(copy.begin(), copy.end(), flow.sorted(j).begin()));
  }
}

TEST(Flow, CsvLayout) {
  const EmpiricalFlow flow(TimeGrid(1.0, 1), 2, 1, {0.0, 1.0, 0.5, -0.25});
  std::ostringstream os;
  write_flow_csv(os, flow);
  EXPECT_EQ(os.str(),
            "time_index,time,particle,x0\r\n0,0,0,0\r\n0,0,1,1\r\n1,1,0,0.5\r\n1,1,1,-0.25\r\n");
}

}  // namespace
}  // namespace mfg
