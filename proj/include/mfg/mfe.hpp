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

// Strong mean field equilibria as fixed points of
//   flow -> best response (grid HJB) -> frozen-flow cloud -> damped mixture,
// plus the consistency certificate and the Lasry-Lions monotonicity test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/control.hpp"
#include "mfg/csv.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/grids.hpp"
#include "mfg/hjb.hpp"
#include "mfg/metrics.hpp"
#include "mfg/rng.hpp"
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// Cloud of X_t = X_0 + velocity * t + W_t with X_0 ~ lambda; mean path
// lambda-bar + velocity * t. Used to seed fixed-point iterations.
inline EmpiricalFlow drifted_flow(const GameSpec& game, double velocity, std::size_t n,
                                  const TimeGrid& grid, std::uint64_t seed) {
  const std::size_t d = game.state_dim;
  const auto bundle = sample_brownian(seed, n, grid, d);
  std::vector<double> samples(grid.points() * n * d);
  const auto x0 = initial_samples(game, bundle);
  std::copy(x0.begin(), x0.end(), samples.begin());
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const auto dw = bundle.step(j);
    const double shift = velocity * grid.dt();
    for (std::size_t i = 0; i < n * d; ++i) {
      samples[(j + 1) * n * d + i] = samples[j * n * d + i] + shift + dw[i];
    }
  }
  return EmpiricalFlow(grid, n, d, std::move(samples));
}

// Index-aligned subsampling mixture: exactly round(theta n) particle paths
// come from `fresh`, the rest from `old`. Which indices move is a seeded
// random choice.
inline EmpiricalFlow mix_flows(const EmpiricalFlow& fresh, const EmpiricalFlow& old, double theta,
                               std::uint64_t seed, std::uint64_t round) {
  require(fresh.grid() == old.grid() && fresh.particles() == old.particles() &&
              fresh.dim() == old.dim(),
          "mix_flows: flows must share grid, particle count and dimension");
  require(theta > 0.0 && theta <= 1.0, "mix_flows: damping must lie in (0, 1]");
  const std::size_t n = fresh.particles();
  const std::size_t d = fresh.dim();
  const auto take = static_cast<std::size_t>(std::llround(theta * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> key(n);
  for (std::size_t k = 0; k < n; ++k) key[k] = rng::uniform_at(seed, rng::Stream::kMixture, k, round);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  std::vector<unsigned char> from_fresh(n, 0);
  for (std::size_t i = 0; i < take; ++i) from_fresh[order[i]] = 1;

  std::vector<double> samples(old.data());
  const auto& src = fresh.data();
  for (std::size_t j = 0; j < fresh.grid().points(); ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!from_fresh[k]) continue;
      const std::size_t at = (j * n + k) * d;
      std::copy(src.begin() + at, src.begin() + at + d, samples.begin() + at);
    }
  }
  return EmpiricalFlow(fresh.grid(), n, d, std::move(samples));
}

struct PicardOptions {
  double damping = 0.5;
  std::size_t max_iterations = 30;
  double tolerance = 0.02;
  FlowMetric metric = FlowMetric::kWasserstein1;
  double spatial_step = 0.1;
  std::optional<SpatialGrid> space;
  std::size_t action_count = 21;
  HjbOptions hjb;
  std::uint64_t seed = 1;
};

struct PicardStep {
  std::size_t iteration = 0;
  double residual = 0.0;
  double mean_endpoint = 0.0;
};

struct PicardResult {
  EmpiricalFlow flow;
  ControlField control;
  std::vector<PicardStep> history;
  bool converged = false;
};

// Damped Picard iteration. The forward clouds of every round reuse one
// Brownian bundle, so once the feedback stops changing the iterates coincide
// pathwise and the residual measures only the flow update. Non-convergence
// is reported through `converged`, not raised.
inline PicardResult picard_mfe(const GameSpec& game, const EmpiricalFlow& init,
                               const PicardOptions& options = {}) {
  require(options.damping > 0.0 && options.damping <= 1.0, "picard_mfe: damping must lie in (0, 1]");
  require(options.max_iterations >= 1, "picard_mfe: need at least one iteration");
  require(options.tolerance > 0.0, "picard_mfe: tolerance must be positive");
  require(init.dim() == game.state_dim, "picard_mfe: initial flow dimension mismatch");
  const TimeGrid& grid = init.grid();
  require(std::abs(grid.horizon() - game.horizon) <= 1e-12 * game.horizon,
          "picard_mfe: initial flow horizon differs from the game's");
  const SpatialGrid space =
      options.space ? *options.space : default_spatial_grid(game, grid, options.spatial_step);
  const ActionGrid actions = ActionGrid::uniform(game.actions, options.action_count);
  const auto bundle = sample_brownian(options.seed, init.particles(), grid, game.state_dim);
  const auto x0 = initial_samples(game, bundle);

  PicardResult out;
  EmpiricalFlow current = init;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const auto best = solve_hjb(game, current, space, actions, options.hjb);
    auto cloud = simulate_frozen_flow(game, best.control, current, bundle, x0).flow();
    EmpiricalFlow next = mix_flows(cloud, current, options.damping, options.seed, it);
    const double r = flow_distance(next, current, options.metric);
    out.history.push_back({it, r, next.stats(grid.steps()).mean[0]});
    current = std::move(next);
    if (r <= options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.control = solve_hjb(game, current, space, actions, options.hjb).control;
  out.flow = std::move(current);
  return out;
}

// Distance between `flow` and a fresh frozen-flow cloud driven by `control`.
inline double consistency_residual(const GameSpec& game, const EmpiricalFlow& flow,
                                   const ControlField& control, const BrownianBundle& bundle,
                                   FlowMetric metric = FlowMetric::kWasserstein1) {
  const auto cloud =
      simulate_frozen_flow(game, control, flow, bundle, initial_samples(game, bundle)).flow();
  return flow_distance(flow, cloud, metric);
}

// Same-law Monte Carlo baseline: distance between two independent clouds.
inline double mc_baseline(const GameSpec& game, const EmpiricalFlow& flow,
                          const ControlField& control, const BrownianBundle& a,
                          const BrownianBundle& b, FlowMetric metric = FlowMetric::kWasserstein1) {
  const auto ca = simulate_frozen_flow(game, control, flow, a, initial_samples(game, a)).flow();
  const auto cb = simulate_frozen_flow(game, control, flow, b, initial_samples(game, b)).flow();
  return flow_distance(ca, cb, metric);
}

struct ConsistencyCheck {
  double residual = 0.0;
  double baseline = 0.0;
  double factor = 2.0;
  bool passed() const { return residual <= factor * baseline; }
};

// Residual against a cloud of the flow's size, compared with factor x the
// baseline between two more independent clouds. All three seeds derive from
// `seed`.
inline ConsistencyCheck certify(const GameSpec& game, const EmpiricalFlow& flow,
                                const ControlField& control, std::uint64_t seed,
                                double factor = 2.0,
                                FlowMetric metric = FlowMetric::kWasserstein1) {
  const std::size_t n = flow.particles();
  const std::size_t d = game.state_dim;
  const auto b0 = sample_brownian(rng::derive_seed(seed, 0), n, flow.grid(), d);
  const auto b1 = sample_brownian(rng::derive_seed(seed, 1), n, flow.grid(), d);
  const auto b2 = sample_brownian(rng::derive_seed(seed, 2), n, flow.grid(), d);
  ConsistencyCheck c;
  c.residual = consistency_residual(game, flow, control, b0, metric);
  c.baseline = mc_baseline(game, flow, control, b1, b2, metric);
  c.factor = factor;
  return c;
}

inline void write_residual_csv(std::ostream& os, const std::vector<PicardStep>& history) {
  csv::Writer w(os);
  w.row({"iteration", "residual", "mean_endpoint"});
  for (const auto& s : history) {
    w.row({csv::number(s.iteration), csv::number(s.residual), csv::number(s.mean_endpoint)});
  }
}

// int (h(., m1) - h(., m2)) d(m1 - m2) estimated by sample averages, with
// the standard error of the difference of the two averages.
struct MonotonicityIntegral {
  double value = 0.0;
  double std_error = 0.0;
};

template <typename Part>
MonotonicityIntegral monotonicity_integral(std::span<const double> s1, std::span<const double> s2,
                                           std::size_t dim, Part&& diff_at) {
  RunningMoments on1, on2;
  for (std::size_t k = 0; k < s1.size() / dim; ++k) on1.add(diff_at(s1.subspan(k * dim, dim)));
  for (std::size_t k = 0; k < s2.size() / dim; ++k) on2.add(diff_at(s2.subspan(k * dim, dim)));
  return {on1.mean() - on2.mean(),
          std::sqrt(on1.std_error() * on1.std_error() + on2.std_error() * on2.std_error())};
}

struct MonotonicityPair {
  double time = 0.0;
  MonotonicityIntegral running;
  MonotonicityIntegral terminal;
};

// Both integrals for one pair of sample measures at time t.
inline MonotonicityPair monotonicity_pair(const GameSpec& game, double t,
                                          std::span<const double> s1,
                                          std::span<const double> s2) {
  if (!game.separable) {
    throw InvalidArgument("check_monotonicity: game '" + game.name +
                          "' does not declare a separable running reward f1 + f2");
  }
  const std::size_t d = game.state_dim;
  const MeasureStats m1 = compute_stats(s1, d, game.stats);
  const MeasureStats m2 = compute_stats(s2, d, game.stats);
  const auto& f1 = game.separable->state_part;
  MonotonicityPair p;
  p.time = t;
  p.running = monotonicity_integral(s1, s2, d, [&](std::span<const double> x) {
    return f1(t, x, m1) - f1(t, x, m2);
  });
  p.terminal = monotonicity_integral(s1, s2, d, [&](std::span<const double> x) {
    return game.terminal(x, m1) - game.terminal(x, m2);
  });
  return p;
}

struct MonotonicityOptions {
  std::size_t samples = 2000;
  double z = 3.0;
  double mean_range = 2.0;
  double sd_lo = 0.2;
  double sd_hi = 1.5;
};

struct MonotonicityReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  // Largest integral and largest (integral - z * standard error) seen.
  double worst_value = -std::numeric_limits<double>::infinity();
  double worst_margin = -std::numeric_limits<double>::infinity();
};

// Random pairs of Gaussian sample measures (mean uniform in +-mean_range,
// sd uniform in [sd_lo, sd_hi], clamped to the state box) at random times.
// A violation is an integral above z standard errors.
inline MonotonicityReport check_monotonicity(const GameSpec& game, std::size_t trials,
                                             std::uint64_t seed,
                                             const MonotonicityOptions& options = {}) {
  if (!game.separable) {
    throw InvalidArgument("check_monotonicity: game '" + game.name +
                          "' does not declare a separable running reward f1 + f2");
  }
  const std::size_t d = game.state_dim;
  const std::size_t n = options.samples;
  const auto draw_measure = [&](std::uint64_t trial, std::uint64_t which) {
    const std::uint64_t s = rng::derive_seed(seed, 2 * trial + which);
    std::vector<double> out(n * d);
    for (std::size_t c = 0; c < d; ++c) {
      const double mean = options.mean_range * (2.0 * rng::uniform_at(s, rng::Stream::kCatalog, 0, 2 * c) - 1.0);
      const double sd = options.sd_lo + (options.sd_hi - options.sd_lo) *
                                            rng::uniform_at(s, rng::Stream::kCatalog, 0, 2 * c + 1);
      for (std::size_t k = 0; k < n; ++k) {
        const double x = mean + sd * rng::normal_at(s, rng::Stream::kCatalog, k + 1, c);
        out[k * d + c] = std::clamp(x, game.state_box.lo[c], game.state_box.hi[c]);
      }
    }
    return out;
  };
  MonotonicityReport report;
  report.trials = trials;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const auto s1 = draw_measure(trial, 0);
    const auto s2 = draw_measure(trial, 1);
    const double t = game.horizon * rng::uniform_at(seed, rng::Stream::kCatalog, trial, 0);
    const auto p = monotonicity_pair(game, t, s1, s2);
    bool violated = false;
    for (const auto& part : {p.running, p.terminal}) {
      const double tol = options.z * part.std_error + 1e-12 * (1.0 + std::abs(part.value));
      report.worst_value = std::max(report.worst_value, part.value);
      report.worst_margin = std::max(report.worst_margin, part.value - options.z * part.std_error);
      violated = violated || part.value > tol;
    }
    if (violated) ++report.violations;
  }
  return report;
}

}  // namespace mfg
