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

// One-player deviations: the exploitability proxy of a distributed mean field
// control, and discrete Girsanov weights that reweight equilibrium paths into
// the law after a single deviation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/catalog.hpp"
#include "mfg/control.hpp"
#include "mfg/csv.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/hjb.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// zeta(k, j) for k < n, j <= M, stored player-major.
class GirsanovWeights {
 public:
  GirsanovWeights() = default;
  GirsanovWeights(TimeGrid grid, std::size_t players)
      : grid_(grid), players_(players), zeta_(players * grid.points(), 1.0) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t players() const { return players_; }
  double at(std::size_t k, std::size_t j) const { return zeta_[k * grid_.points() + j]; }
  double& at(std::size_t k, std::size_t j) { return zeta_[k * grid_.points() + j]; }
  double terminal(std::size_t k) const { return at(k, grid_.steps()); }
  std::vector<double> terminal_weights() const {
    std::vector<double> out(players_);
    for (std::size_t k = 0; k < players_; ++k) out[k] = terminal(k);
    return out;
  }
  const std::vector<double>& data() const { return zeta_; }

 private:
  TimeGrid grid_;
  std::size_t players_ = 0;
  std::vector<double> zeta_;
};

namespace detail {

inline void check_weight_inputs(const GameSpec& game, const ParticleEnsemble& ensemble,
                                const BrownianBundle& bundle, const ControlProfile& old) {
  require(!bundle.empty(), "girsanov_weights: the ensemble's Brownian increments are missing");
  require(bundle.grid() == ensemble.grid() && bundle.particles() == ensemble.particles() &&
              bundle.dim() == ensemble.dim(),
          "girsanov_weights: Brownian bundle does not match the ensemble");
  require(bundle.seed() == ensemble.seed(),
          "girsanov_weights: ensemble was not produced by this Brownian bundle");
  require(old.players() == ensemble.particles(), "girsanov_weights: one old control per player");
  require(ensemble.dim() == game.state_dim, "girsanov_weights: dimension mismatch");
}

// Xi(k, j) = b(., beta) - b(., alpha_k) along the equilibrium paths, calling
// fn(k, j, xi) for every player and step. Players run in parallel.
template <typename Fn>
void for_each_drift_gap(const GameSpec& game, const ParticleEnsemble& ensemble,
                        const ControlProfile& old, const ControlField& beta, Fn&& fn) {
  const TimeGrid& grid = ensemble.grid();
  const std::size_t d = game.state_dim;
  const std::size_t k = game.action_dim();
  std::vector<MeasureStats> stats(grid.steps());
  parallel_for(grid.steps(), [&](std::size_t j) {
    stats[j] = compute_stats(ensemble.at(j), d, game.stats);
  });
  const auto count = static_cast<long long>(ensemble.particles());
#pragma omp parallel
  {
    std::vector<double> action(k), scratch(d), b_new(d), b_old(d), xi(d);
#pragma omp for schedule(static)
    for (long long ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = 0; j < grid.steps(); ++j) {
        const auto x = ensemble.state(i, j);
        const double t = grid.time(j);
        controlled_coefficients(game, beta, j, t, x, stats[j], action, scratch, b_new, false);
        controlled_coefficients(game, old.of(i), j, t, x, stats[j], action, scratch, b_old, false);
        for (std::size_t c = 0; c < d; ++c) xi[c] = b_new[c] - b_old[c];
        fn(i, j, std::span<const double>(xi));
      }
    }
  }
}

}  // namespace detail

// zeta^k: the density that turns player k's drift under `old` into its drift
// under `beta`, everyone else unchanged. Discretized as the exponential of
// the Euler log-increment Xi . dW - |Xi|^2 dt / 2, so weights stay positive
// and are exact discrete martingales.
inline GirsanovWeights girsanov_weights(const GameSpec& game, const ParticleEnsemble& ensemble,
                                        const BrownianBundle& bundle, const ControlProfile& old,
                                        const ControlField& beta) {
  detail::check_weight_inputs(game, ensemble, bundle, old);
  const TimeGrid& grid = ensemble.grid();
  const std::size_t d = game.state_dim;
  GirsanovWeights w(grid, ensemble.particles());
  std::vector<double> log_zeta(ensemble.particles(), 0.0);
  detail::for_each_drift_gap(game, ensemble, old, beta,
                             [&](std::size_t i, std::size_t j, std::span<const double> xi) {
                               const auto dw = bundle.increment(i, j);
                               double inc = 0.0, sq = 0.0;
                               for (std::size_t c = 0; c < d; ++c) {
                                 inc += xi[c] * dw[c];
                                 sq += xi[c] * xi[c];
                               }
                               log_zeta[i] += inc - 0.5 * sq * grid.dt();
                               w.at(i, j + 1) = std::exp(log_zeta[i]);
                             });
  return w;
}

// Change of measure on the empirical-mean process alone when player k
// deviates: the mean's drift moves by Xi / n against noise dW-bar / sqrt(n),
// so the integrand is Xi / sqrt(n) against the standard Brownian motion
// W-bar = sum_i W^i / sqrt(n). Row k holds deviator k's weight path.
inline GirsanovWeights mean_process_weights(const GameSpec& game, const ParticleEnsemble& ensemble,
                                            const BrownianBundle& bundle,
                                            const ControlProfile& old, const ControlField& beta) {
  detail::check_weight_inputs(game, ensemble, bundle, old);
  const TimeGrid& grid = ensemble.grid();
  const std::size_t d = game.state_dim;
  const std::size_t n = ensemble.particles();
  const double nn = static_cast<double>(n);
  // sum_i dW^i per step, summed in index order.
  std::vector<double> total(grid.steps() * d, 0.0);
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) total[j * d + c] += bundle.increment(i, j)[c];
    }
  }
  GirsanovWeights w(grid, n);
  std::vector<double> log_zeta(n, 0.0);
  detail::for_each_drift_gap(game, ensemble, old, beta,
                             [&](std::size_t i, std::size_t j, std::span<const double> xi) {
                               double inc = 0.0, sq = 0.0;
                               for (std::size_t c = 0; c < d; ++c) {
                                 inc += xi[c] * total[j * d + c];
                                 sq += xi[c] * xi[c];
                               }
                               log_zeta[i] += inc / nn - 0.5 * sq * grid.dt() / nn;
                               w.at(i, j + 1) = std::exp(log_zeta[i]);
                             });
  return w;
}

struct WeightedValue {
  double value = 0.0;
  double std_error = 0.0;
};

// (1/n) sum_k zeta^k_T h(mu^n), with the standard error over players.
inline WeightedValue reweighted_statistic(const GirsanovWeights& weights,
                                          const EmpiricalFlow& flow,
                                          const catalog::FlowFunctional& h) {
  require(weights.players() == flow.particles() && weights.grid() == flow.grid(),
          "reweighted_statistic: weights and flow shapes differ");
  const double hv = h(flow);
  RunningMoments acc;
  for (std::size_t k = 0; k < weights.players(); ++k) acc.add(weights.terminal(k) * hv);
  return {acc.mean(), acc.std_error()};
}

// Relative-entropy proxy mean_k zeta_T log zeta_T.
inline WeightedValue entropy_proxy(const GirsanovWeights& weights) {
  RunningMoments acc;
  for (std::size_t k = 0; k < weights.players(); ++k) {
    const double z = weights.terminal(k);
    acc.add(z * std::log(z));
  }
  return {acc.mean(), acc.std_error()};
}

struct ExploitabilityOptions {
  double spatial_step = 0.1;
  std::optional<SpatialGrid> space;  // overrides spatial_step when set
  std::size_t action_count = 21;
  HjbOptions hjb;
  std::size_t deviator = 0;
};

struct ExploitabilityRow {
  std::size_t n = 0;
  std::size_t rep = 0;
  double j_eq = 0.0;
  double j_dev = 0.0;
  double weight_mean = 0.0;
  double weight_variance = 0.0;
};

struct ExploitabilityEstimate {
  std::size_t n = 0;
  std::size_t reps = 0;
  double j_eq = 0.0, j_eq_se = 0.0;
  double j_dev = 0.0, j_dev_se = 0.0;
  // Signed J_dev - J_eq; its standard error uses the paired differences.
  double epsilon = 0.0, epsilon_se = 0.0;
  std::vector<ExploitabilityRow> rows;
};

// J_eq: the deviator's payoff when all n players use mfe_control. J_dev: the
// deviator instead plays the grid best response to the frozen mfe_flow, the
// others unchanged. Both runs of a repetition share the Brownian paths.
// Since the true best response in the n-player game is out of reach, the
// estimate is a proxy, not an upper bound on exploitability.
inline ExploitabilityEstimate exploitability_estimate(const GameSpec& game,
                                                      const EmpiricalFlow& mfe_flow,
                                                      const ControlField& mfe_control,
                                                      std::size_t n, std::size_t reps,
                                                      std::uint64_t seed,
                                                      const ExploitabilityOptions& options = {}) {
  require(n >= 1 && reps >= 1, "exploitability_estimate: need n >= 1 and reps >= 1");
  require(options.deviator < n, "exploitability_estimate: deviator index out of range");
  const TimeGrid& grid = mfe_flow.grid();
  const auto space = options.space ? *options.space : default_spatial_grid(game, grid, options.spatial_step);
  const auto actions = ActionGrid::uniform(game.actions, options.action_count);
  const ControlField deviation = solve_hjb(game, mfe_flow, space, actions, options.hjb).control;
  const auto eq_profile = ControlProfile::uniform(mfe_control, n);
  const auto dev_profile = ControlProfile::with_deviation(mfe_control, deviation, n, options.deviator);

  ExploitabilityEstimate out;
  out.n = n;
  out.reps = reps;
  RunningMoments eq, dev, gap;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto bundle = sample_brownian(rng::derive_seed(seed, rep), n, grid, game.state_dim);
    const auto init = initial_samples(game, bundle);
    const auto run_eq = simulate_nplayer_with_payoffs(game, eq_profile, bundle, init);
    const auto run_dev = simulate_nplayer_with_payoffs(game, dev_profile, bundle, init);
    const auto w = girsanov_weights(game, run_eq.ensemble, bundle, eq_profile, deviation);
    RunningMoments wt;
    for (std::size_t k = 0; k < n; ++k) wt.add(w.terminal(k));
    const double je = run_eq.payoffs[options.deviator];
    const double jd = run_dev.payoffs[options.deviator];
    eq.add(je);
    dev.add(jd);
    gap.add(jd - je);
    out.rows.push_back({n, rep, je, jd, wt.mean(), wt.variance()});
  }
  out.j_eq = eq.mean();
  out.j_eq_se = eq.std_error();
  out.j_dev = dev.mean();
  out.j_dev_se = dev.std_error();
  out.epsilon = gap.mean();
  out.epsilon_se = gap.std_error();
  return out;
}

inline void write_exploitability_csv(std::ostream& os, const std::vector<ExploitabilityRow>& rows) {
  csv::Writer w(os);
  w.row({"n", "rep", "J_eq", "J_dev", "weight_mean", "weight_variance"});
  for (const auto& r : rows) {
    w.row({csv::number(r.n), csv::number(r.rep), csv::number(r.j_eq), csv::number(r.j_dev),
           csv::number(r.weight_mean), csv::number(r.weight_variance)});
  }
}

}  // namespace mfg
