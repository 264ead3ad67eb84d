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

// Euler-Maruyama integration of the coupled n-player system and of the
// single-player SDE against a frozen measure flow (unit diffusion).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/control.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/stats.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Trajectories X^k_{t_j}, stored time-major as (M+1) x n x d.
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  ParticleEnsemble(TimeGrid grid, std::size_t particles, std::size_t dim, std::uint64_t seed)
      : grid_(grid),
        particles_(particles),
        dim_(dim),
        seed_(seed),
        states_(grid.points() * particles * dim, 0.0) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t particles() const { return particles_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> at(std::size_t j) const {
    return {&states_[j * particles_ * dim_], particles_ * dim_};
  }
  std::span<double> at(std::size_t j) {
    return {&states_[j * particles_ * dim_], particles_ * dim_};
  }
  std::span<const double> state(std::size_t k, std::size_t j) const {
    return {&states_[(j * particles_ + k) * dim_], dim_};
  }

  const std::vector<double>& data() const { return states_; }

  // Relabelled players: particle k of the result is particle perm[k] here.
  ParticleEnsemble permuted(std::span<const std::size_t> perm) const {
    require(perm.size() == particles_, "ParticleEnsemble: permutation size mismatch");
    ParticleEnsemble out(grid_, particles_, dim_, seed_);
    for (std::size_t j = 0; j < grid_.points(); ++j) {
      for (std::size_t k = 0; k < particles_; ++k) {
        require(perm[k] < particles_, "ParticleEnsemble: permutation index out of range");
        const auto src = state(perm[k], j);
        std::copy(src.begin(), src.end(), out.at(j).begin() + static_cast<std::ptrdiff_t>(k * dim_));
      }
    }
    return out;
  }

  EmpiricalFlow flow() const& { return EmpiricalFlow(grid_, particles_, dim_, states_); }
  EmpiricalFlow flow() && { return EmpiricalFlow(grid_, particles_, dim_, std::move(states_)); }

 private:
  TimeGrid grid_;
  std::size_t particles_ = 0;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> states_;
};

// Drift (written to `drift`) and running reward under a control at one
// point. Relaxed controls average both over their atoms.
inline double controlled_coefficients(const GameSpec& game, const ControlField& control,
                                      std::size_t step, double t, std::span<const double> x,
                                      const MeasureStats& m, std::span<double> action,
                                      std::span<double> scratch, std::span<double> drift,
                                      bool want_reward) {
  if (!control.is_relaxed()) {
    control.act(step, t, x, m, action);
    game.drift(t, x, m, action, drift);
    return want_reward ? game.running(t, x, m, action) : 0.0;
  }
  const auto w = control.weights(step, x);
  const ActionGrid& atoms = control.atoms();
  std::fill(drift.begin(), drift.end(), 0.0);
  double reward = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const auto a = atoms.atom(i);
    game.drift(t, x, m, a, scratch);
    for (std::size_t c = 0; c < drift.size(); ++c) drift[c] += w[i] * scratch[c];
    if (want_reward) reward += w[i] * game.running(t, x, m, a);
  }
  return reward;
}

// Result of a run: trajectories plus, if requested, each particle's payoff
// sum_j f(t_j, X_j, m_j, alpha_j) dt + g(X_T, m_T).
struct SimulationResult {
  ParticleEnsemble ensemble;
  std::vector<double> payoffs;
};

namespace detail {

inline std::string describe_point(double t, std::span<const double> x) {
  std::ostringstream os;
  os << "t = " << t << ", x = (";
  for (std::size_t c = 0; c < x.size(); ++c) os << (c ? ", " : "") << x[c];
  os << ")";
  return os.str();
}

// StatsAt(j, states_at_j) -> MeasureStats seen by the coefficients at step j.
template <typename StatsAt>
SimulationResult integrate(const GameSpec& game, const std::function<const ControlField&(std::size_t)>& control_of,
                           const BrownianBundle& bundle, std::span<const double> init,
                           StatsAt&& stats_at, bool with_payoffs) {
  const TimeGrid& grid = bundle.grid();
  const std::size_t n = bundle.particles();
  const std::size_t d = game.state_dim;
  const std::size_t k = game.action_dim();
  require(!bundle.empty(), "simulate: Brownian increments are missing");
  require(bundle.dim() == d, "simulate: Brownian dimension differs from the state dimension");
  require(init.size() == n * d, "simulate: initial samples must be n x d");

  SimulationResult out{ParticleEnsemble(grid, n, d, bundle.seed()), {}};
  ParticleEnsemble& ens = out.ensemble;
  std::copy(init.begin(), init.end(), ens.at(0).begin());
  if (with_payoffs) out.payoffs.assign(n, 0.0);

  std::vector<unsigned char> bad(n, 0);
  const double dt = grid.dt();
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.time(j);
    const MeasureStats m = stats_at(j, std::span<const double>(ens.at(j)));
    const auto now = std::span<const double>(ens.at(j));
    auto next = ens.at(j + 1);
    const auto dw = bundle.step(j);
    const auto count = static_cast<long long>(n);
#pragma omp parallel
    {
      std::vector<double> action(k), scratch(d), drift(d);
#pragma omp for schedule(static)
      for (long long ii = 0; ii < count; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto x = now.subspan(i * d, d);
        const double f = controlled_coefficients(game, control_of(i), j, t, x, m, action, scratch,
                                                 drift, with_payoffs);
        bool finite = std::isfinite(f);
        for (std::size_t c = 0; c < d; ++c) {
          const double v = x[c] + drift[c] * dt + dw[i * d + c];
          finite = finite && std::isfinite(drift[c]) && std::isfinite(v);
          next[i * d + c] = v;
        }
        if (with_payoffs) out.payoffs[i] += f * dt;
        if (!finite) bad[i] = 1;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (bad[i]) {
        throw NumericalError("simulate: non-finite coefficient at " +
                             describe_point(t, now.subspan(i * d, d)) + " (particle " +
                             std::to_string(i) + ")");
      }
    }
  }
  if (with_payoffs) {
    const std::size_t last = grid.steps();
    const MeasureStats m = stats_at(last, std::span<const double>(ens.at(last)));
    for (std::size_t i = 0; i < n; ++i) {
      const double g = game.terminal(ens.state(i, last), m);
      if (!std::isfinite(g)) {
        throw NumericalError("simulate: non-finite terminal reward at " +
                             describe_point(grid.horizon(), ens.state(i, last)));
      }
      out.payoffs[i] += g;
    }
  }
  return out;
}

inline void check_controls(const GameSpec& game, const ControlField& c, const TimeGrid& grid) {
  require(c.action_dim() == game.action_dim(),
          "simulate: control '" + c.name() + "' has the wrong action dimension");
  c.check_time_grid(grid);
}

}  // namespace detail

// Coupled system dX^i = b(t, X^i, mu^n_t, alpha^i) dt + dW^i where mu^n_t is
// the empirical measure of the current states.
inline SimulationResult simulate_nplayer_with_payoffs(const GameSpec& game,
                                                      const ControlProfile& profile,
                                                      const BrownianBundle& bundle,
                                                      std::span<const double> init,
                                                      bool with_payoffs = true) {
  require(profile.players() == bundle.particles(),
          "simulate_nplayer: one control per player is required");
  for (std::size_t i = 0; i < profile.field_count(); ++i) {
    detail::check_controls(game, profile.field(i), bundle.grid());
  }
  const std::size_t d = game.state_dim;
  const StatsRequest request = game.stats;
  return detail::integrate(
      game, [&](std::size_t i) -> const ControlField& { return profile.of(i); }, bundle, init,
      [&](std::size_t, std::span<const double> states) {
        return compute_stats(states, d, request);
      },
      with_payoffs);
}

inline ParticleEnsemble simulate_nplayer(const GameSpec& game, const ControlProfile& profile,
                                         const BrownianBundle& bundle,
                                         std::span<const double> init) {
  return simulate_nplayer_with_payoffs(game, profile, bundle, init, false).ensemble;
}

// n i.i.d. copies of dX = b(t, X, m_t, alpha) dt + dW with m frozen.
inline SimulationResult simulate_frozen_flow_with_payoffs(const GameSpec& game,
                                                          const ControlField& control,
                                                          const EmpiricalFlow& flow,
                                                          const BrownianBundle& bundle,
                                                          std::span<const double> init,
                                                          bool with_payoffs = true) {
  require(flow.grid() == bundle.grid(), "simulate_frozen_flow: flow and noise grids differ");
  require(flow.dim() == game.state_dim, "simulate_frozen_flow: flow dimension mismatch");
  detail::check_controls(game, control, bundle.grid());
  const auto stats = flow.all_stats(game.stats);
  return detail::integrate(
      game, [&](std::size_t) -> const ControlField& { return control; }, bundle, init,
      [&](std::size_t j, std::span<const double>) -> const MeasureStats& { return stats[j]; },
      with_payoffs);
}

inline ParticleEnsemble simulate_frozen_flow(const GameSpec& game, const ControlField& control,
                                             const EmpiricalFlow& flow,
                                             const BrownianBundle& bundle,
                                             std::span<const double> init) {
  return simulate_frozen_flow_with_payoffs(game, control, flow, bundle, init, false).ensemble;
}

// Initial samples for a bundle: lambda drawn with the bundle's seed.
inline std::vector<double> initial_samples(const GameSpec& game, const BrownianBundle& bundle) {
  return game.initial.sample(bundle.seed(), bundle.particles());
}

}  // namespace mfg
