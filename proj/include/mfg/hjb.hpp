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

// Backward dynamic programming for the single-player control problem against
// a frozen measure flow:
//
//   -dV/dt = max_a { b(t,x,m_t,a) . grad V + f(t,x,m_t,a) } + (1/2) lap V,
//   V(T, x) = g(x, m_T),
//
// discretized by an explicit monotone scheme: upwind first differences,
// centred Laplacian, homogeneous Neumann boundary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
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
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// V(t_j, x_i) on (M+1) x nodes.
class ValueField {
 public:
  ValueField() = default;
  ValueField(TimeGrid time, SpatialGrid space)
      : time_(time), space_(std::move(space)), values_(time_.points() * space_.nodes(), 0.0) {}

  const TimeGrid& time_grid() const { return time_; }
  const SpatialGrid& space() const { return space_; }

  double at(std::size_t j, std::size_t node) const { return values_[j * space_.nodes() + node]; }
  double& at(std::size_t j, std::size_t node) { return values_[j * space_.nodes() + node]; }
  double value(std::size_t j, std::span<const double> x) const { return at(j, space_.nearest(x)); }

  std::span<const double> slice(std::size_t j) const {
    return {&values_[j * space_.nodes()], space_.nodes()};
  }
  const std::vector<double>& data() const { return values_; }

 private:
  TimeGrid time_;
  SpatialGrid space_;
  std::vector<double> values_;
};

enum class TieBreak {
  kLowestIndex,  // first maximizing atom in lattice order
  kMinimalNorm,  // maximizer of smallest |a|, then lowest index
};

struct HjbOptions {
  // Atoms whose Hamiltonian is within this of the maximum count as tied.
  double tie_tolerance = 0.0;
  TieBreak tie_break = TieBreak::kLowestIndex;
};

struct HjbSolution {
  ValueField value;
  ControlField control;
};

// Largest dt for which the explicit scheme is monotone.
inline double cfl_limit(const SpatialGrid& space, double drift_bound) {
  const double h = space.min_spacing();
  return h * h / (static_cast<double>(space.dim()) + h * drift_bound);
}

// Smallest uniform spacing satisfying the CFL bound at this dt.
inline double min_spacing_for(double dt, std::size_t dim, double drift_bound) {
  const double d = static_cast<double>(dim);
  return 0.5 * (dt * drift_bound + std::sqrt(dt * dt * drift_bound * drift_bound + 4.0 * d * dt));
}

// Box of lambda's support widened by sup|b| T + 6 sqrt(T) on each side.
inline Box default_state_box(const GameSpec& game) {
  Box box = game.initial.support();
  const double pad = game.bounds.drift * game.horizon + 6.0 * std::sqrt(game.horizon);
  for (std::size_t c = 0; c < box.dim(); ++c) {
    box.lo[c] -= pad;
    box.hi[c] += pad;
  }
  return box;
}

// Spatial grid on the default box with spacing close to h, never below the
// CFL minimum.
inline SpatialGrid default_spatial_grid(const GameSpec& game, const TimeGrid& time, double h) {
  const double hmin = min_spacing_for(time.dt(), game.state_dim, game.bounds.drift) * 1.001;
  const Box box = default_state_box(game);
  SpatialGrid grid = SpatialGrid::with_spacing(box, std::max(h, hmin));
  if (grid.min_spacing() >= hmin) return grid;
  std::vector<std::size_t> pts(box.dim());
  for (std::size_t c = 0; c < box.dim(); ++c) {
    pts[c] = std::max<std::size_t>(3, static_cast<std::size_t>(std::floor((box.hi[c] - box.lo[c]) / hmin)) + 1);
  }
  return SpatialGrid(box.lo, box.hi, pts);
}

inline HjbSolution solve_hjb(const GameSpec& game, const EmpiricalFlow& flow,
                             const SpatialGrid& space, const ActionGrid& actions,
                             const HjbOptions& options = {}) {
  const TimeGrid& time = flow.grid();
  const std::size_t d = game.state_dim;
  require(space.dim() == d, "solve_hjb: spatial grid dimension differs from the game");
  require(d <= 2, "solve_hjb: grid solver supports d <= 2 (use Monte Carlo above)");
  require(flow.dim() == d, "solve_hjb: flow dimension differs from the game");
  require(actions.action_dim() == game.action_dim(), "solve_hjb: action grid dimension mismatch");
  require(options.tie_tolerance >= 0.0, "solve_hjb: tie tolerance must be nonnegative");
  const double required = cfl_limit(space, game.bounds.drift);
  if (time.dt() > required) throw CflViolation(time.dt(), required);

  const std::size_t nodes = space.nodes();
  const std::size_t k = game.action_dim();
  const std::size_t atoms = actions.size();
  const auto stats = flow.all_stats(game.stats);

  std::vector<double> norms(atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    double s = 0.0;
    for (double v : actions.atom(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }

  HjbSolution sol{ValueField(time, space), {}};
  ValueField& V = sol.value;
  std::vector<double> policy(time.steps() * nodes * k, 0.0);

  {
    std::vector<double> x(d);
    for (std::size_t node = 0; node < nodes; ++node) {
      space.node_point(node, x);
      V.at(time.steps(), node) = game.terminal(x, stats[time.steps()]);
    }
  }

  std::vector<unsigned char> bad(nodes, 0);
  std::vector<std::size_t> chosen(nodes, 0);
  const double dt = time.dt();
  for (std::size_t j = time.steps(); j-- > 0;) {
    const double t = time.time(j);
    const MeasureStats& m = stats[j];
    const auto next = V.slice(j + 1);
    const auto count = static_cast<long long>(nodes);
#pragma omp parallel
    {
      std::vector<double> x(d), b(d), dplus(d), dminus(d), ham(atoms);
#pragma omp for schedule(static)
      for (long long nn = 0; nn < count; ++nn) {
        const auto node = static_cast<std::size_t>(nn);
        if (space.on_boundary(node)) continue;
        space.node_point(node, x);
        const double v = next[node];
        double lap = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double h = space.spacing()[c];
          const double up = next[node + space.stride(c)];
          const double down = next[node - space.stride(c)];
          dplus[c] = (up - v) / h;
          dminus[c] = (v - down) / h;
          lap += (up - 2.0 * v + down) / (h * h);
        }
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < atoms; ++i) {
          const auto a = actions.atom(i);
          game.drift(t, x, m, a, b);
          double hval = game.running(t, x, m, a);
          for (std::size_t c = 0; c < d; ++c) {
            hval += b[c] > 0.0 ? b[c] * dplus[c] : b[c] * dminus[c];
          }
          ham[i] = hval;
          if (hval > best) best = hval;
        }
        std::size_t pick = atoms;
        for (std::size_t i = 0; i < atoms; ++i) {
          const bool tied = options.tie_tolerance > 0.0 ? ham[i] >= best - options.tie_tolerance
                                                        : ham[i] == best;
          if (!tied) continue;
          if (pick == atoms) {
            pick = i;
            if (options.tie_break == TieBreak::kLowestIndex) break;
          } else if (norms[i] < norms[pick]) {
            pick = i;
          }
        }
        if (pick == atoms) {
          bad[node] = 1;
          pick = 0;
        }
        chosen[node] = pick;
        const double updated = v + dt * (best + 0.5 * lap);
        V.at(j, node) = updated;
        if (!std::isfinite(updated)) bad[node] = 1;
      }
    }
    for (std::size_t node = 0; node < nodes; ++node) {
      if (bad[node]) {
        std::vector<double> x(d);
        space.node_point(node, x);
        throw NumericalError("solve_hjb: non-finite value at " + detail::describe_point(t, x));
      }
    }
    for (std::size_t node = 0; node < nodes; ++node) {
      const std::size_t src = space.on_boundary(node) ? space.interior_neighbor(node) : node;
      if (src != node) V.at(j, node) = V.at(j, src);
      const auto a = actions.atom(chosen[src]);
      std::copy(a.begin(), a.end(), policy.begin() + static_cast<std::ptrdiff_t>((j * nodes + node) * k));
    }
  }
  sol.control = ControlField::pure(time, space, k, std::move(policy));
  sol.control.set_name("hjb_feedback");
  return sol;
}

struct PayoffEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo J(alpha; m) = E[int f dt + g] over frozen-flow paths.
inline PayoffEstimate evaluate_payoff(const GameSpec& game, const EmpiricalFlow& flow,
                                      const ControlField& control, const BrownianBundle& bundle) {
  const auto init = initial_samples(game, bundle);
  const auto run = simulate_frozen_flow_with_payoffs(game, control, flow, bundle, init, true);
  RunningMoments acc;
  for (double v : run.payoffs) acc.add(v);
  return {acc.mean(), acc.std_error(), acc.count()};
}

// Long-format CSV: time index, time, node coordinates, value.
inline void write_value_csv(std::ostream& os, const ValueField& v) {
  csv::Writer w(os);
  const std::size_t d = v.space().dim();
  std::vector<std::string> header{"time_index", "time"};
  for (std::size_t c = 0; c < d; ++c) header.push_back("x" + std::to_string(c));
  header.push_back("value");
  w.row(header);
  for (std::size_t j = 0; j < v.time_grid().points(); ++j) {
    for (std::size_t node = 0; node < v.space().nodes(); ++node) {
      std::vector<std::string> row{csv::number(j), csv::number(v.time_grid().time(j))};
      for (std::size_t c = 0; c < d; ++c) row.push_back(csv::number(v.space().coordinate(node, c)));
      row.push_back(csv::number(v.at(j, node)));
      w.row(row);
    }
  }
}

// Long-format CSV of a tabulated control: one column per action coordinate
// (pure) or per atom weight (relaxed).
inline void write_control_csv(std::ostream& os, const ControlField& c) {
  require(!c.is_analytic(), "write_control_csv: analytic feedbacks have no table");
  csv::Writer w(os);
  const std::size_t d = c.space().dim();
  std::vector<std::string> header{"time_index", "time"};
  for (std::size_t i = 0; i < d; ++i) header.push_back("x" + std::to_string(i));
  const std::size_t width = c.is_relaxed() ? c.atoms().size() : c.action_dim();
  for (std::size_t i = 0; i < width; ++i) {
    header.push_back((c.is_relaxed() ? "p" : "a") + std::to_string(i));
  }
  w.row(header);
  for (std::size_t j = 0; j < c.time_grid().steps(); ++j) {
    for (std::size_t node = 0; node < c.space().nodes(); ++node) {
      std::vector<std::string> row{csv::number(j), csv::number(c.time_grid().time(j))};
      for (std::size_t i = 0; i < d; ++i) row.push_back(csv::number(c.space().coordinate(node, i)));
      for (double v : c.entry(j, node)) row.push_back(csv::number(v));
      w.row(row);
    }
  }
}

}  // namespace mfg
