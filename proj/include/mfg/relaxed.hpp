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

// Relaxed (measure-valued) controls: chattering approximation by ordinary
// controls and strict selection for drifts affine in the action.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mfg/control.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/metrics.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

// Every (step, node) row carries the same probability vector.
inline ControlField constant_relaxed(TimeGrid time, SpatialGrid space, ActionGrid atoms,
                                     std::span<const double> probabilities) {
  require(probabilities.size() == atoms.size(), "constant_relaxed: one probability per atom");
  const std::size_t rows = time.steps() * space.nodes();
  std::vector<double> table(rows * atoms.size());
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(probabilities.begin(), probabilities.end(),
              table.begin() + static_cast<std::ptrdiff_t>(r * atoms.size()));
  }
  return ControlField::relaxed(time, std::move(space), std::move(atoms), std::move(table));
}

// Largest-remainder apportionment of n substeps; ties go to the lower atom.
inline std::vector<std::size_t> apportion(std::span<const double> p, std::size_t n) {
  const std::size_t a = p.size();
  std::vector<std::size_t> counts(a);
  std::vector<double> remainder(a);
  std::size_t used = 0;
  for (std::size_t i = 0; i < a; ++i) {
    const double share = p[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(share));
    remainder[i] = share - static_cast<double>(counts[i]);
    used += counts[i];
  }
  std::vector<std::size_t> order(a);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t r = 0; used < n && r < a; ++r, ++used) ++counts[order[r]];
  // Over-allocation can only come from rounding of rows summing to 1 + eps.
  for (std::size_t r = a; used > n && r-- > 0;) {
    if (counts[order[r]] > 0) {
      --counts[order[r]];
      --used;
    }
  }
  return counts;
}

// Atom order of n substeps with the given counts. Each substep goes to the
// atom furthest behind its proportional share, so every atom's cumulative
// use stays within one substep of c_i * s / n.
inline std::vector<std::size_t> chattering_schedule(std::span<const std::size_t> counts) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  std::vector<std::size_t> used(counts.size(), 0), out(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t best = counts.size();
    long long best_deficit = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (used[i] >= counts[i]) continue;
      const auto deficit = static_cast<long long>(counts[i] * (s + 1)) -
                           static_cast<long long>(n * used[i]);
      if (best == counts.size() || deficit > best_deficit) {
        best = i;
        best_deficit = deficit;
      }
    }
    out[s] = best;
    ++used[best];
  }
  return out;
}

struct ChatteringResult {
  ControlField control;               // pure, on the N-times refined grid
  std::size_t level = 0;              // substeps per original step
  std::size_t starved = 0;            // rows where an atom with p >= 1/(2 atoms) got nothing
  std::vector<std::string> warnings;  // first few starved rows
};

inline ChatteringResult chattering_approximation(const ControlField& relaxed, std::size_t level) {
  require(relaxed.is_relaxed() && !relaxed.is_analytic(),
          "chattering_approximation: needs a tabulated relaxed control");
  require(level >= 1, "chattering_approximation: level N must be >= 1");
  const TimeGrid& time = relaxed.time_grid();
  const SpatialGrid& space = relaxed.space();
  const ActionGrid& atoms = relaxed.atoms();
  const std::size_t a = atoms.size(), k = atoms.action_dim(), nodes = space.nodes();
  const TimeGrid fine(time.horizon(), time.steps() * level);
  std::vector<double> table(fine.steps() * nodes * k);
  ChatteringResult out;
  out.level = level;
  const double floor_p = 1.0 / (2.0 * static_cast<double>(a));
  for (std::size_t j = 0; j < time.steps(); ++j) {
    for (std::size_t v = 0; v < nodes; ++v) {
      const auto p = relaxed.entry(j, v);
      const auto counts = apportion(p, level);
      for (std::size_t i = 0; i < a; ++i) {
        if (p[i] >= floor_p && counts[i] == 0) {
          if (out.warnings.size() < 8) {
            out.warnings.push_back("chattering: atom " + std::to_string(i) + " with weight " +
                                   std::to_string(p[i]) + " gets no substep at step " +
                                   std::to_string(j) + ", node " + std::to_string(v) +
                                   "; raise N");
          }
          ++out.starved;
          break;
        }
      }
      const auto schedule = chattering_schedule(counts);
      for (std::size_t s = 0; s < level; ++s) {
        const auto atom = atoms.atom(schedule[s]);
        std::copy(atom.begin(), atom.end(),
                  table.begin() + static_cast<std::ptrdiff_t>(((j * level + s) * nodes + v) * k));
      }
    }
  }
  out.control = ControlField::pure(fine, space, k, std::move(table));
  out.control.set_name("chattering");
  return out;
}

namespace detail {

// Weighted (t, a) points of one node's occupation measure, L quadrature
// points per original step. Pure fields on a refined grid put mass dt / L on
// the action of the substep containing each point; relaxed fields spread it
// over their atoms.
inline void occupation_points(const ControlField& field, const TimeGrid& coarse, std::size_t node,
                              std::size_t per_step, double sign, std::vector<double>& coords,
                              std::vector<double>& mass) {
  const std::size_t k = field.action_dim();
  const double dt = coarse.dt() / static_cast<double>(per_step);
  const std::size_t refine = field.time_grid().steps() / coarse.steps();
  for (std::size_t j = 0; j < coarse.steps(); ++j) {
    for (std::size_t l = 0; l < per_step; ++l) {
      const double t = coarse.time(j) + (static_cast<double>(l) + 0.5) * dt;
      if (field.is_relaxed()) {
        const auto w = field.entry(j, node);
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (w[i] == 0.0) continue;
          coords.push_back(t);
          const auto atom = field.atoms().atom(i);
          coords.insert(coords.end(), atom.begin(), atom.end());
          mass.push_back(sign * w[i] * dt);
        }
      } else {
        const std::size_t sub = j * refine + l * refine / per_step;
        const auto act = field.entry(sub, node);
        coords.push_back(t);
        coords.insert(coords.end(), act.begin(), act.begin() + static_cast<std::ptrdiff_t>(k));
        mass.push_back(sign * dt);
      }
    }
  }
}

// W1 between two measures on the line given as one signed point set.
inline double signed_line_w1(std::vector<std::pair<double, double>>& pts) {
  std::sort(pts.begin(), pts.end());
  double cum = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    cum += pts[i].second;
    total += std::abs(cum) * (pts[i + 1].first - pts[i].first);
  }
  return total;
}

}  // namespace detail

// Sliced W1 between the (time, action) occupation measures of two controls on
// the same spatial grid, averaged over nodes. Either side may be relaxed or
// pure; pure fields may live on a refinement of the other's time grid.
inline double occupation_distance(const ControlField& x, const ControlField& y,
                                  std::size_t quadrature = 256,
                                  std::size_t directions = kDefaultSlices) {
  require(!x.is_analytic() && !y.is_analytic(), "occupation_distance: needs tabulated controls");
  require(x.space() == y.space(), "occupation_distance: spatial grids differ");
  require(x.action_dim() == y.action_dim(), "occupation_distance: action dimensions differ");
  const TimeGrid& gx = x.time_grid();
  const TimeGrid& gy = y.time_grid();
  require(gx.horizon() == gy.horizon(), "occupation_distance: horizons differ");
  const TimeGrid coarse = gx.steps() <= gy.steps() ? gx : gy;
  const std::size_t rx = gx.steps() / coarse.steps(), ry = gy.steps() / coarse.steps();
  require(rx * coarse.steps() == gx.steps() && ry * coarse.steps() == gy.steps(),
          "occupation_distance: one time grid must refine the other");
  require(!(x.is_relaxed() && rx > 1) && !(y.is_relaxed() && ry > 1),
          "occupation_distance: relaxed fields must sit on the coarser grid");
  // Quadrature points per coarse step: a multiple of both refinements.
  const std::size_t r = std::lcm(rx, ry);
  const std::size_t per_step = r * std::max<std::size_t>(1, (quadrature + r - 1) / r);
  const std::size_t dim = 1 + x.action_dim();
  const auto dirs = slice_directions(dim, directions);
  const std::size_t nodes = x.space().nodes();
  std::vector<double> per_node(nodes);
  parallel_for(nodes, [&](std::size_t v) {
    std::vector<double> coords, mass;
    detail::occupation_points(x, coarse, v, per_step, 1.0, coords, mass);
    detail::occupation_points(y, coarse, v, per_step, -1.0, coords, mass);
    std::vector<std::pair<double, double>> line(mass.size());
    double sum = 0.0;
    for (std::size_t s = 0; s < directions; ++s) {
      const double* u = &dirs[s * dim];
      for (std::size_t i = 0; i < mass.size(); ++i) {
        double proj = 0.0;
        for (std::size_t c = 0; c < dim; ++c) proj += u[c] * coords[i * dim + c];
        line[i] = {proj, mass[i]};
      }
      sum += detail::signed_line_w1(line);
    }
    per_node[v] = sum / static_cast<double>(directions);
  });
  return std::accumulate(per_node.begin(), per_node.end(), 0.0) / static_cast<double>(nodes);
}

// Test integral of t^p * a_0^q against one node's occupation measure, exact
// for piecewise-constant fields.
inline double occupation_moment(const ControlField& field, std::size_t node, unsigned p,
                                unsigned q) {
  require(!field.is_analytic(), "occupation_moment: needs a tabulated control");
  const TimeGrid& g = field.time_grid();
  const double pp = static_cast<double>(p) + 1.0;
  double total = 0.0;
  for (std::size_t j = 0; j < g.steps(); ++j) {
    const double time_part = (std::pow(g.time(j + 1), pp) - std::pow(g.time(j), pp)) / pp;
    double action_part = 0.0;
    if (field.is_relaxed()) {
      const auto w = field.entry(j, node);
      for (std::size_t i = 0; i < w.size(); ++i) {
        action_part += w[i] * std::pow(field.atoms().atom(i)[0], static_cast<double>(q));
      }
    } else {
      action_part = std::pow(field.entry(j, node)[0], static_cast<double>(q));
    }
    total += time_part * action_part;
  }
  return total;
}

struct SelectionOptions {
  std::size_t action_count = 201;  // candidate lattice per action axis
  double drift_tolerance = 1e-9;   // candidates within this of the best drift match
  double reward_tolerance = 1e-9;  // slack before a node counts as a violation
  bool allow_approximate = false;  // accept drifts that are not affine in a
};

struct SelectionReport {
  double max_drift_mismatch = 0.0;
  std::size_t violations = 0;  // nodes with f(selected) < relaxed mean f - tolerance
  std::size_t nodes = 0;
  double worst_reward_gap = 0.0;  // max of relaxed mean f - f(selected)
  bool approximate = false;
};

struct SelectionResult {
  ControlField control;
  SelectionReport report;
};

// Per (step, node): the candidate action whose drift is closest to the
// relaxed mean drift, breaking near-ties by the largest running reward and
// then by the lowest lattice index.
inline SelectionResult strict_selection(const GameSpec& game, const ControlField& relaxed,
                                        const EmpiricalFlow& flow,
                                        const SelectionOptions& options = {}) {
  require(relaxed.is_relaxed() && !relaxed.is_analytic(),
          "strict_selection: needs a tabulated relaxed control");
  if (!game.drift_affine_in_a && !options.allow_approximate) {
    throw InvalidArgument("strict_selection: game '" + game.name +
                          "' is not flagged affine in the action; set allow_approximate for a "
                          "best-effort selection");
  }
  relaxed.check_time_grid(flow.grid());
  require(relaxed.space().dim() == game.state_dim && flow.dim() == game.state_dim,
          "strict_selection: state dimension mismatch");
  const TimeGrid& time = relaxed.time_grid();
  const SpatialGrid& space = relaxed.space();
  const ActionGrid& atoms = relaxed.atoms();
  const ActionGrid candidates = ActionGrid::uniform(game.actions, options.action_count);
  const std::size_t d = game.state_dim, k = game.action_dim(), nodes = space.nodes();
  const auto stats = flow.all_stats(game.stats);

  std::vector<double> table(time.steps() * nodes * k);
  std::vector<double> mismatch(time.steps() * nodes), gap(time.steps() * nodes);
  parallel_for(time.steps() * nodes, [&](std::size_t row) {
    const std::size_t j = row / nodes, v = row % nodes;
    const double t = time.time(j);
    const MeasureStats& m = stats[j];
    std::vector<double> x(d), b(d), target(d, 0.0);
    space.node_point(v, x);
    const auto w = relaxed.entry(j, v);
    double mean_f = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      game.drift(t, x, m, atoms.atom(i), b);
      for (std::size_t c = 0; c < d; ++c) target[c] += w[i] * b[c];
      mean_f += w[i] * game.running(t, x, m, atoms.atom(i));
    }
    std::vector<double> miss(candidates.size());
    double best_miss = INFINITY;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      game.drift(t, x, m, candidates.atom(i), b);
      double e = 0.0;
      for (std::size_t c = 0; c < d; ++c) e += (b[c] - target[c]) * (b[c] - target[c]);
      miss[i] = std::sqrt(e);
      best_miss = std::min(best_miss, miss[i]);
    }
    std::size_t pick = candidates.size();
    double best_f = -INFINITY;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (miss[i] > best_miss + options.drift_tolerance) continue;
      const double f = game.running(t, x, m, candidates.atom(i));
      if (f > best_f) {
        best_f = f;
        pick = i;
      }
    }
    const auto a = candidates.atom(pick);
    std::copy(a.begin(), a.end(), table.begin() + static_cast<std::ptrdiff_t>(row * k));
    mismatch[row] = miss[pick];
    gap[row] = mean_f - best_f;
  });

  SelectionResult out{ControlField::pure(time, space, k, std::move(table)), {}};
  out.control.set_name("strict_selection");
  out.report.nodes = mismatch.size();
  out.report.approximate = !game.drift_affine_in_a;
  out.report.worst_reward_gap = -INFINITY;
  for (std::size_t row = 0; row < mismatch.size(); ++row) {
    out.report.max_drift_mismatch = std::max(out.report.max_drift_mismatch, mismatch[row]);
    out.report.worst_reward_gap = std::max(out.report.worst_reward_gap, gap[row]);
    if (gap[row] > options.reward_tolerance) ++out.report.violations;
  }
  return out;
}

}  // namespace mfg
