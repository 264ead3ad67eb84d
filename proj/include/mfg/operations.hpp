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

// Single-shot operations dispatched from a config: one simulation, one HJB
// solve, or one Picard fixed point, with their artifacts in a report.

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>

#include "mfg/scenarios.hpp"

namespace mfg::operation {

struct SimulateParams {
  double dt = 0.01;
  std::size_t n = 1000;
  ControlField feedback = ControlField::constant({0.0});
  bool write_paths = false;
};

// n-player run under one shared feedback: mean path, terminal statistics,
// payoffs, optionally every path.
inline ScenarioReport run_simulate(const GameSpec& game, const SimulateParams& p,
                                   std::uint64_t seed) {
  const TimeGrid grid = scenario::grid_for(game.horizon, p.dt);
  const auto profile = ControlProfile::uniform(p.feedback, p.n);
  const auto bundle = sample_brownian(seed, p.n, grid, game.state_dim);
  auto run = simulate_nplayer_with_payoffs(game, profile, bundle, initial_samples(game, bundle));
  ScenarioReport r;
  r.scenario = "simulate";
  r.seed = seed;
  r.columns = {"time_index", "time", "mean0"};
  const auto flow = std::move(run.ensemble).flow();
  const auto path = mean_path(flow);
  for (std::size_t j = 0; j < grid.points(); ++j) {
    r.add_row({csv::number(j), csv::number(grid.time(j)), csv::number(path[j * game.state_dim])});
  }
  RunningMoments payoff;
  for (double v : run.payoffs) payoff.add(v);
  const auto last = flow.stats(grid.steps(), {.variance = true});
  r.add_check("terminal mean", last.mean[0], -scenario::kInf, scenario::kInf, 0.0, false);
  r.add_check("terminal variance", last.variance[0], 0.0, scenario::kInf, 0.0, false);
  r.add_check("average payoff", payoff.mean(), -scenario::kInf, scenario::kInf, payoff.std_error(),
              false);
  if (p.write_paths) {
    std::ostringstream os;
    write_flow_csv(os, flow);
    r.files["paths.csv"] = os.str();
  }
  std::vector<double> mean0(grid.points());
  for (std::size_t j = 0; j < mean0.size(); ++j) mean0[j] = path[j * game.state_dim];
  r.files["mean_path.svg"] = scenario::plot({{"mean", scenario::grid_times(grid), mean0}},
                                            {"Empirical mean", "t", "mean", false, 640, 400});
  return r;
}

struct SolveHjbParams {
  double dt = 0.005;
  double spatial_step = 0.1;
  std::size_t action_count = 21;
  double tie_tolerance = 0.0;
  double flow_velocity = 0.0;  // frozen flow: lambda shifted by velocity * t plus noise
  std::size_t flow_particles = 2000;
};

inline ScenarioReport run_solve_hjb(const GameSpec& game, const SolveHjbParams& p,
                                    std::uint64_t seed) {
  const TimeGrid grid = scenario::grid_for(game.horizon, p.dt);
  const SpatialGrid space = scenario::checked_space(game, grid, p.spatial_step);
  const auto flow = drifted_flow(game, p.flow_velocity, p.flow_particles, grid, seed);
  HjbOptions o;
  o.tie_tolerance = p.tie_tolerance;
  o.tie_break = p.tie_tolerance > 0.0 ? TieBreak::kMinimalNorm : TieBreak::kLowestIndex;
  const auto sol = solve_hjb(game, flow, space, ActionGrid::uniform(game.actions, p.action_count), o);
  ScenarioReport r;
  r.scenario = "solve_hjb";
  r.seed = seed;
  r.columns = {"quantity", "value"};
  std::vector<double> x0(game.state_dim);
  for (std::size_t c = 0; c < x0.size(); ++c) x0[c] = game.initial.mean()[c];
  const double v0 = sol.value.at(0, space.nearest(x0));
  r.add_row({"value_at_initial_mean", csv::number(v0)});
  r.add_row({"spatial_nodes", csv::number(space.nodes())});
  r.add_check("V(0, initial mean)", v0, -scenario::kInf, scenario::kInf, 0.0, false);
  std::ostringstream v, c;
  write_value_csv(v, sol.value);
  write_control_csv(c, sol.control);
  r.files["value.csv"] = v.str();
  r.files["control.csv"] = c.str();
  return r;
}

struct PicardOpParams {
  scenario::PicardParams picard;
  double velocity = 0.0;
};

inline ScenarioReport run_picard(const GameSpec& game, const PicardOpParams& p, std::uint64_t seed) {
  const TimeGrid grid = scenario::grid_for(game.horizon, p.picard.dt);
  const SpatialGrid space = scenario::checked_space(game, grid, p.picard.spatial_step);
  const auto init = drifted_flow(game, p.velocity, p.picard.particles, grid, rng::derive_seed(seed, 1));
  const auto res = picard_mfe(game, init, scenario::picard_options(p.picard, space, seed));
  ScenarioReport r;
  r.scenario = "picard_mfe";
  r.seed = seed;
  r.columns = {"iteration", "residual", "mean_endpoint"};
  for (const auto& h : res.history) {
    r.add_row({csv::number(h.iteration), csv::number(h.residual), csv::number(h.mean_endpoint)});
  }
  r.add_check("converged", res.converged ? 1.0 : 0.0, 1.0, 1.0);
  r.add_check("terminal mean", mean_path(res.flow)[grid.steps() * game.state_dim],
              -scenario::kInf, scenario::kInf, 0.0, false);
  std::ostringstream c;
  write_control_csv(c, res.control);
  r.files["control.csv"] = c.str();
  return r;
}

}  // namespace mfg::operation
