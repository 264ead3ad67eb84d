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

// JSON run configs: defaults per scenario / operation, validation with
// path-to-field messages, dotted-path overrides, the catalog registry, and
// dispatch. The resolved config (defaults filled in) is what gets hashed and
// echoed next to the outputs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfg/catalog.hpp"
#include "mfg/errors.hpp"
#include "mfg/operations.hpp"
#include "mfg/report.hpp"
#include "mfg/scenarios.hpp"

namespace mfg::config {

using json = nlohmann::json;

// A schema violation, carrying the dotted path of the offending field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : InvalidArgument("config." + path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

template <class Map>
std::vector<std::string> keys_of(const Map& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m) out.push_back(k);
  return out;
}

// ------------------------------------------------------------------ games

struct GameEntry {
  std::string description;
  json defaults;  // parameters, without "name"
  std::function<GameSpec(const json&)> build;
};

inline std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

inline const std::map<std::string, GameEntry>& games() {
  static const std::map<std::string, GameEntry> registry = [] {
    std::map<std::string, GameEntry> g;
    g["sign_drift"] = {"b = a, f = 0, g = x * mean, A = [-1, 1], start at 0",
                       {{"horizon", 1.0}},
                       [](const json& p) { return catalog::sign_drift(p["horizon"].get<double>()); }};
    g["monotone_lq"] = {"b = a, f = -a^2/2, g = -x * mean, A = [-1, 1], start at 0",
                        {{"horizon", 1.0}},
                        [](const json& p) { return catalog::monotone_lq(p["horizon"].get<double>()); }};
    g["mean_drift"] = {"uncontrolled dX = B(mean) dt + dW, B in {none, linear, sign, sqrt}",
                       {{"shape", "linear"}, {"gain", -1.0}, {"start", 1.0}, {"horizon", 1.0}},
                       [](const json& p) {
                         return catalog::mean_drift(
                             catalog::mean_drift_from(p["shape"].get<std::string>()),
                             p["gain"].get<double>(), p["start"].get<double>(),
                             p["horizon"].get<double>());
                       }};
    g["target"] = {"b = a, f = 0, g = -(x - target)^2",
                   {{"target", 1.0}, {"horizon", 1.0}},
                   [](const json& p) {
                     return catalog::target(p["target"].get<double>(), p["horizon"].get<double>());
                   }};
    g["crowd_aversion"] = {"b = a, f = -a^2/2 - weight * density(x), Gaussian start",
                           {{"weight", 1.0}, {"horizon", 1.0}},
                           [](const json& p) {
                             return catalog::crowd_aversion(p["weight"].get<double>(),
                                                            p["horizon"].get<double>());
                           }};
    const catalog::AffinePolyParams a;
    g["affine_poly"] = {
        "general family: b affine in (x, a) plus B(mean), f and g quadratic",
        {{"dim", a.dim}, {"horizon", a.horizon}, {"action_lo", a.action_lo},
         {"action_hi", a.action_hi}, {"state_radius", a.state_radius},
         {"initial_kind", "point_mass"}, {"initial_location", 0.0}, {"initial_scale", 0.0},
         {"b0", a.b0}, {"bx", a.bx}, {"ba", a.ba}, {"mean_shape", "none"},
         {"mean_gain", a.mean_gain}, {"f0", a.f0}, {"fxx", a.fxx}, {"fxm", a.fxm}, {"fx", a.fx},
         {"fmm", a.fmm}, {"fvar", a.fvar}, {"faa", a.faa}, {"fa", a.fa}, {"fxa", a.fxa},
         {"fdens", a.fdens}, {"density_bins", a.density_bins}, {"g0", a.g0}, {"gxx", a.gxx},
         {"gxm", a.gxm}, {"gx", a.gx}, {"gmm", a.gmm}, {"gvar", a.gvar}},
        [](const json& p) {
          catalog::AffinePolyParams q;
          q.dim = p["dim"].get<std::size_t>();
          q.horizon = p["horizon"].get<double>();
          q.action_lo = p["action_lo"].get<double>();
          q.action_hi = p["action_hi"].get<double>();
          q.state_radius = p["state_radius"].get<double>();
          const std::string kind = p["initial_kind"].get<std::string>();
          const double loc = p["initial_location"].get<double>();
          const double sc = p["initial_scale"].get<double>();
          if (kind == "point_mass") {
            q.initial = InitialLaw::point_mass({loc});
          } else if (kind == "gaussian") {
            q.initial = InitialLaw::gaussian({loc}, {sc});
          } else if (kind == "uniform") {
            q.initial = InitialLaw::uniform({loc}, {sc});
          } else {
            throw ConfigError("game.initial_kind", "unknown law '" + kind +
                                                       "' (known: gaussian, point_mass, uniform)");
          }
          q.b0 = p["b0"].get<double>();
          q.bx = p["bx"].get<double>();
          q.ba = p["ba"].get<double>();
          q.mean_shape = catalog::mean_drift_from(p["mean_shape"].get<std::string>());
          q.mean_gain = p["mean_gain"].get<double>();
          for (auto [key, field] : std::initializer_list<std::pair<const char*, double*>>{
                   {"f0", &q.f0}, {"fxx", &q.fxx}, {"fxm", &q.fxm}, {"fx", &q.fx},
                   {"fmm", &q.fmm}, {"fvar", &q.fvar}, {"faa", &q.faa}, {"fa", &q.fa},
                   {"fxa", &q.fxa}, {"fdens", &q.fdens}, {"g0", &q.g0}, {"gxx", &q.gxx},
                   {"gxm", &q.gxm}, {"gx", &q.gx}, {"gmm", &q.gmm}, {"gvar", &q.gvar}}) {
            *field = p[key].get<double>();
          }
          q.density_bins = p["density_bins"].get<std::size_t>();
          return catalog::affine_poly(q, "affine_poly");
        }};
    return g;
  }();
  return registry;
}

inline json game_defaults(const std::string& name, const std::string& path = "game.name") {
  const auto it = games().find(name);
  if (it == games().end()) {
    throw ConfigError(path, "unknown game '" + name + "' (known: " + join(keys_of(games())) + ")");
  }
  json out = it->second.defaults;
  out["name"] = name;
  return out;
}

inline GameSpec build_game(const json& game) {
  const std::string name = game["name"].get<std::string>();
  GameSpec spec = games().at(name).build(game);
  spec.validate();
  return spec;
}

// -------------------------------------------------------------- feedbacks

struct FeedbackEntry {
  std::string description;
  json defaults;
  std::function<ControlField(const json&)> build;
};

inline const std::map<std::string, FeedbackEntry>& feedbacks() {
  static const std::map<std::string, FeedbackEntry> registry = [] {
    std::map<std::string, FeedbackEntry> f;
    f["constant"] = {"a = action",
                     {{"action", 0.0}},
                     [](const json& p) { return ControlField::constant({p["action"].get<double>()}); }};
    f["linear"] = {"a = clip(gain x + offset, lo, hi)",
                   {{"gain", -1.0}, {"offset", 0.0}, {"lo", -1.0}, {"hi", 1.0}},
                   [](const json& p) {
                     return catalog::linear_feedback(p["gain"].get<double>(), p["offset"].get<double>(),
                                                     p["lo"].get<double>(), p["hi"].get<double>());
                   }};
    f["sign_of_mean"] = {"a = sgn(mean) for t > switch_time, 0 before",
                         {{"switch_time", 0.0}},
                         [](const json& p) {
                           return ControlField::sign_of_mean(p["switch_time"].get<double>());
                         }};
    return f;
  }();
  return registry;
}

// -------------------------------------------------------------- scenarios

struct RunEntry {
  std::string description;
  bool has_game = true;
  std::vector<std::string> allowed_games;  // empty: any catalog game
  std::string default_game;
  json grids;
  json params;
  std::function<ScenarioReport(const json& resolved, std::uint64_t seed)> run;
};

inline scenario::PicardParams picard_from(const json& c) {
  scenario::PicardParams p;
  p.dt = c["grids"]["dt"].get<double>();
  p.spatial_step = c["grids"]["spatial_step"].get<double>();
  p.action_count = c["grids"]["action_count"].get<std::size_t>();
  const json& q = c["params"];
  p.particles = q["particles"].get<std::size_t>();
  p.tie_tolerance = q["tie_tolerance"].get<double>();
  p.damping = q["damping"].get<double>();
  p.max_iterations = q["max_iterations"].get<std::size_t>();
  p.tolerance = q["tolerance"].get<double>();
  return p;
}

inline json picard_grids(const scenario::PicardParams& p) {
  return {{"dt", p.dt}, {"spatial_step", p.spatial_step}, {"action_count", p.action_count}};
}

inline json picard_params(const scenario::PicardParams& p) {
  return {{"particles", p.particles}, {"tie_tolerance", p.tie_tolerance}, {"damping", p.damping},
          {"max_iterations", p.max_iterations}, {"tolerance", p.tolerance}};
}

inline std::vector<std::size_t> sizes(const json& j) { return j.get<std::vector<std::size_t>>(); }

inline const std::map<std::string, RunEntry>& scenarios() {
  static const std::map<std::string, RunEntry> registry = [] {
    std::map<std::string, RunEntry> s;
    {
      const scenario::SignDriftParams d;
      s["sign_drift"] = {
          "n players using sgn(mean) after t0: mixture limit, E[mean_T^2] = T^2",
          true, {"sign_drift"}, "sign_drift",
          {{"dt", d.dt}},
          {{"n", d.n}, {"reps", d.reps}, {"t0", d.t0}, {"band", d.band},
           {"plotted_paths", d.plotted_paths}},
          [](const json& c, std::uint64_t seed) {
            scenario::SignDriftParams p;
            p.horizon = c["game"]["horizon"].get<double>();
            p.dt = c["grids"]["dt"].get<double>();
            p.n = sizes(c["params"]["n"]);
            p.reps = c["params"]["reps"].get<std::size_t>();
            p.t0 = c["params"]["t0"].get<double>();
            p.band = c["params"]["band"].get<double>();
            p.plotted_paths = c["params"]["plotted_paths"].get<std::size_t>();
            return scenario::run_sign_drift(p, seed);
          }};
    }
    {
      const scenario::MeanDriftParams d;
      s["mean_drift"] = {
          "uncontrolled mean-field drift: ODE tracking (Lipschitz) or basin split (sign, sqrt)",
          true, {"mean_drift"}, "mean_drift",
          {{"dt", d.dt}},
          {{"n", d.n}, {"reps", d.reps}, {"band", d.band}},
          [](const json& c, std::uint64_t seed) {
            scenario::MeanDriftParams p;
            const json& g = c["game"];
            p.shape = g["shape"].get<std::string>();
            p.gain = g["gain"].get<double>();
            p.start = g["start"].get<double>();
            p.horizon = g["horizon"].get<double>();
            p.dt = c["grids"]["dt"].get<double>();
            p.n = sizes(c["params"]["n"]);
            p.reps = c["params"]["reps"].get<std::size_t>();
            p.band = c["params"]["band"].get<double>();
            return scenario::run_mean_drift(p, seed);
          }};
    }
    {
      const scenario::ThreeMfeParams d;
      json params = picard_params(d.picard);
      params["velocities"] = d.velocities;
      params["target_means"] = d.target_means;
      params["band"] = d.band;
      params["certify_factor"] = d.certify_factor;
      s["three_mfe"] = {
          "Picard fixed points of the sign game from mean paths +t, 0, -t",
          true, {"sign_drift"}, "sign_drift", picard_grids(d.picard), params,
          [](const json& c, std::uint64_t seed) {
            scenario::ThreeMfeParams p;
            p.horizon = c["game"]["horizon"].get<double>();
            p.picard = picard_from(c);
            p.velocities = numbers(c["params"]["velocities"]);
            p.target_means = numbers(c["params"]["target_means"]);
            p.band = c["params"]["band"].get<double>();
            p.certify_factor = c["params"]["certify_factor"].get<double>();
            return scenario::run_three_mfe(p, seed);
          }};
    }
    {
      const scenario::MonotoneParams d;
      json params = picard_params(d.picard);
      params["velocities"] = d.velocities;
      params["trials"] = d.trials;
      params["n"] = d.n;
      params["reps"] = d.reps;
      params["cluster_tolerance"] = d.cluster_tolerance;
      params["flow_tolerance"] = d.flow_tolerance;
      s["monotone_uniqueness"] = {
          "monotonicity check, Picard from five starts, n-player flows near the fixed point",
          true, {}, "monotone_lq", picard_grids(d.picard), params,
          [](const json& c, std::uint64_t seed) {
            scenario::MonotoneParams p;
            p.picard = picard_from(c);
            const json& q = c["params"];
            p.velocities = numbers(q["velocities"]);
            p.trials = q["trials"].get<std::size_t>();
            p.n = sizes(q["n"]);
            p.reps = q["reps"].get<std::size_t>();
            p.cluster_tolerance = q["cluster_tolerance"].get<double>();
            p.flow_tolerance = q["flow_tolerance"].get<double>();
            return scenario::run_monotone_uniqueness(build_game(c["game"]), p, seed);
          }};
    }
    {
      const scenario::ExploitabilityParams d;
      json params = picard_params(d.picard);
      params["velocity"] = d.velocity;
      params["n"] = d.n;
      params["reps"] = d.reps;
      params["bound_fraction"] = d.bound_fraction;
      s["exploitability"] = {
          "epsilon-hat(n): one player's gain from the grid best response to the fixed point",
          true, {}, "sign_drift", picard_grids(d.picard), params,
          [](const json& c, std::uint64_t seed) {
            scenario::ExploitabilityParams p;
            p.picard = picard_from(c);
            const json& q = c["params"];
            p.velocity = q["velocity"].get<double>();
            p.n = sizes(q["n"]);
            p.reps = q["reps"].get<std::size_t>();
            p.bound_fraction = q["bound_fraction"].get<double>();
            return scenario::run_exploitability(build_game(c["game"]), p, seed);
          }};
    }
    {
      const scenario::GirsanovParams d;
      s["girsanov"] = {
          "Girsanov weights in the sign game: mean one, 1/n variance, entropy below 2T/n",
          true, {"sign_drift"}, "sign_drift",
          {{"dt", d.horizon / static_cast<double>(d.steps)}},
          {{"n", d.n}, {"reps", d.reps}},
          [](const json& c, std::uint64_t seed) {
            scenario::GirsanovParams p;
            p.horizon = c["game"]["horizon"].get<double>();
            p.steps = scenario::grid_for(p.horizon, c["grids"]["dt"].get<double>()).steps();
            p.n = sizes(c["params"]["n"]);
            p.reps = c["params"]["reps"].get<std::size_t>();
            return scenario::run_girsanov(p, seed);
          }};
    }
    {
      const scenario::ProjectionParams d;
      s["markov_projection"] = {
          "binned conditional drift of X = gamma t + W and its mimicking diffusion",
          false, {}, "",
          {{"dt", d.horizon / static_cast<double>(d.steps)}},
          {{"n", d.n}, {"horizon", d.horizon}, {"check_time", d.check_time},
           {"bin_lo", d.bin_lo}, {"bin_hi", d.bin_hi}, {"bins", d.bins},
           {"min_count", d.min_count}, {"check_count", d.check_count},
           {"drift_tolerance", d.drift_tolerance}, {"w1_tolerance", d.w1_tolerance},
           {"delay", d.delay}},
          [](const json& c, std::uint64_t seed) {
            scenario::ProjectionParams p;
            const json& q = c["params"];
            p.n = q["n"].get<std::size_t>();
            p.horizon = q["horizon"].get<double>();
            p.steps = scenario::grid_for(p.horizon, c["grids"]["dt"].get<double>()).steps();
            p.check_time = q["check_time"].get<double>();
            p.bin_lo = q["bin_lo"].get<double>();
            p.bin_hi = q["bin_hi"].get<double>();
            p.bins = q["bins"].get<std::size_t>();
            p.min_count = q["min_count"].get<std::size_t>();
            p.check_count = q["check_count"].get<std::size_t>();
            p.drift_tolerance = q["drift_tolerance"].get<double>();
            p.w1_tolerance = q["w1_tolerance"].get<double>();
            p.delay = q["delay"].get<double>();
            return scenario::run_markov_projection(p, seed);
          }};
    }
    {
      const scenario::RelaxedParams d;
      s["relaxed"] = {
          "chattering approximation rate and strict selection on the catalog games",
          false, {}, "",
          {{"dt", d.dt}, {"selection_actions", d.selection_actions}},
          {{"levels", d.levels}, {"probabilities", d.probabilities}, {"steps", d.steps},
           {"particles", d.particles}, {"eval_particles", d.eval_particles},
           {"payoff_tolerance", d.payoff_tolerance}},
          [](const json& c, std::uint64_t seed) {
            scenario::RelaxedParams p;
            const json& q = c["params"];
            p.dt = c["grids"]["dt"].get<double>();
            p.selection_actions = c["grids"]["selection_actions"].get<std::size_t>();
            p.levels = sizes(q["levels"]);
            p.probabilities = numbers(q["probabilities"]);
            p.steps = q["steps"].get<std::size_t>();
            p.particles = q["particles"].get<std::size_t>();
            p.eval_particles = q["eval_particles"].get<std::size_t>();
            p.payoff_tolerance = q["payoff_tolerance"].get<double>();
            return scenario::run_relaxed(p, seed);
          }};
    }
    return s;
  }();
  return registry;
}

inline const std::map<std::string, RunEntry>& operations() {
  static const std::map<std::string, RunEntry> registry = [] {
    std::map<std::string, RunEntry> s;
    {
      const operation::SimulateParams d;
      s["simulate"] = {
          "n-player simulation under one catalog feedback",
          true, {}, "sign_drift",
          {{"dt", d.dt}},
          {{"n", d.n}, {"write_paths", d.write_paths},
           {"feedback", {{"name", "sign_of_mean"}, {"switch_time", 0.0}}}},
          [](const json& c, std::uint64_t seed) {
            operation::SimulateParams p;
            p.dt = c["grids"]["dt"].get<double>();
            p.n = c["params"]["n"].get<std::size_t>();
            p.write_paths = c["params"]["write_paths"].get<bool>();
            const json& f = c["params"]["feedback"];
            p.feedback = feedbacks().at(f["name"].get<std::string>()).build(f);
            return operation::run_simulate(build_game(c["game"]), p, seed);
          }};
    }
    {
      const operation::SolveHjbParams d;
      s["solve_hjb"] = {
          "HJB best response to a drifted frozen flow",
          true, {}, "sign_drift",
          {{"dt", d.dt}, {"spatial_step", d.spatial_step}, {"action_count", d.action_count}},
          {{"tie_tolerance", d.tie_tolerance}, {"flow_velocity", d.flow_velocity},
           {"flow_particles", d.flow_particles}},
          [](const json& c, std::uint64_t seed) {
            operation::SolveHjbParams p;
            p.dt = c["grids"]["dt"].get<double>();
            p.spatial_step = c["grids"]["spatial_step"].get<double>();
            p.action_count = c["grids"]["action_count"].get<std::size_t>();
            p.tie_tolerance = c["params"]["tie_tolerance"].get<double>();
            p.flow_velocity = c["params"]["flow_velocity"].get<double>();
            p.flow_particles = c["params"]["flow_particles"].get<std::size_t>();
            return operation::run_solve_hjb(build_game(c["game"]), p, seed);
          }};
    }
    {
      const scenario::PicardParams d;
      json params = picard_params(d);
      params["velocity"] = 0.0;
      s["picard_mfe"] = {
          "one damped Picard fixed point from a drifted initial flow",
          true, {}, "monotone_lq", picard_grids(d), params,
          [](const json& c, std::uint64_t seed) {
            operation::PicardOpParams p;
            p.picard = picard_from(c);
            p.velocity = c["params"]["velocity"].get<double>();
            return operation::run_picard(build_game(c["game"]), p, seed);
          }};
    }
    return s;
  }();
  return registry;
}

// -------------------------------------------------------------- resolution

inline std::string type_name(const json& j) {
  if (j.is_number_unsigned()) return "a nonnegative integer";
  if (j.is_number()) return "a number";
  if (j.is_boolean()) return "a boolean";
  if (j.is_string()) return "a string";
  if (j.is_array()) return "an array";
  if (j.is_object()) return "an object";
  return "null";
}

inline bool same_kind(const json& def, const json& value) {
  if (def.is_number_unsigned()) return value.is_number_unsigned();
  if (def.is_number()) return value.is_number();
  if (def.is_boolean()) return value.is_boolean();
  if (def.is_string()) return value.is_string();
  if (def.is_array()) return value.is_array();
  if (def.is_object()) return value.is_object();
  return true;
}

// Overlays `user` on `defaults`; every user field must exist in the defaults
// with a compatible type.
inline void overlay(json& defaults, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path, "expected an object, got " + type_name(user));
  for (const auto& [key, value] : user.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!defaults.contains(key)) {
      std::vector<std::string> known;
      for (const auto& [k, v] : defaults.items()) known.push_back(k);
      throw ConfigError(here, "unknown field (known: " + join(known) + ")");
    }
    json& slot = defaults[key];
    if (slot.is_object()) {
      overlay(slot, value, here);
      continue;
    }
    if (!same_kind(slot, value)) {
      throw ConfigError(here, "expected " + type_name(slot) + ", got " + type_name(value));
    }
    if (slot.is_array() && !slot.empty()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (!same_kind(slot.front(), value[i])) {
          throw ConfigError(here + "[" + std::to_string(i) + "]",
                            "expected " + type_name(slot.front()) + ", got " + type_name(value[i]));
        }
      }
    }
    slot = value;
  }
}

// Applies "a.b.c=value"; the value is parsed as JSON when possible, else
// taken as a string.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("--set expects key=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw InvalidArgument("--set: empty path segment in '" + path + "'");
    if (!node->is_object()) throw ConfigError(path.substr(0, start ? start - 1 : 0), "not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

struct Resolved {
  json config;
  const RunEntry* entry = nullptr;
};

inline Resolved resolve(const json& user) {
  if (!user.is_object()) throw ConfigError("", "the config must be a JSON object");
  const bool has_s = user.contains("scenario"), has_o = user.contains("operation");
  if (has_s == has_o) {
    throw ConfigError(has_s ? "operation" : "scenario",
                      "exactly one of 'scenario' or 'operation' is required");
  }
  const std::string kind = has_s ? "scenario" : "operation";
  if (!user[kind].is_string()) throw ConfigError(kind, "expected a string, got " + type_name(user[kind]));
  const std::string name = user[kind].get<std::string>();
  const auto& registry = has_s ? scenarios() : operations();
  const auto it = registry.find(name);
  if (it == registry.end()) {
    throw ConfigError(kind, "unknown " + kind + " '" + name + "' (known: " + join(keys_of(registry)) + ")");
  }
  const RunEntry& e = it->second;

  json d = json::object();
  d[kind] = name;
  if (e.has_game) {
    std::string game = e.default_game;
    if (user.contains("game") && user["game"].is_object() && user["game"].contains("name")) {
      if (!user["game"]["name"].is_string()) throw ConfigError("game.name", "expected a string");
      game = user["game"]["name"].get<std::string>();
      game_defaults(game);  // unknown names list the catalog
      if (!e.allowed_games.empty() &&
          std::find(e.allowed_games.begin(), e.allowed_games.end(), game) == e.allowed_games.end()) {
        throw ConfigError("game.name", "'" + game + "' is not supported by " + name +
                                           " (supported: " + join(e.allowed_games) + ")");
      }
    }
    d["game"] = game_defaults(game);
  }
  d["grids"] = e.grids;
  d["params"] = e.params;
  d["seeds"] = {{"seed", 1}};
  d["output"] = {{"dir", "out/" + name}};
  if (user.contains("params") && user["params"].is_object() && user["params"].contains("feedback") &&
      d["params"].contains("feedback")) {
    const json& f = user["params"]["feedback"];
    if (!f.is_object() || !f.contains("name") || !f["name"].is_string()) {
      throw ConfigError("params.feedback.name", "expected a feedback name");
    }
    const std::string fname = f["name"].get<std::string>();
    const auto fit = feedbacks().find(fname);
    if (fit == feedbacks().end()) {
      throw ConfigError("params.feedback.name", "unknown feedback '" + fname + "' (known: " +
                                                    join(keys_of(feedbacks())) + ")");
    }
    json fd = fit->second.defaults;
    fd["name"] = fname;
    d["params"]["feedback"] = fd;
  }
  overlay(d, user, "");
  return {d, &e};
}

// Runs a resolved config; the report carries the canonical config text. The
// hash leaves out the output section, which does not affect any number.
inline ScenarioReport run(const Resolved& r) {
  const std::uint64_t seed = r.config["seeds"]["seed"].get<std::uint64_t>();
  ScenarioReport report = r.entry->run(r.config, seed);
  report.config_json = r.config.dump(2);
  json basis = r.config;
  basis.erase("output");
  report.hash_basis = basis.dump();
  return report;
}

// ---------------------------------------------------------------- listing

inline std::string list_catalog() {
  std::ostringstream os;
  auto params = [](const json& j) {
    std::string out;
    for (const auto& [k, v] : j.items()) {
      out += (out.empty() ? "" : ", ") + k + "=" + v.dump();
    }
    return out;
  };
  os << "games:\n";
  for (const auto& [name, g] : games()) {
    os << "  " << name << "(" << params(g.defaults) << ")\n      " << g.description << "\n";
  }
  os << "feedbacks:\n";
  for (const auto& [name, f] : feedbacks()) {
    os << "  " << name << "(" << params(f.defaults) << ")\n      " << f.description << "\n";
  }
  os << "functionals:\n";
  for (const auto& name : catalog::functional_names()) os << "  " << name << "\n";
  for (const auto* group : {"scenarios", "operations"}) {
    os << group << ":\n";
    const auto& reg = std::string(group) == "scenarios" ? scenarios() : operations();
    for (const auto& [name, e] : reg) {
      os << "  " << name << "\n      " << e.description << "\n";
      if (e.has_game) {
        os << "      game: " << (e.allowed_games.empty() ? "any (default " + e.default_game + ")"
                                                          : join(e.allowed_games))
           << "\n";
      }
      os << "      grids: " << params(e.grids) << "\n";
      os << "      params: " << params(e.params) << "\n";
    }
  }
  return os.str();
}

}  // namespace mfg::config
