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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/grids.hpp"
#include "mfg/stats.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// alpha(t, x, m) for grid-free feedbacks such as sgn of the mean.
using FeedbackFn = std::function<void(double t, std::span<const double> x, const MeasureStats& m,
                                      std::span<double> action)>;

// A Markovian feedback control. Tabulated fields are piecewise constant in
// time (one row per step) and read at the nearest spatial node; analytic
// fields are evaluated directly.
class ControlField {
 public:
  enum class Mode { kPure, kRelaxed };

  static constexpr double kProbabilityTolerance = 1e-12;

  ControlField() = default;

  static ControlField pure(TimeGrid time, SpatialGrid space, std::size_t action_dim,
                           std::vector<double> actions) {
    require(action_dim >= 1, "ControlField: action dimension must be >= 1");
    require(actions.size() == time.steps() * space.nodes() * action_dim,
            "ControlField: pure table must be steps x nodes x action_dim");
    ControlField c;
    c.mode_ = Mode::kPure;
    c.time_ = time;
    c.space_ = std::move(space);
    c.action_dim_ = action_dim;
    c.table_ = std::move(actions);
    c.name_ = "tabulated";
    return c;
  }

  static ControlField relaxed(TimeGrid time, SpatialGrid space, ActionGrid atoms,
                              std::vector<double> probabilities) {
    const std::size_t a = atoms.size();
    require(a >= 1, "ControlField: relaxed control needs a nonempty action grid");
    require(probabilities.size() == time.steps() * space.nodes() * a,
            "ControlField: relaxed table must be steps x nodes x atoms");
    for (std::size_t row = 0; row < probabilities.size() / a; ++row) {
      double sum = 0.0;
      for (std::size_t i = 0; i < a; ++i) {
        const double p = probabilities[row * a + i];
        require(p >= 0.0 && std::isfinite(p), "ControlField: probabilities must be nonnegative");
        sum += p;
      }
      require(std::abs(sum - 1.0) <= kProbabilityTolerance * static_cast<double>(a) + 1e-15,
              "ControlField: relaxed rows must sum to 1");
    }
    ControlField c;
    c.mode_ = Mode::kRelaxed;
    c.time_ = time;
    c.space_ = std::move(space);
    c.action_dim_ = atoms.action_dim();
    c.atoms_ = std::move(atoms);
    c.table_ = std::move(probabilities);
    c.name_ = "relaxed";
    return c;
  }

  static ControlField analytic(std::string name, std::size_t action_dim, FeedbackFn fn) {
    require(static_cast<bool>(fn), "ControlField: analytic feedback must be callable");
    ControlField c;
    c.mode_ = Mode::kPure;
    c.action_dim_ = action_dim;
    c.feedback_ = std::move(fn);
    c.name_ = std::move(name);
    return c;
  }

  static ControlField constant(std::vector<double> action) {
    const std::size_t k = action.size();
    return analytic("constant", k,
                    [action = std::move(action)](double, std::span<const double>,
                                                 const MeasureStats&, std::span<double> out) {
                      std::copy(action.begin(), action.end(), out.begin());
                    });
  }

  // sgn(mean of the first coordinate) for t > t0, zero before.
  static ControlField sign_of_mean(double switch_time = 0.0) {
    return analytic("sign_of_mean", 1,
                    [switch_time](double t, std::span<const double>, const MeasureStats& m,
                                  std::span<double> out) {
                      out[0] = t > switch_time ? sign(m.mean[0]) : 0.0;
                    });
  }

  Mode mode() const { return mode_; }
  bool is_relaxed() const { return mode_ == Mode::kRelaxed; }
  bool is_analytic() const { return static_cast<bool>(feedback_); }
  const std::string& name() const { return name_; }
  std::size_t action_dim() const { return action_dim_; }
  const TimeGrid& time_grid() const { return time_; }
  const SpatialGrid& space() const { return space_; }
  const ActionGrid& atoms() const { return atoms_; }
  const std::vector<double>& table() const { return table_; }

  void set_name(std::string name) { name_ = std::move(name); }

  // Pure action at step j (time t) and state x.
  void act(std::size_t step, double t, std::span<const double> x, const MeasureStats& m,
           std::span<double> out) const {
    if (feedback_) {
      feedback_(t, x, m, out);
      return;
    }
    const std::size_t node = space_.nearest(x);
    const double* row = &table_[(step * space_.nodes() + node) * action_dim_];
    std::copy(row, row + action_dim_, out.begin());
  }

  // Probability vector over atoms() at step j and state x.
  std::span<const double> weights(std::size_t step, std::span<const double> x) const {
    const std::size_t a = atoms_.size();
    const std::size_t node = space_.nearest(x);
    return {&table_[(step * space_.nodes() + node) * a], a};
  }

  // Tabulated entry at (step, node): action_dim values or atom weights.
  std::span<const double> entry(std::size_t step, std::size_t node) const {
    const std::size_t width = is_relaxed() ? atoms_.size() : action_dim_;
    return {&table_[(step * space_.nodes() + node) * width], width};
  }

  // Grid-based fields must match the simulation grid step for step.
  void check_time_grid(const TimeGrid& grid) const {
    if (is_analytic()) return;
    if (!(time_ == grid)) {
      throw InvalidArgument("ControlField '" + name_ + "': time grid does not match the run");
    }
  }

 private:
  Mode mode_ = Mode::kPure;
  TimeGrid time_;
  SpatialGrid space_;
  ActionGrid atoms_;
  std::size_t action_dim_ = 0;
  std::vector<double> table_;
  FeedbackFn feedback_;
  std::string name_;
};

// Which control each player uses: fields[owner[i]] for player i.
class ControlProfile {
 public:
  static ControlProfile uniform(ControlField field, std::size_t players) {
    ControlProfile p;
    p.fields_.push_back(std::make_shared<const ControlField>(std::move(field)));
    p.owner_.assign(players, 0);
    return p;
  }

  // Everyone plays `common` except `deviator`, who plays `deviation`.
  static ControlProfile with_deviation(ControlField common, ControlField deviation,
                                       std::size_t players, std::size_t deviator) {
    require(deviator < players, "ControlProfile: deviator index out of range");
    ControlProfile p = uniform(std::move(common), players);
    p.fields_.push_back(std::make_shared<const ControlField>(std::move(deviation)));
    p.owner_[deviator] = 1;
    return p;
  }

  std::size_t players() const { return owner_.size(); }
  const ControlField& of(std::size_t player) const { return *fields_[owner_[player]]; }
  std::size_t field_count() const { return fields_.size(); }
  const ControlField& field(std::size_t i) const { return *fields_[i]; }

 private:
  std::vector<std::shared_ptr<const ControlField>> fields_;
  std::vector<std::size_t> owner_;
};

}  // namespace mfg
