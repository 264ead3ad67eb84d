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

#include <cmath>
#include <cstddef>

#include "mfg/errors.hpp"

namespace mfg {

// Uniform grid t_j = j * dt on [0, T] with M steps.
class TimeGrid {
 public:
  TimeGrid() = default;

  TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    require(steps >= 1, "TimeGrid: need at least one step");
    require(std::isfinite(horizon) && horizon > 0.0,
            "TimeGrid: horizon must be positive and finite");
    // dt * M == T must hold exactly; T / M can be one ulp off.
    double dt = horizon / static_cast<double>(steps);
    const double m = static_cast<double>(steps);
    if (dt * m != horizon) {
      const double up = std::nextafter(dt, 2.0 * dt);
      const double down = std::nextafter(dt, 0.0);
      if (up * m == horizon) {
        dt = up;
      } else if (down * m == horizon) {
        dt = down;
      } else {
        throw InvalidArgument(
            "TimeGrid: no double dt with dt * M == T for this (T, M)");
      }
    }
    dt_ = dt;
  }

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t points() const { return steps_ + 1; }
  double dt() const { return dt_; }

  double time(std::size_t j) const {
    return j == steps_ ? horizon_ : static_cast<double>(j) * dt_;
  }

  // Index of the grid step containing t (the last step for t == T).
  std::size_t step_of(double t) const {
    if (t <= 0.0) return 0;
    const auto j = static_cast<std::size_t>(t / dt_);
    return j >= steps_ ? steps_ - 1 : j;
  }

  TimeGrid refined(std::size_t factor) const {
    require(factor >= 1, "TimeGrid: refinement factor must be >= 1");
    return TimeGrid(horizon_, steps_ * factor);
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.horizon_ == b.horizon_ && a.steps_ == b.steps_;
  }

 private:
  double horizon_ = 1.0;
  std::size_t steps_ = 1;
  double dt_ = 1.0;
};

}  // namespace mfg
