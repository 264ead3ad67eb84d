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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/rng.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// Axis-aligned box [lo, hi] in R^k; lo == hi on an axis is allowed.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  std::size_t dim() const { return lo.size(); }

  bool valid() const {
    if (lo.empty() || lo.size() != hi.size()) return false;
    for (std::size_t c = 0; c < lo.size(); ++c) {
      if (!std::isfinite(lo[c]) || !std::isfinite(hi[c]) || lo[c] > hi[c]) return false;
    }
    return true;
  }

  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (std::size_t c = 0; c < lo.size(); ++c) {
      if (x[c] < lo[c] - slack || x[c] > hi[c] + slack) return false;
    }
    return true;
  }

  // max |x_c| over the box, per axis.
  std::vector<double> radius() const {
    std::vector<double> r(lo.size());
    for (std::size_t c = 0; c < lo.size(); ++c) {
      r[c] = std::max(std::abs(lo[c]), std::abs(hi[c]));
    }
    return r;
  }

  void clamp(std::span<double> x) const {
    for (std::size_t c = 0; c < lo.size(); ++c) x[c] = std::clamp(x[c], lo[c], hi[c]);
  }
};

// The initial law lambda. Gaussian uses scale as the standard deviation,
// Uniform as the half-width around location.
struct InitialLaw {
  enum class Kind { kPointMass, kGaussian, kUniform };

  Kind kind = Kind::kPointMass;
  std::vector<double> location{0.0};
  std::vector<double> scale{0.0};

  static InitialLaw point_mass(std::vector<double> at) {
    return {Kind::kPointMass, at, std::vector<double>(at.size(), 0.0)};
  }
  static InitialLaw gaussian(std::vector<double> mean, std::vector<double> sd) {
    return {Kind::kGaussian, std::move(mean), std::move(sd)};
  }
  static InitialLaw uniform(std::vector<double> center, std::vector<double> half_width) {
    return {Kind::kUniform, std::move(center), std::move(half_width)};
  }

  std::size_t dim() const { return location.size(); }
  const std::vector<double>& mean() const { return location; }

  // A box holding the law's support (Gaussians: +- 6 sd).
  Box support() const {
    Box b{location, location};
    for (std::size_t c = 0; c < location.size(); ++c) {
      const double r = kind == Kind::kGaussian ? 6.0 * scale[c] : scale[c];
      b.lo[c] -= r;
      b.hi[c] += r;
    }
    return b;
  }

  // n x d samples; sample k depends on (seed, k) only.
  std::vector<double> sample(std::uint64_t seed, std::size_t n) const {
    const std::size_t d = dim();
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t c = 0; c < d; ++c) {
        double v = location[c];
        switch (kind) {
          case Kind::kPointMass:
            break;
          case Kind::kGaussian:
            v += scale[c] * rng::normal_at(seed, rng::Stream::kInitial, k, c);
            break;
          case Kind::kUniform:
            v += scale[c] * (2.0 * rng::uniform_at(seed, rng::Stream::kInitial, k, c) - 1.0);
            break;
        }
        out[k * d + c] = v;
      }
    }
    return out;
  }
};

using DriftFn = std::function<void(double t, std::span<const double> x, const MeasureStats& m,
                                   std::span<const double> a, std::span<double> out)>;
using RunningRewardFn = std::function<double(double t, std::span<const double> x,
                                             const MeasureStats& m, std::span<const double> a)>;
using TerminalRewardFn =
    std::function<double(std::span<const double> x, const MeasureStats& m)>;
using StatePartFn =
    std::function<double(double t, std::span<const double> x, const MeasureStats& m)>;
using ActionPartFn =
    std::function<double(double t, std::span<const double> x, std::span<const double> a)>;

// f = state_part(t, x, m) + action_part(t, x, a).
struct SeparableReward {
  StatePartFn state_part;
  ActionPartFn action_part;
};

// Suprema of |b|, |f|, |g| over the declared state box and A.
struct CoefficientBounds {
  double drift = 0.0;
  double running = 0.0;
  double terminal = 0.0;
};

// A symmetric n-player game / its mean field limit: dX = b dt + dW, each
// player maximizing E[int f dt + g].
struct GameSpec {
  std::string name = "custom";
  std::size_t state_dim = 1;
  Box actions = Box::cube(1, 0.0, 0.0);
  Box state_box = Box::cube(1, -10.0, 10.0);
  double horizon = 1.0;
  InitialLaw initial;
  DriftFn drift;
  RunningRewardFn running;
  TerminalRewardFn terminal;
  StatsRequest stats;
  CoefficientBounds bounds;
  bool drift_affine_in_a = false;
  bool drift_depends_on_measure = true;
  std::optional<SeparableReward> separable;

  std::size_t action_dim() const { return actions.dim(); }

  bool uncontrolled() const {
    for (std::size_t c = 0; c < actions.dim(); ++c) {
      if (actions.lo[c] != actions.hi[c]) return false;
    }
    return true;
  }

  // Shapes, callables, and finiteness / boundedness on probe points of the
  // state box (box corners and centre, every corner of A).
  void validate() const {
    require(state_dim >= 1, "GameSpec: state dimension must be >= 1");
    require(actions.valid(), "GameSpec '" + name + "': action set must be a nonempty compact box");
    require(state_box.valid() && state_box.dim() == state_dim,
            "GameSpec '" + name + "': state box must match the state dimension");
    require(std::isfinite(horizon) && horizon > 0.0, "GameSpec: horizon must be positive");
    require(initial.dim() == state_dim, "GameSpec: initial law dimension mismatch");
    require(static_cast<bool>(drift) && static_cast<bool>(running) && static_cast<bool>(terminal),
            "GameSpec '" + name + "': drift, running and terminal rewards are required");

    const std::size_t d = state_dim;
    const std::size_t k = action_dim();
    std::vector<std::vector<double>> xs;
    for (std::size_t mask = 0; mask < (std::size_t{1} << std::min<std::size_t>(d, 6)); ++mask) {
      std::vector<double> x(d);
      for (std::size_t c = 0; c < d; ++c) {
        x[c] = ((mask >> c) & 1u) ? state_box.hi[c] : state_box.lo[c];
      }
      xs.push_back(x);
    }
    std::vector<double> centre(d);
    for (std::size_t c = 0; c < d; ++c) centre[c] = 0.5 * (state_box.lo[c] + state_box.hi[c]);
    xs.push_back(centre);
    std::vector<std::vector<double>> as;
    for (std::size_t mask = 0; mask < (std::size_t{1} << std::min<std::size_t>(k, 6)); ++mask) {
      std::vector<double> a(k);
      for (std::size_t c = 0; c < k; ++c) a[c] = ((mask >> c) & 1u) ? actions.hi[c] : actions.lo[c];
      as.push_back(a);
    }
    const double slack = 1e-9;
    std::vector<double> b(d);
    for (const auto& x : xs) {
      for (const auto& mx : xs) {
        MeasureStats m = MeasureStats::point_mass(mx);
        const double g = terminal(x, m);
        require(std::isfinite(g) && std::abs(g) <= bounds.terminal * (1 + slack) + slack,
                "GameSpec '" + name + "': terminal reward not finite/bounded on the state box");
        for (const auto& a : as) {
          drift(0.0, x, m, a, b);
          double norm2 = 0.0;
          for (double v : b) {
            require(std::isfinite(v), "GameSpec '" + name + "': drift not finite on the state box");
            norm2 += v * v;
          }
          require(std::sqrt(norm2) <= bounds.drift * (1 + slack) + slack,
                  "GameSpec '" + name + "': drift exceeds its declared bound");
          const double f = running(0.0, x, m, a);
          require(std::isfinite(f) && std::abs(f) <= bounds.running * (1 + slack) + slack,
                  "GameSpec '" + name + "': running reward not finite/bounded on the state box");
        }
      }
    }
  }
};

}  // namespace mfg
