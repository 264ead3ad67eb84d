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

// Parametric coefficient families. Every catalog game is an instance of one
// affine/polynomial family:
//
//   b_c = b0 + bx x_c + ba a_c + B(mean_c)
//   f   = f0 + sum_c (fxx x_c^2 + fxm x_c mean_c + fx x_c + fmm mean_c^2 + fxa x_c a_c)
//            + fvar sum_c var_c + sum_c (faa a_c^2 + fa a_c) + fdens density(x_0)
//   g   = g0 + sum_c (gxx x_c^2 + gxm x_c mean_c + gx x_c + gmm mean_c^2) + gvar sum_c var_c
//
// with B one of {0, kappa m, kappa sgn(m), kappa sgn(m) sqrt|m|}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfg/control.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/game.hpp"
#include "mfg/stats.hpp"

namespace mfg::catalog {

enum class MeanDrift { kNone, kLinear, kSign, kSqrt };

inline const char* to_string(MeanDrift shape) {
  switch (shape) {
    case MeanDrift::kNone: return "none";
    case MeanDrift::kLinear: return "linear";
    case MeanDrift::kSign: return "sign";
    case MeanDrift::kSqrt: return "sqrt";
  }
  return "none";
}

inline MeanDrift mean_drift_from(const std::string& name) {
  if (name == "none") return MeanDrift::kNone;
  if (name == "linear" || name == "lipschitz") return MeanDrift::kLinear;
  if (name == "sign" || name == "sgn") return MeanDrift::kSign;
  if (name == "sqrt") return MeanDrift::kSqrt;
  throw InvalidArgument("unknown mean drift shape '" + name + "' (known: none, linear, sign, sqrt)");
}

inline double apply_mean_drift(MeanDrift shape, double gain, double m) {
  switch (shape) {
    case MeanDrift::kNone: return 0.0;
    case MeanDrift::kLinear: return gain * m;
    case MeanDrift::kSign: return gain * sign(m);
    case MeanDrift::kSqrt: return gain * sign(m) * std::sqrt(std::abs(m));
  }
  return 0.0;
}

struct AffinePolyParams {
  std::size_t dim = 1;
  double horizon = 1.0;
  double action_lo = -1.0;
  double action_hi = 1.0;
  double state_radius = 10.0;
  InitialLaw initial = InitialLaw::point_mass({0.0});

  double b0 = 0.0, bx = 0.0, ba = 1.0;
  MeanDrift mean_shape = MeanDrift::kNone;
  double mean_gain = 0.0;

  double f0 = 0.0, fxx = 0.0, fxm = 0.0, fx = 0.0, fmm = 0.0, fvar = 0.0;
  double faa = 0.0, fa = 0.0, fxa = 0.0, fdens = 0.0;
  std::size_t density_bins = 0;

  double g0 = 0.0, gxx = 0.0, gxm = 0.0, gx = 0.0, gmm = 0.0, gvar = 0.0;
};

inline GameSpec affine_poly(const AffinePolyParams& p, std::string name) {
  require(p.dim >= 1, "affine_poly: dimension must be >= 1");
  require(p.action_lo <= p.action_hi, "affine_poly: empty action interval");
  require(p.state_radius > 0.0, "affine_poly: state radius must be positive");
  const std::size_t d = p.dim;

  GameSpec g;
  g.name = std::move(name);
  g.state_dim = d;
  g.horizon = p.horizon;
  g.actions = Box::cube(d, p.action_lo, p.action_hi);
  g.state_box = Box::cube(d, -p.state_radius, p.state_radius);
  g.initial = p.initial;
  if (g.initial.dim() != d) {
    require(g.initial.dim() == 1, "affine_poly: initial law dimension mismatch");
    g.initial.location.assign(d, g.initial.location[0]);
    g.initial.scale.assign(d, g.initial.scale[0]);
  }
  g.stats.variance = p.fvar != 0.0 || p.gvar != 0.0;
  if (p.fdens != 0.0) {
    g.stats.histogram_bins = p.density_bins > 0 ? p.density_bins : 64;
    g.stats.histogram_lo = -p.state_radius;
    g.stats.histogram_hi = p.state_radius;
  }
  g.drift_affine_in_a = true;
  g.drift_depends_on_measure = p.mean_shape != MeanDrift::kNone && p.mean_gain != 0.0;

  g.drift = [p](double, std::span<const double> x, const MeasureStats& m,
                std::span<const double> a, std::span<double> out) {
    for (std::size_t c = 0; c < x.size(); ++c) {
      out[c] = p.b0 + p.bx * x[c] + p.ba * a[c] + apply_mean_drift(p.mean_shape, p.mean_gain, m.mean[c]);
    }
  };

  const auto state_part = [p](double, std::span<const double> x, const MeasureStats& m) {
    double f = p.f0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      f += p.fxx * x[c] * x[c] + p.fxm * x[c] * m.mean[c] + p.fx * x[c] + p.fmm * m.mean[c] * m.mean[c];
      if (p.fvar != 0.0) f += p.fvar * m.variance[c];
    }
    if (p.fdens != 0.0) f += p.fdens * m.histogram.density_at(x[0]);
    return f;
  };
  const auto action_part = [p](double, std::span<const double> x, std::span<const double> a) {
    double f = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
      f += p.faa * a[c] * a[c] + p.fa * a[c] + p.fxa * x[c] * a[c];
    }
    return f;
  };
  g.running = [state_part, action_part](double t, std::span<const double> x, const MeasureStats& m,
                                        std::span<const double> a) {
    return state_part(t, x, m) + action_part(t, x, a);
  };
  if (p.fxa == 0.0) {
    g.separable = SeparableReward{state_part, [action_part](double t, std::span<const double> x,
                                                            std::span<const double> a) {
                                    return action_part(t, x, a);
                                  }};
  }
  g.terminal = [p](std::span<const double> x, const MeasureStats& m) {
    double v = p.g0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      v += p.gxx * x[c] * x[c] + p.gxm * x[c] * m.mean[c] + p.gx * x[c] + p.gmm * m.mean[c] * m.mean[c];
      if (p.gvar != 0.0) v += p.gvar * m.variance[c];
    }
    return v;
  };

  // Suprema over |x_c|, |mean_c| <= R, var_c <= R^2, |a_c| <= A.
  const double R = p.state_radius;
  const double A = std::max(std::abs(p.action_lo), std::abs(p.action_hi));
  const double dd = static_cast<double>(d);
  double bmean = 0.0;
  switch (p.mean_shape) {
    case MeanDrift::kNone: bmean = 0.0; break;
    case MeanDrift::kLinear: bmean = std::abs(p.mean_gain) * R; break;
    case MeanDrift::kSign: bmean = std::abs(p.mean_gain); break;
    case MeanDrift::kSqrt: bmean = std::abs(p.mean_gain) * std::sqrt(R); break;
  }
  const double per_axis = std::abs(p.b0) + std::abs(p.bx) * R + std::abs(p.ba) * A + bmean;
  g.bounds.drift = per_axis * std::sqrt(dd);
  const double max_density =
      p.fdens != 0.0 ? static_cast<double>(g.stats.histogram_bins) / (2.0 * R) : 0.0;
  g.bounds.running = std::abs(p.f0) +
                     dd * ((std::abs(p.fxx) + std::abs(p.fxm) + std::abs(p.fmm)) * R * R +
                           std::abs(p.fx) * R + std::abs(p.fvar) * R * R +
                           std::abs(p.faa) * A * A + std::abs(p.fa) * A + std::abs(p.fxa) * R * A) +
                     std::abs(p.fdens) * max_density;
  g.bounds.terminal = std::abs(p.g0) +
                      dd * ((std::abs(p.gxx) + std::abs(p.gxm) + std::abs(p.gmm)) * R * R +
                            std::abs(p.gx) * R + std::abs(p.gvar) * R * R);
  return g;
}

// b = a, f = 0, g = x * mean, A = [-1, 1], lambda = delta_0. Three strong
// equilibria with mean paths +t, 0, -t.
inline AffinePolyParams sign_drift_params(double horizon = 1.0) {
  AffinePolyParams p;
  p.horizon = horizon;
  p.gxm = 1.0;
  return p;
}
inline GameSpec sign_drift(double horizon = 1.0) {
  return affine_poly(sign_drift_params(horizon), "sign_drift");
}

// b = a, f = -a^2 / 2, g = -x * mean, A = [-1, 1], lambda = delta_0.
// Separable, concave, and monotone: a unique equilibrium.
inline AffinePolyParams monotone_lq_params(double horizon = 1.0) {
  AffinePolyParams p;
  p.horizon = horizon;
  p.faa = -0.5;
  p.gxm = -1.0;
  return p;
}
inline GameSpec monotone_lq(double horizon = 1.0) {
  return affine_poly(monotone_lq_params(horizon), "monotone_lq");
}

// Uncontrolled dynamics dX = B(mean) dt + dW; A = {0}, f = g = 0.
inline AffinePolyParams mean_drift_params(MeanDrift shape, double gain, double start,
                                          double horizon = 1.0) {
  AffinePolyParams p;
  p.horizon = horizon;
  p.action_lo = p.action_hi = 0.0;
  p.ba = 0.0;
  p.mean_shape = shape;
  p.mean_gain = gain;
  p.initial = InitialLaw::point_mass({start});
  return p;
}
inline GameSpec mean_drift(MeanDrift shape, double gain, double start, double horizon = 1.0) {
  return affine_poly(mean_drift_params(shape, gain, start, horizon),
                     std::string("mean_drift_") + to_string(shape));
}

// b = a, f = 0, g = -(x - target)^2.
inline AffinePolyParams target_params(double target = 1.0, double horizon = 1.0) {
  AffinePolyParams p;
  p.horizon = horizon;
  p.gxx = -1.0;
  p.gx = 2.0 * target;
  p.g0 = -target * target;
  return p;
}
inline GameSpec target(double target = 1.0, double horizon = 1.0) {
  return affine_poly(target_params(target, horizon), "target");
}

// b = a, f = -a^2/2 - c * density(x): congestion aversion through the
// histogram statistic.
inline AffinePolyParams crowd_aversion_params(double weight = 1.0, double horizon = 1.0) {
  AffinePolyParams p;
  p.horizon = horizon;
  p.faa = -0.5;
  p.fdens = -weight;
  p.density_bins = 40;
  p.initial = InitialLaw::gaussian({0.0}, {0.5});
  return p;
}
inline GameSpec crowd_aversion(double weight = 1.0, double horizon = 1.0) {
  return affine_poly(crowd_aversion_params(weight, horizon), "crowd_aversion");
}

// Flow functionals h(mu) used for reweighting and scenario statistics.
using FlowFunctional = std::function<double(const EmpiricalFlow&)>;

inline double mean_at(const EmpiricalFlow& flow, std::size_t j) { return flow.stats(j).mean[0]; }

inline FlowFunctional functional(const std::string& name) {
  if (name == "one") return [](const EmpiricalFlow&) { return 1.0; };
  if (name == "terminal_mean") {
    return [](const EmpiricalFlow& f) { return mean_at(f, f.grid().steps()); };
  }
  if (name == "terminal_mean_abs") {
    return [](const EmpiricalFlow& f) { return std::abs(mean_at(f, f.grid().steps())); };
  }
  if (name == "terminal_mean_sq") {
    return [](const EmpiricalFlow& f) {
      const double m = mean_at(f, f.grid().steps());
      return m * m;
    };
  }
  if (name == "terminal_mean_positive") {
    return [](const EmpiricalFlow& f) { return mean_at(f, f.grid().steps()) > 0.0 ? 1.0 : 0.0; };
  }
  if (name == "midpoint_mean") {
    return [](const EmpiricalFlow& f) { return mean_at(f, f.grid().steps() / 2); };
  }
  throw InvalidArgument("unknown flow functional '" + name + "' (known: " +
                        "midpoint_mean, one, terminal_mean, terminal_mean_abs, "
                        "terminal_mean_positive, terminal_mean_sq)");
}

inline std::vector<std::string> functional_names() {
  return {"midpoint_mean", "one", "terminal_mean", "terminal_mean_abs", "terminal_mean_positive",
          "terminal_mean_sq"};
}

// a = clip(gain * x + offset) on the first axis.
inline ControlField linear_feedback(double gain, double offset, double lo, double hi) {
  return ControlField::analytic(
      "linear", 1,
      [=](double, std::span<const double> x, const MeasureStats&, std::span<double> out) {
        out[0] = std::clamp(gain * x[0] + offset, lo, hi);
      });
}

}  // namespace mfg::catalog
