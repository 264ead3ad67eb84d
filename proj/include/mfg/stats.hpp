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
#include <span>
#include <vector>

#include "mfg/errors.hpp"

namespace mfg {

// Equal-width histogram of the first coordinate, normalized to a density.
struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> density;

  bool empty() const { return density.empty(); }

  double density_at(double x) const {
    if (density.empty()) return 0.0;
    const double pos = (x - lo) / width;
    if (pos < 0.0) return 0.0;
    const auto b = static_cast<std::size_t>(pos);
    return b < density.size() ? density[b] : 0.0;
  }
};

// Which statistics of a measure a game's coefficients read. Means are always
// available.
struct StatsRequest {
  bool variance = false;
  std::size_t histogram_bins = 0;
  double histogram_lo = -1.0;
  double histogram_hi = 1.0;

  StatsRequest merged(const StatsRequest& other) const {
    StatsRequest out = *this;
    out.variance = variance || other.variance;
    if (out.histogram_bins == 0) {
      out.histogram_bins = other.histogram_bins;
      out.histogram_lo = other.histogram_lo;
      out.histogram_hi = other.histogram_hi;
    }
    return out;
  }
};

// The summary of a measure through which coefficients see it.
struct MeasureStats {
  std::size_t count = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  Histogram histogram;

  static MeasureStats point_mass(std::span<const double> location) {
    MeasureStats m;
    m.count = 1;
    m.mean.assign(location.begin(), location.end());
    m.variance.assign(location.size(), 0.0);
    return m;
  }
};

// Sums run sequentially in particle order so the result does not depend on
// how the samples were produced.
inline MeasureStats compute_stats(std::span<const double> samples, std::size_t dim,
                                  const StatsRequest& request = {}) {
  require(dim >= 1, "compute_stats: dimension must be >= 1");
  require(!samples.empty() && samples.size() % dim == 0,
          "compute_stats: sample array must be a nonempty n x d block");
  const std::size_t n = samples.size() / dim;
  MeasureStats m;
  m.count = n;
  m.mean.assign(dim, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t c = 0; c < dim; ++c) m.mean[c] += samples[k * dim + c];
  }
  for (double& v : m.mean) v /= static_cast<double>(n);
  if (request.variance) {
    m.variance.assign(dim, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t c = 0; c < dim; ++c) {
        const double e = samples[k * dim + c] - m.mean[c];
        m.variance[c] += e * e;
      }
    }
    for (double& v : m.variance) v /= static_cast<double>(n);
  }
  if (request.histogram_bins > 0) {
    require(request.histogram_hi > request.histogram_lo,
            "compute_stats: histogram range must have positive width");
    Histogram& h = m.histogram;
    h.lo = request.histogram_lo;
    h.width = (request.histogram_hi - request.histogram_lo) /
              static_cast<double>(request.histogram_bins);
    h.density.assign(request.histogram_bins, 0.0);
    const double unit = 1.0 / (static_cast<double>(n) * h.width);
    for (std::size_t k = 0; k < n; ++k) {
      const double pos = (samples[k * dim] - h.lo) / h.width;
      if (pos < 0.0) continue;
      const auto b = static_cast<std::size_t>(pos);
      if (b < h.density.size()) h.density[b] += unit;
    }
  }
  return m;
}

// Welford accumulator for Monte Carlo summaries.
class RunningMoments {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const {
    return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2,
          "loglog_slope: need at least two matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace mfg
