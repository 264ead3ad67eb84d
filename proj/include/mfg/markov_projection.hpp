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

// Markovian projection: b-hat(t, x) = E[b_t | X_t = x] estimated by
// histogram binning of realized drifts, and the mimicking diffusion
// dY = b-hat(t, Y) dt + dW driven by fresh noise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/csv.hpp"
#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/metrics.hpp"
#include "mfg/parallel.hpp"
#include "mfg/simulate.hpp"
#include "mfg/stats.hpp"

namespace mfg {

// Realized drift b^k_{t_j}, stored step-major as M x n x d like the Brownian
// increments.
struct DriftSamples {
  std::size_t steps = 0;
  std::size_t particles = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> at(std::size_t j, std::size_t k) const {
    return {&values[(j * particles + k) * dim], dim};
  }
};

// Paths of dX = b_t dt + dW for an adapted drift given pointwise by
// drift(k, j, t, x, out), together with the drift values actually used.
struct AdaptedRun {
  ParticleEnsemble ensemble;
  DriftSamples drift;
};

using AdaptedDriftFn = std::function<void(std::size_t particle, std::size_t step, double t,
                                          std::span<const double> x, std::span<double> out)>;

inline AdaptedRun simulate_adapted(const BrownianBundle& bundle, std::span<const double> init,
                                   const AdaptedDriftFn& drift) {
  const TimeGrid& grid = bundle.grid();
  const std::size_t n = bundle.particles();
  const std::size_t d = bundle.dim();
  require(init.size() == n * d, "simulate_adapted: initial samples must be n x d");
  AdaptedRun run{ParticleEnsemble(grid, n, d, bundle.seed()),
                 DriftSamples{grid.steps(), n, d, std::vector<double>(grid.steps() * n * d)}};
  std::copy(init.begin(), init.end(), run.ensemble.at(0).begin());
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.time(j);
    const auto now = std::span<const double>(run.ensemble.at(j));
    auto next = run.ensemble.at(j + 1);
    const auto dw = bundle.step(j);
    parallel_for(n, [&](std::size_t k) {
      const auto x = now.subspan(k * d, d);
      std::span<double> b(&run.drift.values[(j * n + k) * d], d);
      drift(k, j, t, x, b);
      for (std::size_t c = 0; c < d; ++c) {
        require(std::isfinite(b[c]), "simulate_adapted: non-finite drift at " +
                                         detail::describe_point(t, x));
        next[k * d + c] = x[c] + b[c] * grid.dt() + dw[k * d + c];
      }
    });
  }
  return run;
}

// Equal-width bins per axis over [lo, hi].
struct ProjectionBins {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> counts;
  std::size_t min_count = 30;
};

// b-hat on (time step) x (bin). Sparse bins hold the time slice's mean drift
// and are flagged.
class DriftTable {
 public:
  DriftTable() = default;
  DriftTable(TimeGrid grid, ProjectionBins bins, std::size_t dim)
      : grid_(grid), bins_(std::move(bins)), dim_(dim) {
    require(bins_.lo.size() == dim && bins_.hi.size() == dim && bins_.counts.size() == dim,
            "project_drift: one bin range and count per axis");
    cells_ = 1;
    for (std::size_t c = 0; c < dim; ++c) {
      require(bins_.hi[c] > bins_.lo[c] && bins_.counts[c] >= 1,
              "project_drift: bins must have positive width");
      cells_ *= bins_.counts[c];
    }
    values_.assign(grid_.steps() * cells_ * dim_, 0.0);
    counts_.assign(grid_.steps() * cells_, 0);
    fallback_.assign(grid_.steps() * cells_, 0);
    slice_mean_.assign(grid_.steps() * dim_, 0.0);
  }

  const TimeGrid& grid() const { return grid_; }
  const ProjectionBins& bins() const { return bins_; }
  std::size_t dim() const { return dim_; }
  std::size_t cells() const { return cells_; }

  double width(std::size_t axis) const {
    return (bins_.hi[axis] - bins_.lo[axis]) / static_cast<double>(bins_.counts[axis]);
  }
  double centre(std::size_t cell, std::size_t axis) const {
    std::size_t rest = cell;
    for (std::size_t c = dim_; c-- > axis + 1;) rest /= bins_.counts[c];
    const std::size_t i = rest % bins_.counts[axis];
    return bins_.lo[axis] + (static_cast<double>(i) + 0.5) * width(axis);
  }

  // Bin of x, clamped onto the edge bins outside the range.
  std::size_t cell_of(std::span<const double> x) const {
    std::size_t cell = 0;
    for (std::size_t c = 0; c < dim_; ++c) {
      const double pos = (x[c] - bins_.lo[c]) / width(c);
      const auto last = static_cast<double>(bins_.counts[c] - 1);
      const auto i = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, last));
      cell = cell * bins_.counts[c] + i;
    }
    return cell;
  }
  bool covers(std::span<const double> x) const {
    for (std::size_t c = 0; c < dim_; ++c) {
      if (!(x[c] >= bins_.lo[c] && x[c] <= bins_.hi[c])) return false;
    }
    return true;
  }

  std::span<const double> value(std::size_t j, std::size_t cell) const {
    return {&values_[(j * cells_ + cell) * dim_], dim_};
  }
  std::span<double> value(std::size_t j, std::size_t cell) {
    return {&values_[(j * cells_ + cell) * dim_], dim_};
  }
  std::span<const double> at(std::size_t j, std::span<const double> x) const {
    return value(j, cell_of(x));
  }
  std::size_t count(std::size_t j, std::size_t cell) const { return counts_[j * cells_ + cell]; }
  std::size_t& count(std::size_t j, std::size_t cell) { return counts_[j * cells_ + cell]; }
  bool fallback(std::size_t j, std::size_t cell) const { return fallback_[j * cells_ + cell] != 0; }
  void set_fallback(std::size_t j, std::size_t cell) { fallback_[j * cells_ + cell] = 1; }
  std::span<const double> slice_mean(std::size_t j) const { return {&slice_mean_[j * dim_], dim_}; }
  std::span<double> slice_mean(std::size_t j) { return {&slice_mean_[j * dim_], dim_}; }

 private:
  TimeGrid grid_;
  ProjectionBins bins_;
  std::size_t dim_ = 0;
  std::size_t cells_ = 0;
  std::vector<double> values_;
  std::vector<std::size_t> counts_;
  std::vector<unsigned char> fallback_;
  std::vector<double> slice_mean_;
};

// Per (step, bin) average of the drift samples of the particles in the bin.
// Time slices are independent; within a slice, particles are summed in index
// order so the result does not depend on the thread count.
inline DriftTable project_drift(const ParticleEnsemble& paths, const DriftSamples& drift,
                                const ProjectionBins& bins) {
  const TimeGrid& grid = paths.grid();
  const std::size_t n = paths.particles();
  const std::size_t d = paths.dim();
  require(drift.steps == grid.steps() && drift.particles == n && drift.dim == d &&
              drift.values.size() == grid.steps() * n * d,
          "project_drift: drift samples are not aligned with the paths");
  DriftTable table(grid, bins, d);
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!table.covers(paths.state(k, j))) {
        throw InvalidArgument("project_drift: bins do not cover the data at " +
                              detail::describe_point(grid.time(j), paths.state(k, j)));
      }
    }
  }
  parallel_for(grid.steps(), [&](std::size_t j) {
    auto mean = table.slice_mean(j);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t cell = table.cell_of(paths.state(k, j));
      const auto b = drift.at(j, k);
      auto v = table.value(j, cell);
      for (std::size_t c = 0; c < d; ++c) {
        v[c] += b[c];
        mean[c] += b[c];
      }
      ++table.count(j, cell);
    }
    for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(n);
    for (std::size_t cell = 0; cell < table.cells(); ++cell) {
      auto v = table.value(j, cell);
      const std::size_t cnt = table.count(j, cell);
      if (cnt < bins.min_count) {
        std::copy(mean.begin(), mean.end(), v.begin());
        table.set_fallback(j, cell);
      } else {
        for (std::size_t c = 0; c < d; ++c) v[c] /= static_cast<double>(cnt);
      }
    }
  });
  return table;
}

struct MimicResult {
  EmpiricalFlow flow;
  std::vector<double> distances;  // W1 between Y_t and X_t marginals, per grid time
};

// Simulates dY = b-hat(t, Y) dt + dW from `init` with the (fresh) bundle and
// compares marginals with `original` at every grid time.
inline MimicResult mimic_and_compare(const DriftTable& table, std::span<const double> init,
                                     const BrownianBundle& bundle, const EmpiricalFlow& original) {
  require(table.grid() == bundle.grid() && original.grid() == bundle.grid(),
          "mimic_and_compare: time grids differ");
  require(table.dim() == bundle.dim() && original.dim() == bundle.dim(),
          "mimic_and_compare: dimensions differ");
  auto run = simulate_adapted(bundle, init,
                              [&](std::size_t, std::size_t j, double, std::span<const double> y,
                                  std::span<double> out) {
                                const auto v = table.at(j, y);
                                std::copy(v.begin(), v.end(), out.begin());
                              });
  MimicResult out{std::move(run.ensemble).flow(), {}};
  out.distances.resize(bundle.grid().points());
  parallel_for(out.distances.size(), [&](std::size_t j) {
    out.distances[j] = wasserstein1(original.at(j), out.flow.at(j), original.dim());
  });
  return out;
}

// Cov(X_{t_i}, X_{t_j}) of the first coordinate with a standard error from
// the centred products.
struct Autocovariance {
  double value = 0.0;
  double std_error = 0.0;
};

inline Autocovariance autocovariance(const EmpiricalFlow& flow, std::size_t i, std::size_t j) {
  const std::size_t n = flow.particles();
  require(n >= 2, "autocovariance: need at least two particles");
  const MeasureStats a = flow.stats(i), b = flow.stats(j);
  RunningMoments prod;
  for (std::size_t k = 0; k < n; ++k) {
    prod.add((flow.particle(i, k)[0] - a.mean[0]) * (flow.particle(j, k)[0] - b.mean[0]));
  }
  const double nn = static_cast<double>(n);
  return {prod.mean() * nn / (nn - 1.0), prod.std_error()};
}

struct AutocovarianceGap {
  Autocovariance original;
  Autocovariance mimic;
  double gap = 0.0;        // |original - mimic|
  double std_error = 0.0;  // of the difference, the clouds being independent
};

inline AutocovarianceGap autocovariance_gap(const EmpiricalFlow& original,
                                            const EmpiricalFlow& mimic, std::size_t i,
                                            std::size_t j) {
  AutocovarianceGap g;
  g.original = autocovariance(original, i, j);
  g.mimic = autocovariance(mimic, i, j);
  g.gap = std::abs(g.original.value - g.mimic.value);
  g.std_error = std::hypot(g.original.std_error, g.mimic.std_error);
  return g;
}

// Long format: time index, time, bin centre per axis, value per axis, count,
// fallback flag.
inline void write_drift_table_csv(std::ostream& os, const DriftTable& table) {
  csv::Writer w(os);
  const std::size_t d = table.dim();
  std::vector<std::string> header{"time_index", "time"};
  for (std::size_t c = 0; c < d; ++c) header.push_back("bin_centre" + std::to_string(c));
  for (std::size_t c = 0; c < d; ++c) header.push_back("value" + std::to_string(c));
  header.push_back("count");
  header.push_back("fallback");
  w.row(header);
  for (std::size_t j = 0; j < table.grid().steps(); ++j) {
    for (std::size_t cell = 0; cell < table.cells(); ++cell) {
      std::vector<std::string> row{csv::number(j), csv::number(table.grid().time(j))};
      for (std::size_t c = 0; c < d; ++c) row.push_back(csv::number(table.centre(cell, c)));
      for (double v : table.value(j, cell)) row.push_back(csv::number(v));
      row.push_back(csv::number(table.count(j, cell)));
      row.push_back(table.fallback(j, cell) ? "1" : "0");
      w.row(row);
    }
  }
}

}  // namespace mfg
