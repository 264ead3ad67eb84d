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
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mfg/csv.hpp"
#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/stats.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Time-indexed particle clouds mu_t = (1/n) sum_k delta_{X^k_t}. Samples are
// stored time-major, (M+1) x n x d. For d = 1 each time slice is also kept
// sorted, which every 1-d transport distance needs.
class EmpiricalFlow {
 public:
  EmpiricalFlow() = default;

  EmpiricalFlow(TimeGrid grid, std::size_t particles, std::size_t dim, std::vector<double> samples)
      : grid_(grid), particles_(particles), dim_(dim), samples_(std::move(samples)) {
    require(particles_ >= 1 && dim_ >= 1, "EmpiricalFlow: need n >= 1 and d >= 1");
    require(samples_.size() == grid_.points() * particles_ * dim_,
            "EmpiricalFlow: sample array must be (M+1) x n x d");
    if (dim_ == 1) {
      sorted_ = samples_;
      parallel_for(grid_.points(), [&](std::size_t j) {
        auto first = sorted_.begin() + static_cast<std::ptrdiff_t>(j * particles_);
        std::sort(first, first + static_cast<std::ptrdiff_t>(particles_));
      });
    }
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t particles() const { return particles_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return samples_.empty(); }

  // n x d samples at grid time j.
  std::span<const double> at(std::size_t j) const {
    return {&samples_[j * particles_ * dim_], particles_ * dim_};
  }

  std::span<const double> particle(std::size_t j, std::size_t k) const {
    return {&samples_[(j * particles_ + k) * dim_], dim_};
  }

  // Sorted samples at time j (d = 1 only).
  std::span<const double> sorted(std::size_t j) const {
    require(dim_ == 1, "EmpiricalFlow: sorted cache exists only for d = 1");
    return {&sorted_[j * particles_], particles_};
  }

  MeasureStats stats(std::size_t j, const StatsRequest& request = {}) const {
    return compute_stats(at(j), dim_, request);
  }

  std::vector<MeasureStats> all_stats(const StatsRequest& request = {}) const {
    std::vector<MeasureStats> out(grid_.points());
    parallel_for(grid_.points(), [&](std::size_t j) { out[j] = stats(j, request); });
    return out;
  }

  const std::vector<double>& data() const { return samples_; }

 private:
  TimeGrid grid_;
  std::size_t particles_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> samples_;
  std::vector<double> sorted_;
};

// Per-time sample mean, (M+1) x d.
inline std::vector<double> mean_path(const EmpiricalFlow& flow) {
  require(!flow.empty(), "mean_path: empty flow");
  const std::size_t d = flow.dim();
  std::vector<double> out(flow.grid().points() * d);
  parallel_for(flow.grid().points(), [&](std::size_t j) {
    const MeasureStats m = flow.stats(j);
    for (std::size_t c = 0; c < d; ++c) out[j * d + c] = m.mean[c];
  });
  return out;
}

// Long format: time index, time, particle index, coordinates.
inline void write_flow_csv(std::ostream& os, const EmpiricalFlow& flow) {
  csv::Writer w(os);
  const std::size_t d = flow.dim();
  std::vector<std::string> header{"time_index", "time", "particle"};
  for (std::size_t c = 0; c < d; ++c) header.push_back("x" + std::to_string(c));
  w.row(header);
  for (std::size_t j = 0; j < flow.grid().points(); ++j) {
    for (std::size_t k = 0; k < flow.particles(); ++k) {
      std::vector<std::string> row{csv::number(j), csv::number(flow.grid().time(j)),
                                   csv::number(k)};
      for (double v : flow.particle(j, k)) row.push_back(csv::number(v));
      w.row(row);
    }
  }
}

}  // namespace mfg
