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
#include <span>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"
#include "mfg/time_grid.hpp"

namespace mfg {

// Gaussian(0, dt) increments of n independent d-dimensional Brownian motions.
// Stored step-major: increment(k, j) is contiguous over the d coordinates.
class BrownianBundle {
 public:
  BrownianBundle() = default;

  BrownianBundle(std::uint64_t seed, std::size_t particles, TimeGrid grid,
                 std::size_t dim)
      : seed_(seed), particles_(particles), dim_(dim), grid_(grid) {
    require(particles >= 1, "sample_brownian: need at least one particle");
    require(dim >= 1, "sample_brownian: dimension must be >= 1");
    const std::size_t steps = grid.steps();
    const double scale = std::sqrt(grid.dt());
    increments_.assign(steps * particles * dim, 0.0);
    parallel_for(particles, [&](std::size_t k) {
      for (std::size_t j = 0; j < steps; ++j) {
        double* out = &increments_[(j * particles + k) * dim];
        for (std::size_t c = 0; c < dim; ++c) {
          out[c] = scale * draw(seed, k, j, c, dim);
        }
      }
    });
  }

  // A single standard normal of the bundle's stream, without materializing.
  static double draw(std::uint64_t seed, std::size_t particle, std::size_t step,
                     std::size_t coord, std::size_t dim) {
    return rng::normal_at(seed, rng::Stream::kBrownian, particle,
                          step * dim + coord);
  }

  // Same paths observed on a grid with `factor` times fewer steps: each
  // coarse increment is the sum of `factor` consecutive fine ones.
  BrownianBundle coarsened(std::size_t factor) const {
    require(factor >= 1 && grid_.steps() % factor == 0,
            "BrownianBundle: coarsening factor must divide the step count");
    BrownianBundle out;
    out.seed_ = seed_;
    out.particles_ = particles_;
    out.dim_ = dim_;
    out.grid_ = TimeGrid(grid_.horizon(), grid_.steps() / factor);
    const std::size_t row = particles_ * dim_;
    out.increments_.assign(out.grid_.steps() * row, 0.0);
    for (std::size_t j = 0; j < grid_.steps(); ++j) {
      const std::size_t cj = j / factor;
      for (std::size_t i = 0; i < row; ++i) {
        out.increments_[cj * row + i] += increments_[j * row + i];
      }
    }
    return out;
  }

  // Relabelled players: particle k of the result is particle perm[k] here.
  BrownianBundle permuted(std::span<const std::size_t> perm) const {
    require(perm.size() == particles_, "BrownianBundle: permutation size mismatch");
    BrownianBundle out = *this;
    for (std::size_t j = 0; j < grid_.steps(); ++j) {
      for (std::size_t k = 0; k < particles_; ++k) {
        require(perm[k] < particles_, "BrownianBundle: permutation index out of range");
        const auto src = increment(perm[k], j);
        const auto at = static_cast<std::ptrdiff_t>((j * particles_ + k) * dim_);
        std::copy(src.begin(), src.end(), out.increments_.begin() + at);
      }
    }
    return out;
  }

  std::uint64_t seed() const { return seed_; }
  std::size_t particles() const { return particles_; }
  std::size_t dim() const { return dim_; }
  const TimeGrid& grid() const { return grid_; }
  bool empty() const { return increments_.empty(); }

  std::span<const double> increment(std::size_t particle, std::size_t step) const {
    return {&increments_[(step * particles_ + particle) * dim_], dim_};
  }

  // All increments of one step, n x d.
  std::span<const double> step(std::size_t j) const {
    return {&increments_[j * particles_ * dim_], particles_ * dim_};
  }

  const std::vector<double>& data() const { return increments_; }

 private:
  std::uint64_t seed_ = 0;
  std::size_t particles_ = 0;
  std::size_t dim_ = 0;
  TimeGrid grid_;
  std::vector<double> increments_;
};

inline BrownianBundle sample_brownian(std::uint64_t seed, std::size_t n,
                                      const TimeGrid& grid, std::size_t dim) {
  return BrownianBundle(seed, n, grid, dim);
}

}  // namespace mfg
