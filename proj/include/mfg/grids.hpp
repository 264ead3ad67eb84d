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
#include "mfg/game.hpp"

namespace mfg {

// Tensor grid over a box in R^d, row-major (last axis fastest).
class SpatialGrid {
 public:
  SpatialGrid() = default;

  SpatialGrid(std::vector<double> lo, std::vector<double> hi, std::vector<std::size_t> points)
      : lo_(std::move(lo)), hi_(std::move(hi)), points_(std::move(points)) {
    require(!lo_.empty() && lo_.size() == hi_.size() && lo_.size() == points_.size(),
            "SpatialGrid: bounds and point counts must have one entry per axis");
    spacing_.resize(lo_.size());
    strides_.assign(lo_.size(), 1);
    nodes_ = 1;
    for (std::size_t c = 0; c < lo_.size(); ++c) {
      require(std::isfinite(lo_[c]) && std::isfinite(hi_[c]) && hi_[c] > lo_[c],
              "SpatialGrid: bounds must be finite with lo < hi");
      require(points_[c] >= 3, "SpatialGrid: need at least 3 points per axis");
      spacing_[c] = (hi_[c] - lo_[c]) / static_cast<double>(points_[c] - 1);
      nodes_ *= points_[c];
    }
    for (std::size_t c = lo_.size() - 1; c > 0; --c) {
      strides_[c - 1] = strides_[c] * points_[c];
    }
  }

  // Uniform grid with spacing close to h (adjusted to divide the box).
  static SpatialGrid with_spacing(const Box& box, double h) {
    require(h > 0.0, "SpatialGrid: spacing must be positive");
    std::vector<std::size_t> pts(box.dim());
    for (std::size_t c = 0; c < box.dim(); ++c) {
      pts[c] = std::max<std::size_t>(
          3, static_cast<std::size_t>(std::ceil((box.hi[c] - box.lo[c]) / h - 1e-9)) + 1);
    }
    return SpatialGrid(box.lo, box.hi, pts);
  }

  std::size_t dim() const { return lo_.size(); }
  std::size_t nodes() const { return nodes_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<std::size_t>& points() const { return points_; }
  const std::vector<double>& spacing() const { return spacing_; }
  std::size_t stride(std::size_t axis) const { return strides_[axis]; }
  double min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

  std::size_t axis_index(std::size_t node, std::size_t axis) const {
    return (node / strides_[axis]) % points_[axis];
  }

  double coordinate(std::size_t node, std::size_t axis) const {
    return lo_[axis] + static_cast<double>(axis_index(node, axis)) * spacing_[axis];
  }

  void node_point(std::size_t node, std::span<double> x) const {
    for (std::size_t c = 0; c < dim(); ++c) x[c] = coordinate(node, c);
  }

  // Nearest node; points outside the box map to the nearest boundary node.
  std::size_t nearest(std::span<const double> x) const {
    std::size_t node = 0;
    for (std::size_t c = 0; c < dim(); ++c) {
      const double pos = std::round((x[c] - lo_[c]) / spacing_[c]);
      const double clamped = std::clamp(pos, 0.0, static_cast<double>(points_[c] - 1));
      node += static_cast<std::size_t>(clamped) * strides_[c];
    }
    return node;
  }

  bool on_boundary(std::size_t node) const {
    for (std::size_t c = 0; c < dim(); ++c) {
      const std::size_t i = axis_index(node, c);
      if (i == 0 || i + 1 == points_[c]) return true;
    }
    return false;
  }

  // The node obtained by moving every boundary index one step inward.
  std::size_t interior_neighbor(std::size_t node) const {
    std::size_t out = 0;
    for (std::size_t c = 0; c < dim(); ++c) {
      const std::size_t i = std::clamp<std::size_t>(axis_index(node, c), 1, points_[c] - 2);
      out += i * strides_[c];
    }
    return out;
  }

  friend bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.points_ == b.points_;
  }

 private:
  std::vector<double> lo_, hi_;
  std::vector<std::size_t> points_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t nodes_ = 0;
};

// Uniform lattice over the action box. Atom 0 is the lower corner; the last
// axis varies fastest.
class ActionGrid {
 public:
  ActionGrid() = default;

  ActionGrid(const Box& box, std::vector<std::size_t> counts) : box_(box), counts_(std::move(counts)) {
    require(box.valid(), "ActionGrid: action box must be nonempty and compact");
    require(counts_.size() == box.dim(), "ActionGrid: one count per action axis");
    std::size_t total = 1;
    for (std::size_t c = 0; c < counts_.size(); ++c) {
      if (box.lo[c] == box.hi[c]) {
        require(counts_[c] == 1, "ActionGrid: a degenerate axis takes exactly one point");
      } else {
        require(counts_[c] >= 2, "ActionGrid: need >= 2 points to include both box corners");
      }
      total *= counts_[c];
    }
    const std::size_t k = box.dim();
    atoms_.resize(total * k);
    for (std::size_t i = 0; i < total; ++i) {
      std::size_t rest = i;
      for (std::size_t c = k; c-- > 0;) {
        const std::size_t idx = rest % counts_[c];
        rest /= counts_[c];
        double v = box.lo[c];
        if (counts_[c] > 1) {
          v = idx + 1 == counts_[c]
                  ? box.hi[c]
                  : box.lo[c] + (box.hi[c] - box.lo[c]) * static_cast<double>(idx) /
                                    static_cast<double>(counts_[c] - 1);
        }
        atoms_[i * k + c] = v;
      }
    }
  }

  // Same count on every non-degenerate axis.
  static ActionGrid uniform(const Box& box, std::size_t count) {
    std::vector<std::size_t> counts(box.dim());
    for (std::size_t c = 0; c < box.dim(); ++c) counts[c] = box.lo[c] == box.hi[c] ? 1 : count;
    return ActionGrid(box, counts);
  }

  std::size_t size() const { return box_.dim() == 0 ? 0 : atoms_.size() / box_.dim(); }
  std::size_t action_dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<std::size_t>& counts() const { return counts_; }

  std::span<const double> atom(std::size_t i) const {
    return {&atoms_[i * box_.dim()], box_.dim()};
  }

  // Index of the lattice point nearest to a.
  std::size_t nearest(std::span<const double> a) const {
    std::size_t idx = 0;
    for (std::size_t c = 0; c < box_.dim(); ++c) {
      std::size_t i = 0;
      if (counts_[c] > 1) {
        const double pos = (a[c] - box_.lo[c]) / (box_.hi[c] - box_.lo[c]) *
                           static_cast<double>(counts_[c] - 1);
        i = static_cast<std::size_t>(
            std::clamp(std::round(pos), 0.0, static_cast<double>(counts_[c] - 1)));
      }
      idx = idx * counts_[c] + i;
    }
    return idx;
  }

  friend bool operator==(const ActionGrid& a, const ActionGrid& b) {
    return a.box_.lo == b.box_.lo && a.box_.hi == b.box_.hi && a.counts_ == b.counts_;
  }

 private:
  Box box_;
  std::vector<std::size_t> counts_;
  std::vector<double> atoms_;
};

}  // namespace mfg
