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

// Distances between empirical measures on R^d and between measure flows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "mfg/errors.hpp"
#include "mfg/flow.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace detail {

// Integral over u in (0,1) of cost(Qa(u), Qb(u)) for the empirical quantile
// functions of two sorted samples. Breakpoints live on the integer lattice
// with denominator na * nb, so the weights are exact.
template <typename Cost>
double sorted_coupling_cost(std::span<const double> a, std::span<const double> b, Cost cost) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  if (na == nb) {
    double total = 0.0;
    for (std::size_t i = 0; i < na; ++i) total += cost(a[i], b[i]);
    return total / static_cast<double>(na);
  }
  std::size_t i = 0, j = 0;
  std::uint64_t pos = 0;
  double total = 0.0;
  while (i < na && j < nb) {
    const std::uint64_t ea = static_cast<std::uint64_t>(i + 1) * nb;
    const std::uint64_t eb = static_cast<std::uint64_t>(j + 1) * na;
    const std::uint64_t e = std::min(ea, eb);
    total += static_cast<double>(e - pos) * cost(a[i], b[j]);
    pos = e;
    if (ea == e) ++i;
    if (eb == e) ++j;
  }
  return total / (static_cast<double>(na) * static_cast<double>(nb));
}

inline std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline double abs_cost(double x, double y) { return std::abs(x - y); }
inline double truncated_cost(double x, double y) { return std::min(1.0, std::abs(x - y)); }

}  // namespace detail

// Exact W1 between 1-d empirical measures given sorted samples.
inline double wasserstein1_sorted(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "wasserstein1: empty sample set");
  return detail::sorted_coupling_cost(a, b, detail::abs_cost);
}

inline double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "wasserstein1_1d: empty sample set");
  const auto sa = detail::sorted_copy(a);
  const auto sb = detail::sorted_copy(b);
  return wasserstein1_sorted(sa, sb);
}

// Transport cost 1 ^ |x - y| under the sorted (monotone) coupling. For the
// truncated cost this coupling is not always optimal, so the value is an upper
// bound on the truncated-metric distance; it is exact for point masses and
// whenever all matched gaps are below 1.
inline double wasserstein_trunc_sorted(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "wasserstein_trunc: empty sample set");
  return detail::sorted_coupling_cost(a, b, detail::truncated_cost);
}

inline double wasserstein_trunc(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "wasserstein_trunc: empty sample set");
  const auto sa = detail::sorted_copy(a);
  const auto sb = detail::sorted_copy(b);
  return wasserstein_trunc_sorted(sa, sb);
}

// Sliced W1 for d >= 2: the mean of 1-d W1 over `directions` fixed, seeded
// unit vectors.
struct SlicedEstimate {
  double value = 0.0;
  std::size_t directions = 0;
};

inline constexpr std::size_t kDefaultSlices = 64;
inline constexpr std::uint64_t kSliceSeed = 0x5117CE5ull;

inline std::vector<double> slice_directions(std::size_t dim, std::size_t count,
                                            std::uint64_t seed = kSliceSeed) {
  std::vector<double> dirs(dim * count);
  for (std::size_t s = 0; s < count; ++s) {
    double norm = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double z = rng::normal_at(seed, rng::Stream::kDirections, s, c);
      dirs[s * dim + c] = z;
      norm += z * z;
    }
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < dim; ++c) dirs[s * dim + c] /= norm;
  }
  return dirs;
}

template <typename Cost>
SlicedEstimate sliced_distance(std::span<const double> a, std::span<const double> b,
                               std::size_t dim, std::size_t count, Cost cost) {
  require(dim >= 1 && a.size() % dim == 0 && b.size() % dim == 0,
          "sliced distance: sample arrays must be n x d");
  require(!a.empty() && !b.empty(), "sliced distance: empty sample set");
  const auto dirs = slice_directions(dim, count);
  const std::size_t na = a.size() / dim, nb = b.size() / dim;
  double total = 0.0;
  std::vector<double> pa(na), pb(nb);
  for (std::size_t s = 0; s < count; ++s) {
    const double* u = &dirs[s * dim];
    for (std::size_t k = 0; k < na; ++k) {
      pa[k] = std::inner_product(u, u + dim, &a[k * dim], 0.0);
    }
    for (std::size_t k = 0; k < nb; ++k) {
      pb[k] = std::inner_product(u, u + dim, &b[k * dim], 0.0);
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    total += detail::sorted_coupling_cost(std::span<const double>(pa),
                                          std::span<const double>(pb), cost);
  }
  return {total / static_cast<double>(count), count};
}

inline SlicedEstimate sliced_wasserstein1(std::span<const double> a, std::span<const double> b,
                                          std::size_t dim,
                                          std::size_t directions = kDefaultSlices) {
  return sliced_distance(a, b, dim, directions, detail::abs_cost);
}

// W1 on R^d: exact for d = 1, sliced otherwise.
inline double wasserstein1(std::span<const double> a, std::span<const double> b, std::size_t dim) {
  if (dim == 1) return wasserstein1_1d(a, b);
  return sliced_wasserstein1(a, b, dim).value;
}

// Bin layout for tv_binned. Without explicit bounds the bins span the union
// of both sample ranges padded by one bin width on each side.
struct BinSpec {
  std::size_t bins = 100;
  std::optional<double> lo;
  std::optional<double> hi;
};

// (1/2) sum over bins |p_a - p_b|.
inline double tv_binned(std::span<const double> a, std::span<const double> b,
                        const BinSpec& spec = {}) {
  require(!a.empty() && !b.empty(), "tv_binned: empty sample set");
  require(spec.bins >= 1, "tv_binned: need at least one bin");
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const double data_lo = std::min(*amin, *bmin);
  const double data_hi = std::max(*amax, *bmax);
  double lo, width;
  if (spec.lo || spec.hi) {
    require(spec.lo.has_value() && spec.hi.has_value(), "tv_binned: give both bin bounds");
    require(*spec.hi > *spec.lo, "tv_binned: zero-width bins");
    require(*spec.lo <= data_lo && data_hi <= *spec.hi, "tv_binned: bins must cover both samples");
    lo = *spec.lo;
    width = (*spec.hi - *spec.lo) / static_cast<double>(spec.bins);
  } else {
    const double range = data_hi - data_lo;
    const std::size_t inner = spec.bins > 2 ? spec.bins - 2 : 1;
    width = range > 0.0 ? range / static_cast<double>(inner) : 1.0;
    lo = data_lo - width;
  }
  // Integer counts keep the result exactly symmetric in (a, b).
  std::vector<std::size_t> ca(spec.bins, 0), cb(spec.bins, 0);
  const auto bin_of = [&](double x) {
    const double pos = (x - lo) / width;
    const auto b = static_cast<std::size_t>(std::max(0.0, pos));
    return std::min(b, spec.bins - 1);
  };
  for (double x : a) ++ca[bin_of(x)];
  for (double x : b) ++cb[bin_of(x)];
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  double total = 0.0;
  for (std::size_t i = 0; i < spec.bins; ++i) {
    total += std::abs(static_cast<double>(ca[i]) / na - static_cast<double>(cb[i]) / nb);
  }
  return std::min(1.0, 0.5 * total);
}

enum class FlowMetric { kWasserstein1, kTruncated, kTotalVariation };

inline double slice_distance(const EmpiricalFlow& a, const EmpiricalFlow& b, std::size_t j,
                             FlowMetric metric) {
  const std::size_t d = a.dim();
  switch (metric) {
    case FlowMetric::kWasserstein1:
      return d == 1 ? wasserstein1_sorted(a.sorted(j), b.sorted(j))
                    : sliced_wasserstein1(a.at(j), b.at(j), d).value;
    case FlowMetric::kTruncated:
      return d == 1 ? wasserstein_trunc_sorted(a.sorted(j), b.sorted(j))
                    : sliced_distance(a.at(j), b.at(j), d, kDefaultSlices, detail::truncated_cost)
                          .value;
    case FlowMetric::kTotalVariation:
      require(d == 1, "flow_distance: binned TV is defined for d = 1");
      return tv_binned(a.at(j), b.at(j));
  }
  return 0.0;
}

// Per-time distances between two flows on the same grid.
inline std::vector<double> flow_distance_profile(const EmpiricalFlow& a, const EmpiricalFlow& b,
                                                 FlowMetric metric = FlowMetric::kWasserstein1) {
  require(a.grid() == b.grid(), "flow_distance: time grids differ");
  require(a.dim() == b.dim(), "flow_distance: dimensions differ");
  std::vector<double> out(a.grid().points());
  parallel_for(out.size(), [&](std::size_t j) { out[j] = slice_distance(a, b, j, metric); });
  return out;
}

// sup over grid times of the per-time distance.
inline double flow_distance(const EmpiricalFlow& a, const EmpiricalFlow& b,
                            FlowMetric metric = FlowMetric::kWasserstein1) {
  const auto profile = flow_distance_profile(a, b, metric);
  return *std::max_element(profile.begin(), profile.end());
}

}  // namespace mfg
