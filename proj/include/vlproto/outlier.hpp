// Copyright 2026 The vlproto Authors
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

// Local Outlier Factor and contamination-based removal.
//
//   k-distance(p)      distance from p to its k-th nearest other point
//   N_k(p)             every other point within k-distance(p) (ties included)
//   reach_k(p, o)      max(k-distance(o), d(p, o))
//   lrd(p)             1 / mean_{o in N_k(p)} reach_k(p, o), or kLrdCap if that mean is 0
//   LOF(p)             mean_{o in N_k(p)} lrd(o) / lrd(p)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/interchange.hpp"
#include "vlproto/json_format.hpp"

namespace vlproto {

/// Local reachability density used when every neighbor coincides with the
/// point (mean reachability distance 0).
inline constexpr double kLrdCap = 1e12;

struct LofParams {
  std::size_t n_neighbors = 10;
  double contamination = 0.05;

  void validate() const {
    if (n_neighbors < 1) throw ValidationError("n_neighbors must be >= 1");
    if (!(contamination >= 0.0 && contamination <= 0.5)) {
      throw ValidationError("contamination must be in [0, 0.5], got " +
                            format_double(contamination));
    }
  }
};

struct LofReport {
  std::vector<double> scores;
  std::vector<std::size_t> removed;
  std::vector<std::size_t> kept;
};

/// Dense symmetric n x n matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), v_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

inline SquareMatrix pairwise_sq_distances(const LatentMatrix& points) {
  const std::size_t n = points.n_samples();
  if (n == 0) throw ValidationError("pairwise distances need at least one point");
  SquareMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = points.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = points.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) {
        const double diff = static_cast<double>(a[c]) - static_cast<double>(b[c]);
        s += diff * diff;
      }
      if (!std::isfinite(s)) throw ValidationError("non-finite distance");
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

inline std::vector<double> lof_scores(const LatentMatrix& points, std::size_t n_neighbors) {
  const std::size_t n = points.n_samples();
  if (n_neighbors < 1) throw ValidationError("n_neighbors must be >= 1");
  if (n <= n_neighbors) {
    throw ValidationError("LOF needs more than n_neighbors=" + std::to_string(n_neighbors) +
                          " points, got " + std::to_string(n));
  }
  SquareMatrix dist = pairwise_sq_distances(points);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dist(i, j) = std::sqrt(dist(i, j));

  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<double> scratch;
  scratch.reserve(n - 1);
  for (std::size_t p = 0; p < n; ++p) {
    scratch.clear();
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) scratch.push_back(dist(p, q));
    std::nth_element(scratch.begin(), scratch.begin() + (n_neighbors - 1), scratch.end());
    kdist[p] = scratch[n_neighbors - 1];
    for (std::size_t q = 0; q < n; ++q)
      if (q != p && dist(p, q) <= kdist[p]) neighbors[p].push_back(q);
  }

  std::vector<double> lrd(n);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    for (std::size_t o : neighbors[p]) sum += std::max(kdist[o], dist(p, o));
    const double mean = sum / static_cast<double>(neighbors[p].size());
    lrd[p] = mean > 0.0 ? 1.0 / mean : kLrdCap;
  }

  std::vector<double> scores(n);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    for (std::size_t o : neighbors[p]) sum += lrd[o];
    scores[p] = sum / static_cast<double>(neighbors[p].size()) / lrd[p];
  }
  return scores;
}

/// floor(alpha * n), with a 1e-9 guard so products such as 0.29 * 100 that
/// land just below an integer in binary floating point still count.
inline std::size_t contamination_count(double alpha, std::size_t n) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

/// Removes the floor(alpha * n) highest-scoring rows (lower index first on
/// ties). Nothing is removed when n <= n_neighbors; scores are then all 1.
inline LofReport filter_outliers(const LatentMatrix& class_points, const LofParams& params) {
  params.validate();
  const std::size_t n = class_points.n_samples();
  if (n == 0) throw ValidationError("filter_outliers: empty class");
  LofReport report;
  if (n <= params.n_neighbors) {
    report.scores.assign(n, 1.0);
    report.kept.resize(n);
    std::iota(report.kept.begin(), report.kept.end(), std::size_t{0});
    return report;
  }
  report.scores = lof_scores(class_points, params.n_neighbors);
  const std::size_t remove = contamination_count(params.contamination, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.scores[a] > report.scores[b];
  });
  report.removed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(remove));
  report.kept.assign(order.begin() + static_cast<std::ptrdiff_t>(remove), order.end());
  std::sort(report.removed.begin(), report.removed.end());
  std::sort(report.kept.begin(), report.kept.end());
  return report;
}

inline Json to_json(const LofReport& r) {
  return Json{{"scores", r.scores}, {"removed", r.removed}, {"kept", r.kept}};
}

}  // namespace vlproto
