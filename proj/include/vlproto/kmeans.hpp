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

// Seeded k-means (k-means++ init, Lloyd iterations) whose centers serve as
// per-cluster image prototypes.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/interchange.hpp"
#include "vlproto/json_format.hpp"
#include "vlproto/rng.hpp"

namespace vlproto {

/// Row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return std::span<double>(values).subspan(i * cols, cols); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * cols, cols);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct KMeansParams {
  std::size_t n_clusters = 1;
  std::size_t max_iter = 300;
  /// Convergence threshold on the largest squared center movement.
  double tol = 1e-6;
  std::uint64_t seed = 0;
  std::size_t n_restarts = 1;

  void validate(std::size_t n_points) const {
    if (n_clusters < 1) throw ValidationError("n_clusters must be >= 1");
    if (n_clusters > n_points) {
      throw ValidationError("n_clusters " + std::to_string(n_clusters) + " exceeds " +
                            std::to_string(n_points) + " available rows");
    }
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (!(tol >= 0.0)) throw ValidationError("tol must be >= 0");
    if (n_restarts < 1) throw ValidationError("n_restarts must be >= 1");
  }
};

struct ClusterResult {
  std::vector<std::size_t> assignments;
  Matrix centers;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  /// Inertia after every assignment step, then the final inertia.
  std::vector<double> inertia_history;
};

struct ImagePrototype {
  std::size_t cluster_id = 0;
  std::vector<std::uint32_t> tensor_shape;
  std::vector<double> values;
  std::size_t member_count = 0;
};

namespace detail {

inline double sq_dist(std::span<const float> x, std::span<const double> c) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = static_cast<double>(x[j]) - c[j];
    s += d * d;
  }
  return s;
}

inline void copy_row(std::span<const float> src, std::span<double> dst) {
  for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
}

}  // namespace detail

/// Row indices chosen by k-means++ seeding. The first is uniform; each next
/// one is drawn with probability proportional to its squared distance to the
/// nearest chosen row. If every remaining row coincides with a chosen one,
/// the draw is uniform over unchosen rows, so indices are always distinct.
inline std::vector<std::size_t> kmeans_pp_indices(const LatentMatrix& points,
                                                  std::size_t n_clusters, std::uint64_t seed) {
  const std::size_t n = points.n_samples();
  if (n_clusters < 1) throw ValidationError("n_clusters must be >= 1");
  if (n_clusters > n) {
    throw ValidationError("n_clusters " + std::to_string(n_clusters) + " exceeds " +
                          std::to_string(n) + " points");
  }
  SplitMix64 rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  Matrix c(1, points.dim());

  auto take = [&](std::size_t idx) {
    chosen.push_back(idx);
    taken[idx] = true;
    detail::copy_row(points.row(idx), c.row(0));
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = taken[i] ? 0.0 : std::min(nearest[i], detail::sq_dist(points.row(i), c.row(0)));
    }
  };

  take(static_cast<std::size_t>(rng.below(n)));
  while (chosen.size() < n_clusters) {
    double total = 0.0;
    for (double w : nearest) total += w;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        acc += nearest[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      std::uint64_t r = rng.below(n - chosen.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    take(pick);
  }
  return chosen;
}

inline Matrix kmeans_pp_init(const LatentMatrix& points, std::size_t n_clusters,
                             std::uint64_t seed) {
  const auto idx = kmeans_pp_indices(points, n_clusters, seed);
  Matrix centers(idx.size(), points.dim());
  for (std::size_t c = 0; c < idx.size(); ++c) detail::copy_row(points.row(idx[c]), centers.row(c));
  return centers;
}

namespace detail {

// Nearest center for every row, ties toward the lower cluster id. Clusters
// left empty get the row farthest from its center (lower index on ties)
// among clusters with more than one member.
inline void assign_rows(const LatentMatrix& points, Matrix& centers,
                        std::vector<std::size_t>& labels, std::vector<double>& d2) {
  const std::size_t n = points.n_samples();
  const std::size_t k = centers.rows;
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = sq_dist(points.row(i), centers.row(c));
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    labels[i] = arg;
    d2[i] = best;
    ++counts[arg];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t far = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[labels[i]] > 1 && (far == n || d2[i] > d2[far])) far = i;
    }
    --counts[labels[far]];
    labels[far] = c;
    d2[far] = 0.0;
    counts[c] = 1;
    copy_row(points.row(far), centers.row(c));
  }
}

inline Matrix member_means(const LatentMatrix& points, const std::vector<std::size_t>& labels,
                           std::size_t k) {
  Matrix means(k, points.dim());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto dst = means.row(labels[i]);
    auto src = points.row(i);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (double& v : means.row(c)) v /= static_cast<double>(counts[c]);
  }
  return means;
}

inline double total_inertia(const LatentMatrix& points, const Matrix& centers,
                            const std::vector<std::size_t>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) s += sq_dist(points.row(i), centers.row(labels[i]));
  return s;
}

inline ClusterResult lloyd(const LatentMatrix& points, const KMeansParams& params,
                           std::uint64_t seed) {
  const std::size_t n = points.n_samples();
  const std::size_t k = params.n_clusters;
  ClusterResult r;
  r.centers = kmeans_pp_init(points, k, seed);
  std::vector<std::size_t> labels(n), prev;
  std::vector<double> d2(n);
  double last_shift = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= params.max_iter; ++it) {
    const Matrix before = r.centers;
    assign_rows(points, r.centers, labels, d2);
    r.iterations_run = it;
    double s = 0.0;
    for (double v : d2) s += v;
    r.inertia_history.push_back(s);
    // Stop only where the centers are the means of an assignment that is
    // also nearest-center, so both cluster invariants hold on exit.
    const bool stable = labels == prev && r.centers == before;
    if (stable && (last_shift < params.tol || last_shift == 0.0)) break;
    Matrix next = member_means(points, labels, k);
    last_shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double m = 0.0;
      for (std::size_t j = 0; j < next.cols; ++j) {
        const double d = next.row(c)[j] - r.centers.row(c)[j];
        m += d * d;
      }
      last_shift = std::max(last_shift, m);
    }
    r.centers = std::move(next);
    prev = labels;
  }
  r.assignments = std::move(labels);
  r.inertia = total_inertia(points, r.centers, r.assignments);
  r.inertia_history.push_back(r.inertia);
  return r;
}

}  // namespace detail

/// Fits k-means. With n_restarts > 1, restart r uses restart_seed(seed, r)
/// and the lowest-inertia run wins (earliest restart on ties).
inline ClusterResult kmeans_fit(const LatentMatrix& points, const KMeansParams& params) {
  params.validate(points.n_samples());
  ClusterResult best;
  for (std::size_t r = 0; r < params.n_restarts; ++r) {
    ClusterResult run = detail::lloyd(points, params, restart_seed(params.seed, r));
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

inline std::vector<ImagePrototype> image_prototypes(const ClusterResult& result,
                                                    const std::vector<std::uint32_t>& tensor_shape) {
  std::uint64_t product = 1;
  for (auto s : tensor_shape) product *= s;
  if (product != result.centers.cols) {
    throw ValidationError("tensor shape product " + std::to_string(product) +
                          " does not match center dim " + std::to_string(result.centers.cols));
  }
  std::vector<ImagePrototype> out(result.centers.rows);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c].cluster_id = c;
    out[c].tensor_shape = tensor_shape;
    auto row = result.centers.row(c);
    out[c].values.assign(row.begin(), row.end());
  }
  for (std::size_t a : result.assignments) ++out.at(a).member_count;
  return out;
}

inline Json to_json(const ClusterResult& r) {
  return Json{{"assignments", r.assignments},
              {"inertia", r.inertia},
              {"iterations_run", r.iterations_run}};
}

}  // namespace vlproto
