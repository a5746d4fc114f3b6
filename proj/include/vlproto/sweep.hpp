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

// Grid sweep over contamination, nonrepresentative threshold and top-k,
// reporting structural summary statistics of the resulting prototypes.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/json_format.hpp"
#include "vlproto/pipeline.hpp"

namespace vlproto {

struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<std::size_t> top_ks;

  void validate() const {
    if (alphas.empty() || betas.empty() || top_ks.empty()) {
      throw ValidationError("invalid grid: every axis needs at least one value");
    }
    for (double a : alphas) {
      if (!(a >= 0.0 && a <= 0.5)) throw ValidationError("invalid grid: alpha " + format_double(a) + " not in [0, 0.5]");
    }
    for (double b : betas) {
      if (!(b > 0.0 && b <= 1.0)) throw ValidationError("invalid grid: beta " + format_double(b) + " not in (0, 1]");
    }
    for (std::size_t k : top_ks) {
      if (k < 1) throw ValidationError("invalid grid: top_k must be >= 1");
    }
  }
};

struct SweepRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t top_k = 0;
  std::vector<std::size_t> removed;            ///< per class, label order
  std::vector<std::size_t> nonrepresentative;  ///< |N| per class
  double mean_nonrepresentative = 0.0;
  double mean_rw_size = 0.0;  ///< over all clusters of all classes
  double mean_score = 0.0;    ///< mean text-prototype score over all clusters
};

/// Rows in alpha-major, then beta, then top_k order. Clustering runs once per
/// alpha; the text stage runs per (beta, top_k).
inline std::vector<SweepRow> run_sweep(std::span<const ClassDataset> classes,
                                       const LatentMatrix& latents, const DistillConfig& base,
                                       const SweepGrid& grid, std::size_t workers = 1) {
  grid.validate();
  base.validate();
  if (classes.empty()) throw ValidationError("sweep: dataset has no classes");
  std::vector<SweepRow> rows;
  for (double alpha : grid.alphas) {
    DistillConfig cfg = base;
    cfg.lof.contamination = alpha;
    std::vector<std::optional<ClusteredClass>> clustered(classes.size());
    auto errors = parallel_for(classes.size(), workers, [&](std::size_t i) {
      clustered[i] = cluster_class(classes[i], latents, cfg);
    });
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    for (double beta : grid.betas) {
      for (std::size_t k : grid.top_ks) {
        SweepRow row{alpha, beta, k, {}, {}, 0.0, 0.0, 0.0};
        std::size_t clusters = 0;
        for (const auto& cc : clustered) {
          const ClassTexts t = extract_texts(*cc, beta, k);
          row.removed.push_back(cc->lof.removed.size());
          row.nonrepresentative.push_back(t.nonrepresentative.words.size());
          row.mean_nonrepresentative += static_cast<double>(t.nonrepresentative.words.size());
          for (const auto& tp : t.prototypes) {
            row.mean_rw_size += static_cast<double>(tp.representative_words.entries.size());
            row.mean_score += static_cast<double>(tp.score);
            ++clusters;
          }
        }
        row.mean_nonrepresentative /= static_cast<double>(clustered.size());
        row.mean_rw_size /= static_cast<double>(clusters);
        row.mean_score /= static_cast<double>(clusters);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

namespace detail {
inline std::string join_counts(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}
}  // namespace detail

inline constexpr std::string_view kSweepCsvHeader =
    "alpha,beta,top_k,removed_total,removed_per_class,nonrepresentative_per_class,"
    "mean_nonrepresentative,mean_rw_size,mean_score";

/// CSV with a header row and LF line endings. Per-class columns are
/// ';'-separated in class label order.
inline std::string format_sweep_csv(std::span<const SweepRow> rows) {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    std::size_t total = 0;
    for (auto v : r.removed) total += v;
    out += format_double(r.alpha) + ',' + format_double(r.beta) + ',' + std::to_string(r.top_k) +
           ',' + std::to_string(total) + ',' + detail::join_counts(r.removed) + ',' +
           detail::join_counts(r.nonrepresentative) + ',' + format_double(r.mean_nonrepresentative) +
           ',' + format_double(r.mean_rw_size) + ',' + format_double(r.mean_score) + '\n';
  }
  return out;
}

}  // namespace vlproto
