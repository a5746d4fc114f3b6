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

// Brute-force reference implementations used only by the tests. They work
// on plain nested vectors in long double and share no code with the
// library beyond the input containers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vlproto/interchange.hpp"

namespace oracle {

using Points = std::vector<std::vector<long double>>;

inline Points to_points(const vlproto::LatentMatrix& m) {
  Points p(m.n_samples());
  for (std::size_t i = 0; i < m.n_samples(); ++i) {
    for (float v : m.row(i)) p[i].push_back(v);
  }
  return p;
}

inline long double distance(const std::vector<long double>& a, const std::vector<long double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Textbook LOF: sort every point's neighbors, take all ties at the k-th
/// distance, lrd capped at 1e12 when the mean reachability is zero.
inline std::vector<double> lof(const Points& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<long double> kdist(n);
  std::vector<std::vector<std::size_t>> hood(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<std::pair<long double, std::size_t>> others;
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) others.emplace_back(distance(pts[p], pts[q]), q);
    std::sort(others.begin(), others.end());
    kdist[p] = others[k - 1].first;
    for (const auto& [d, q] : others) {
      if (d > kdist[p]) break;
      hood[p].push_back(q);
    }
  }
  std::vector<long double> lrd(n);
  for (std::size_t p = 0; p < n; ++p) {
    long double total = 0;
    for (std::size_t o : hood[p]) total += std::max(kdist[o], distance(pts[p], pts[o]));
    const long double mean = total / hood[p].size();
    lrd[p] = mean == 0 ? 1e12L : 1 / mean;
  }
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    long double ratio = 0;
    for (std::size_t o : hood[p]) ratio += lrd[o] / lrd[p];
    out[p] = static_cast<double>(ratio / hood[p].size());
  }
  return out;
}

inline long double sq_naive(const std::vector<long double>& a, const std::vector<long double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Within-cluster sum of squares for a labelling, centers recomputed.
inline long double partition_inertia(const Points& pts, const std::vector<int>& labels, int k) {
  long double total = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<long double> mean(pts[0].size(), 0);
    int count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (labels[i] != c) continue;
      ++count;
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += pts[i][j];
    }
    if (count == 0) return std::numeric_limits<long double>::infinity();
    for (auto& v : mean) v /= count;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (labels[i] == c) total += sq_naive(pts[i], mean);
  }
  return total;
}

/// Optimal 2-means inertia by enumerating every bipartition (point 0 fixed
/// in cluster 0, so 2^(n-1) - 1 candidates).
inline long double best_bipartition(const Points& pts) {
  const std::size_t n = pts.size();
  long double best = std::numeric_limits<long double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> labels(n, 0);
    for (std::size_t i = 1; i < n; ++i) labels[i] = (mask >> (i - 1)) & 1u;
    best = std::min(best, partition_inertia(pts, labels, 2));
  }
  return best;
}

/// Lowercase ASCII word split, enough for the ASCII corpora the tests build.
inline std::vector<std::string> ascii_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Score by scanning every keyword against every caption word.
inline std::uint64_t score(const std::string& caption,
                           const std::vector<std::pair<std::string, std::size_t>>& keywords) {
  const auto words = ascii_words(caption);
  std::uint64_t s = 0;
  for (const auto& [w, f] : keywords) {
    if (std::find(words.begin(), words.end(), w) != words.end()) s += f;
  }
  return s;
}

/// Random sentence over a small vocabulary, mixing in stop words.
inline std::string random_caption(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
  static const std::vector<std::string> fillers = {"the", "is", "of", "a", "with", "and", "on"};
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<std::size_t> fill(0, fillers.size() - 1);
  std::bernoulli_distribution stop(0.3);
  std::string s;
  const int words = len(rng);
  for (int i = 0; i < words; ++i) {
    if (i) s += (i % 4 == 0) ? ", " : " ";
    s += stop(rng) ? fillers[fill(rng)] : vocab[pick(rng)];
  }
  return s + ".";
}

inline std::vector<std::string> word_pool(std::size_t n) {
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < n; ++i) pool.push_back("w" + std::to_string(i));
  return pool;
}

}  // namespace oracle
