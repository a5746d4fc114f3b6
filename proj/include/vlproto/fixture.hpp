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

// Synthetic (latent, caption) datasets for tests, demos and sweeps. Each
// class has a few visual modes; a sample's latent sits near its mode and its
// caption favours the mode's attribute words, so clusters and keywords line
// up the way they would on real data.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "vlproto/interchange.hpp"
#include "vlproto/rng.hpp"

namespace vlproto {

struct FixtureSpec {
  std::size_t n_classes = 5;
  std::size_t per_class = 60;
  std::vector<std::uint32_t> tensor_shape{4, 4, 4};
  std::size_t modes = 3;
  /// Of per_class, how many are drawn far from every mode.
  std::size_t outliers_per_class = 2;
  std::uint64_t seed = 7;
};

struct Fixture {
  LatentMatrix latents;
  std::vector<CaptionRecord> captions;
};

namespace detail {

inline double normal(SplitMix64& rng) {
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <std::size_t N>
const char* pick(SplitMix64& rng, const std::array<const char*, N>& options) {
  return options[rng.below(N)];
}

}  // namespace detail

inline Fixture make_fixture(const FixtureSpec& spec) {
  static constexpr std::array<const char*, 10> kClassNames = {
      "tench", "english springer", "cassette player", "chain saw", "church",
      "french horn", "garbage truck", "gas pump", "golf ball", "parachute"};
  static constexpr std::array<const char*, 3> kSizes = {"small", "large", "medium"};
  static constexpr std::array<const char*, 6> kColors = {"brown", "white", "black",
                                                         "golden", "gray", "spotted"};
  static constexpr std::array<const char*, 5> kActions = {"running", "sitting", "standing",
                                                          "resting", "jumping"};
  static constexpr std::array<const char*, 5> kPlaces = {"grassy field", "sandy beach",
                                                         "snowy road", "wooden floor", "red carpet"};
  static constexpr std::array<const char*, 4> kTextures = {"sleek", "fluffy", "curly", "rough"};

  SplitMix64 rng(spec.seed);
  std::uint64_t dim = 1;
  for (auto s : spec.tensor_shape) dim *= s;
  const std::size_t modes = spec.modes == 0 ? 1 : spec.modes;

  struct Draft {
    std::string label;
    std::size_t serial;
    std::vector<float> latent;
    std::string caption;
  };
  std::vector<Draft> drafts;
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    std::string label = c < kClassNames.size() ? kClassNames[c] : "class " + std::to_string(c);
    std::vector<double> center(dim);
    for (auto& v : center) v = 4.0 * detail::normal(rng);
    std::vector<std::vector<double>> offsets(modes, std::vector<double>(dim));
    std::vector<std::array<const char*, 4>> prefs(modes);
    for (std::size_t m = 0; m < modes; ++m) {
      for (auto& v : offsets[m]) v = 2.0 * detail::normal(rng);
      prefs[m] = {detail::pick(rng, kSizes), detail::pick(rng, kColors),
                  detail::pick(rng, kActions), detail::pick(rng, kPlaces)};
    }
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      const bool outlier = s < spec.outliers_per_class;
      const std::size_t m = rng.below(modes);
      std::vector<float> latent(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        const double v = outlier ? center[j] + 8.0 * detail::normal(rng)
                                 : center[j] + offsets[m][j] + 0.5 * detail::normal(rng);
        latent[j] = static_cast<float>(v);
      }
      auto attr = [&](std::size_t slot, auto& options) {
        return rng.uniform01() < 0.75 ? prefs[m][slot] : detail::pick(rng, options);
      };
      const char* size = attr(0, kSizes);
      const char* color = attr(1, kColors);
      const char* action = attr(2, kActions);
      const char* place = attr(3, kPlaces);
      std::string caption = "The " + label + " in the image is " + size + " and " + color +
                            ", " + action + " on a " + place + ".";
      if (rng.uniform01() < 0.5) {
        caption += std::string(" It has a ") + detail::pick(rng, kTextures) + " surface.";
      }
      drafts.push_back({label, s, std::move(latent), std::move(caption)});
    }
  }

  // Interleave classes so row order says nothing about labels.
  for (std::size_t i = drafts.size(); i > 1; --i) {
    std::swap(drafts[i - 1], drafts[rng.below(i)]);
  }
  Fixture f;
  std::vector<float> data;
  data.reserve(drafts.size() * dim);
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    data.insert(data.end(), d.latent.begin(), d.latent.end());
    std::string id = d.label;
    for (char& ch : id)
      if (ch == ' ') ch = '_';
    f.captions.push_back({i, id + "_" + std::to_string(d.serial), d.label, d.caption, 0});
  }
  f.latents = LatentMatrix(drafts.size(), spec.tensor_shape, std::move(data));
  return f;
}

}  // namespace vlproto
