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

// Portable random numbers and seed derivation.
//
// Everything here is defined bit-for-bit so that other implementations can
// reproduce the same seeds and the same k-means++ draws:
//
//   splitmix64:   state += 0x9E3779B97F4A7C15; z = mix(state)
//   mix(z):       z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                 return z ^ (z >> 31)
//   uniform01:    (next() >> 11) * 2^-53
//   below(n):     rejection sampling on next() with limit 2^64 - (2^64 mod n)
//   fnv1a64(s):   FNV-1a over the UTF-8 bytes of s
//   class_seed(m, label)        = mix(m ^ mix(fnv1a64(label)))
//   pair_seed(m, label, id)     = mix(class_seed(m, label) ^ mix(id + 0x9E3779B97F4A7C15))
//   restart_seed(s, r)          = r == 0 ? s : mix(s + r * 0x9E3779B97F4A7C15)

#include <cstdint>
#include <limits>
#include <string_view>

namespace vlproto {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// SplitMix64 generator. Small state, full period 2^64, passes BigCrush.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t class_seed(std::uint64_t master_seed,
                                   std::string_view label) noexcept {
  return mix64(master_seed ^ mix64(fnv1a64(label)));
}

constexpr std::uint64_t pair_seed(std::uint64_t master_seed,
                                  std::string_view label,
                                  std::uint64_t cluster_id) noexcept {
  return mix64(class_seed(master_seed, label) ^ mix64(cluster_id + kGoldenGamma));
}

constexpr std::uint64_t restart_seed(std::uint64_t seed,
                                     std::uint64_t restart) noexcept {
  return restart == 0 ? seed : mix64(seed + restart * kGoldenGamma);
}

}  // namespace vlproto
