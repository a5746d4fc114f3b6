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

// Frequency-based text prototypes.
//
// For one class:
//   1. document frequency of every non-stop word over the class captions;
//   2. nonrepresentative words N: doc_freq / class_size > beta;
// then for every cluster of that class:
//   3. document frequency f_c over the cluster captions, dropping stop words
//      and N, keeping the top k by (f_c desc, word asc) as R_w;
//   4. Score(t) = sum of f_c over the R_w words that occur in t;
//   5. the highest-scoring caption (earliest on ties) is the text prototype.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/json_format.hpp"
#include "vlproto/stop_words.hpp"

namespace vlproto {

namespace unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one UTF-8 sequence at `pos` and advances it. Malformed input
/// yields U+FFFD and consumes one byte.
inline char32_t decode(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(s[i]); };
  const std::uint8_t b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacement;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const std::uint8_t b = byte(pos + i);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += len;
  return cp;
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Letters and digits. ASCII is exact; above ASCII, everything is a word
/// character except spaces, controls, and the punctuation and symbol blocks
/// listed here.
inline bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  }
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp == 0x37E || cp == 0x387 || (cp >= 0x55A && cp <= 0x55F) || cp == 0x589) return false;
  if (cp == 0x5BE || cp == 0x5C0 || cp == 0x5C3 || cp == 0x5C6 || cp == 0x5F3 || cp == 0x5F4)
    return false;
  if (cp == 0x60C || cp == 0x61B || cp == 0x61F || (cp >= 0x66A && cp <= 0x66D) || cp == 0x6D4)
    return false;
  if (cp == 0x964 || cp == 0x965 || cp == 0x1680) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation, spaces
  if (cp >= 0x20A0 && cp <= 0x2BFF) return false;  // currency .. misc symbols/arrows
  if (cp >= 0x2E00 && cp <= 0x2E7F) return false;
  if (cp >= 0x3000 && cp <= 0x3004) return false;
  if (cp >= 0x3008 && cp <= 0x3020) return false;
  if (cp == 0x3030 || cp == 0x303D || cp == 0x30FB) return false;
  if (cp >= 0xE000 && cp <= 0xF8FF) return false;  // private use
  if (cp >= 0xFE10 && cp <= 0xFE1F) return false;
  if (cp >= 0xFE30 && cp <= 0xFE6F) return false;
  if (cp == 0xFEFF) return false;
  if ((cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
      (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65))
    return false;
  if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
  return true;
}

/// Simple lowercase mapping for ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic.
inline char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

}  // namespace unicode

/// Lowercased runs of letters and digits, in order, duplicates kept.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = unicode::decode(text, pos);
    if (unicode::is_word_char(cp)) {
      unicode::encode(unicode::to_lower(cp), cur);
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::vector<std::string> remove_stop_words(std::vector<std::string> words) {
  std::erase_if(words, [](const std::string& w) { return is_stop_word(w); });
  return words;
}

namespace detail {

// Number of captions containing each non-stop word.
inline std::map<std::string, std::size_t> document_frequencies(
    std::span<const std::string> captions) {
  std::map<std::string, std::size_t> df;
  for (const auto& c : captions) {
    std::set<std::string> distinct;
    for (auto& w : remove_stop_words(tokenize(c))) distinct.insert(std::move(w));
    for (const auto& w : distinct) ++df[w];
  }
  return df;
}

}  // namespace detail

struct Vocabulary {
  std::map<std::string, std::size_t> doc_freq;
  std::size_t class_size = 0;
};

inline Vocabulary class_vocabulary(std::span<const std::string> class_captions) {
  if (class_captions.empty()) throw ValidationError("class_vocabulary: no captions");
  return Vocabulary{detail::document_frequencies(class_captions), class_captions.size()};
}

struct NonrepresentativeSet {
  std::set<std::string> words;
  double beta = 0.2;

  bool contains(const std::string& w) const { return words.count(w) != 0; }
};

inline void validate_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ValidationError("beta must be in (0, 1], got " + format_double(beta));
  }
}

/// Words whose class document frequency exceeds beta (strictly).
inline NonrepresentativeSet nonrepresentative_words(const Vocabulary& vocab, double beta) {
  validate_beta(beta);
  NonrepresentativeSet n{{}, beta};
  const double size = static_cast<double>(vocab.class_size);
  for (const auto& [w, f] : vocab.doc_freq) {
    if (static_cast<double>(f) / size > beta) n.words.insert(w);
  }
  return n;
}

struct KeywordEntry {
  std::string word;
  std::size_t freq = 0;

  friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

struct RepresentativeWords {
  std::vector<KeywordEntry> entries;

  friend bool operator==(const RepresentativeWords&, const RepresentativeWords&) = default;
};

inline RepresentativeWords cluster_representative_words(
    std::span<const std::string> cluster_captions, const NonrepresentativeSet& n,
    std::size_t top_k) {
  if (top_k < 1) throw ValidationError("top_k must be >= 1");
  RepresentativeWords rw;
  for (auto& [w, f] : detail::document_frequencies(cluster_captions)) {
    if (!n.contains(w)) rw.entries.push_back({w, f});
  }
  // The map is already word-ascending, so a stable sort on freq gives the
  // (freq desc, word asc) order.
  std::stable_sort(rw.entries.begin(), rw.entries.end(),
                   [](const KeywordEntry& a, const KeywordEntry& b) { return a.freq > b.freq; });
  if (rw.entries.size() > top_k) rw.entries.resize(top_k);
  return rw;
}

/// Sum of R_w frequencies over the R_w words present in the caption; each
/// word counts once no matter how often it occurs.
inline std::uint64_t score_caption(std::string_view caption, const RepresentativeWords& rw) {
  const auto tokens = tokenize(caption);
  const std::unordered_set<std::string> present(tokens.begin(), tokens.end());
  std::uint64_t score = 0;
  for (const auto& e : rw.entries) {
    if (present.count(e.word)) score += e.freq;
  }
  return score;
}

struct TextPrototype {
  std::string text;
  std::uint64_t score = 0;
  std::size_t cluster_id = 0;
  /// Position of the chosen caption within the cluster's captions.
  std::size_t caption_index = 0;
  RepresentativeWords representative_words;
};

inline TextPrototype select_text_prototype(std::span<const std::string> cluster_captions,
                                           const RepresentativeWords& rw,
                                           std::size_t cluster_id) {
  if (cluster_captions.empty()) throw ValidationError("select_text_prototype: empty cluster");
  TextPrototype best;
  best.cluster_id = cluster_id;
  best.representative_words = rw;
  for (std::size_t i = 0; i < cluster_captions.size(); ++i) {
    const std::uint64_t s = score_caption(cluster_captions[i], rw);
    if (i == 0 || s > best.score) {
      best.score = s;
      best.caption_index = i;
    }
  }
  best.text = cluster_captions[best.caption_index];
  return best;
}

/// Per-cluster debug record with the same columns as a keyword table:
/// cluster id, size, nonrepresentative words, (word, freq) keywords, prototype.
inline Json text_cluster_json(const TextPrototype& tp, std::size_t cluster_size,
                              const NonrepresentativeSet& n) {
  Json keywords = Json::array();
  for (const auto& e : tp.representative_words.entries) keywords.push_back(Json::array({e.word, e.freq}));
  return Json{{"cluster_id", tp.cluster_id},
              {"size", cluster_size},
              {"nonrepresentative", Json(std::vector<std::string>(n.words.begin(), n.words.end()))},
              {"feature_keywords", std::move(keywords)},
              {"text_prototype", tp.text},
              {"score", tp.score}};
}

}  // namespace vlproto
