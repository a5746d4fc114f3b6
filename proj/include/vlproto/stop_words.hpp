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

// Fixed English stop-word list removed before any word counting. The list is
// versioned: editing it changes every downstream keyword set, so bump
// kStopWordsVersion and the golden test together.

#include <algorithm>
#include <array>
#include <string_view>

namespace vlproto {

inline constexpr std::string_view kStopWordsVersion = "en-1";

// Sorted, unique, lowercase.
inline constexpr std::array<std::string_view, 209> kStopWords = {
    "a", "about", "above", "across", "after", "again", "against", "ain", "all", "almost",
    "along", "already", "also", "although", "always", "am", "among", "amongst", "an",
    "and", "any", "anyway", "are", "aren", "around", "as", "at", "be", "because", "been",
    "before", "behind", "being", "below", "beneath", "beside", "besides", "between",
    "beyond", "both", "but", "by", "can", "cannot", "could", "couldn", "d", "did", "didn",
    "do", "does", "doesn", "doing", "don", "down", "during", "each", "either", "else",
    "etc", "even", "ever", "every", "few", "for", "from", "further", "had", "hadn", "has",
    "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "however", "i", "if", "in", "into", "is", "isn", "it", "its",
    "itself", "just", "let", "ll", "m", "may", "me", "might", "mightn", "more", "most",
    "much", "must", "mustn", "my", "myself", "near", "needn", "neither", "no", "nor",
    "not", "now", "o", "of", "off", "often", "on", "once", "only", "onto", "or", "other",
    "ought", "our", "ours", "ourselves", "out", "over", "own", "per", "quite", "rather",
    "re", "s", "same", "shall", "shan", "she", "should", "shouldn", "since", "so", "some",
    "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "though", "through", "thus", "to", "too",
    "toward", "towards", "under", "unless", "until", "up", "upon", "us", "ve", "very",
    "via", "was", "wasn", "we", "were", "weren", "what", "whatever", "when", "whenever",
    "where", "wherever", "whether", "which", "while", "who", "whom", "whose", "why",
    "will", "with", "within", "without", "won", "would", "wouldn", "y", "yet", "you",
    "your", "yours", "yourself", "yourselves",
};

inline bool is_stop_word(std::string_view word) {
  return std::binary_search(kStopWords.begin(), kStopWords.end(), word);
}

}  // namespace vlproto
