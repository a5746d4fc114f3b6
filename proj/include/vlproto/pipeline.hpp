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

// Per-class distillation: outlier removal, clustering, text prototypes, and
// the synthesis manifest handed to a generative backend.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vlproto/error.hpp"
#include "vlproto/interchange.hpp"
#include "vlproto/json_format.hpp"
#include "vlproto/kmeans.hpp"
#include "vlproto/outlier.hpp"
#include "vlproto/rng.hpp"
#include "vlproto/stop_words.hpp"
#include "vlproto/text.hpp"

namespace vlproto {

/// Caption prompt used when the captions were generated; carried in the
/// manifest so the exporter and the manifest agree.
inline constexpr std::string_view kDefaultPromptTemplate =
    "Describe the physical appearance of the {$CLASSNAME} in the image. "
    "Include details about its shape, posture, color, and any distinct features.";

inline constexpr std::uint32_t kManifestFormatVersion = 1;

struct DistillConfig {
  std::size_t ipc = 10;
  LofParams lof{};
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t n_restarts = 1;
  double beta = 0.2;
  std::size_t top_k = 35;
  std::uint64_t master_seed = 0;
  double noise_strength = 0.7;
  std::string prompt_template{kDefaultPromptTemplate};

  void validate() const {
    if (ipc < 1) throw ValidationError("ipc must be >= 1");
    lof.validate();
    validate_beta(beta);
    if (top_k < 1) throw ValidationError("top_k must be >= 1");
    if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
    if (!(tol >= 0.0)) throw ValidationError("tol must be >= 0");
    if (n_restarts < 1) throw ValidationError("n_restarts must be >= 1");
    if (!(noise_strength >= 0.0 && noise_strength <= 1.0)) {
      throw ValidationError("noise_strength must be in [0, 1], got " +
                            format_double(noise_strength));
    }
  }

  KMeansParams kmeans_for(const std::string& label) const {
    return KMeansParams{ipc, max_iter, tol, class_seed(master_seed, label), n_restarts};
  }

  friend bool operator==(const DistillConfig& a, const DistillConfig& b) {
    return a.ipc == b.ipc && a.lof.n_neighbors == b.lof.n_neighbors &&
           a.lof.contamination == b.lof.contamination && a.max_iter == b.max_iter &&
           a.tol == b.tol && a.n_restarts == b.n_restarts && a.beta == b.beta &&
           a.top_k == b.top_k && a.master_seed == b.master_seed &&
           a.noise_strength == b.noise_strength && a.prompt_template == b.prompt_template;
  }
};

inline Json to_json(const DistillConfig& c) {
  return Json{{"ipc", c.ipc},
              {"n_neighbors", c.lof.n_neighbors},
              {"contamination", c.lof.contamination},
              {"max_iter", c.max_iter},
              {"tol", c.tol},
              {"n_restarts", c.n_restarts},
              {"beta", c.beta},
              {"top_k", c.top_k},
              {"master_seed", c.master_seed},
              {"noise_strength", c.noise_strength},
              {"prompt_template", c.prompt_template},
              {"stop_words_version", std::string(kStopWordsVersion)}};
}

inline DistillConfig config_from_json(const Json& j) {
  try {
    DistillConfig c;
    c.ipc = j.at("ipc").get<std::size_t>();
    c.lof.n_neighbors = j.at("n_neighbors").get<std::size_t>();
    c.lof.contamination = j.at("contamination").get<double>();
    c.max_iter = j.at("max_iter").get<std::size_t>();
    c.tol = j.at("tol").get<double>();
    c.n_restarts = j.at("n_restarts").get<std::size_t>();
    c.beta = j.at("beta").get<double>();
    c.top_k = j.at("top_k").get<std::size_t>();
    c.master_seed = j.at("master_seed").get<std::uint64_t>();
    c.noise_strength = j.at("noise_strength").get<double>();
    c.prompt_template = j.at("prompt_template").get<std::string>();
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("manifest config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Per-class stages

/// Outlier removal and clustering for one class.
struct ClusteredClass {
  std::string label;
  std::vector<std::uint32_t> tensor_shape;
  std::vector<std::string> class_captions;  ///< every caption of the class
  LofReport lof;                            ///< indices are positions within the class
  std::vector<std::size_t> kept_rows;       ///< latent row indices, ascending
  ClusterResult clusters;                   ///< fitted on kept_rows, in that order
  std::vector<std::vector<std::size_t>> members;          ///< latent rows per cluster
  std::vector<std::vector<std::string>> cluster_captions;  ///< captions per cluster
};

struct ClassTexts {
  NonrepresentativeSet nonrepresentative;
  std::vector<TextPrototype> prototypes;  ///< one per cluster id
};

struct PrototypePair {
  std::string class_label;
  std::size_t cluster_id = 0;
  std::vector<std::uint32_t> tensor_shape;
  std::vector<double> image_prototype;
  std::string text_prototype;
  double noise_strength = 0.7;
  std::uint64_t seed = 0;

  friend bool operator==(const PrototypePair&, const PrototypePair&) = default;
};

struct ClassOutcome {
  ClusteredClass clustered;
  ClassTexts texts;
  std::vector<PrototypePair> pairs;
};

inline ClusteredClass cluster_class(const ClassDataset& cls, const LatentMatrix& latents,
                                    const DistillConfig& config) {
  ClusteredClass out;
  out.label = cls.label;
  out.tensor_shape = latents.tensor_shape();
  out.class_captions = cls.captions();
  const auto rows = cls.indices();
  const LatentMatrix points = latents.select_rows(rows);
  out.lof = filter_outliers(points, config.lof);
  for (std::size_t i : out.lof.kept) out.kept_rows.push_back(rows[i]);
  if (out.kept_rows.size() < config.ipc) {
    throw DistillError("class '" + cls.label + "': " + std::to_string(out.kept_rows.size()) +
                       " samples left of " + std::to_string(cls.size()) +
                       " after outlier removal (contamination " +
                       format_double(config.lof.contamination) + "), need ipc=" +
                       std::to_string(config.ipc));
  }
  const LatentMatrix kept = latents.select_rows(out.kept_rows);
  out.clusters = kmeans_fit(kept, config.kmeans_for(cls.label));
  out.members.assign(config.ipc, {});
  out.cluster_captions.assign(config.ipc, {});
  for (std::size_t i = 0; i < out.lof.kept.size(); ++i) {
    const std::size_t c = out.clusters.assignments[i];
    out.members[c].push_back(out.kept_rows[i]);
    out.cluster_captions[c].push_back(cls.rows[out.lof.kept[i]].caption);
  }
  return out;
}

/// Text stage. The class vocabulary covers every caption of the class,
/// including ones removed as outliers.
inline ClassTexts extract_texts(const ClusteredClass& cc, double beta, std::size_t top_k) {
  ClassTexts t;
  t.nonrepresentative = nonrepresentative_words(class_vocabulary(cc.class_captions), beta);
  for (std::size_t c = 0; c < cc.cluster_captions.size(); ++c) {
    const auto& caps = cc.cluster_captions[c];
    const auto rw = cluster_representative_words(caps, t.nonrepresentative, top_k);
    t.prototypes.push_back(select_text_prototype(caps, rw, c));
  }
  return t;
}

inline ClassOutcome distill_class(const ClassDataset& cls, const LatentMatrix& latents,
                                  const DistillConfig& config) {
  config.validate();
  ClassOutcome out;
  out.clustered = cluster_class(cls, latents, config);
  out.texts = extract_texts(out.clustered, config.beta, config.top_k);
  const auto protos = image_prototypes(out.clustered.clusters, out.clustered.tensor_shape);
  for (std::size_t c = 0; c < protos.size(); ++c) {
    PrototypePair p;
    p.class_label = cls.label;
    p.cluster_id = c;
    p.tensor_shape = protos[c].tensor_shape;
    p.image_prototype = protos[c].values;
    p.text_prototype = out.texts.prototypes[c].text;
    p.noise_strength = config.noise_strength;
    p.seed = pair_seed(config.master_seed, cls.label, c);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole-dataset run

struct ClassFailure {
  std::string class_label;
  std::string message;
};

struct DistillRun {
  std::vector<ClassOutcome> outcomes;  ///< successful classes, label order
  std::vector<ClassFailure> failures;  ///< label order
};

/// Runs `fn(i)` for i in [0, count) on up to `workers` threads. Each index
/// is visited exactly once; exceptions are returned per index.
template <typename Fn>
std::vector<std::exception_ptr> parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    body();
    return errors;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  return errors;
}

/// Distills every class. In strict mode the first failing class (in label
/// order) is rethrown; otherwise failures are collected.
inline DistillRun distill_all(std::span<const ClassDataset> classes, const LatentMatrix& latents,
                              const DistillConfig& config, std::size_t workers = 1,
                              bool skip_failed = false) {
  config.validate();
  std::vector<std::optional<ClassOutcome>> slots(classes.size());
  auto errors = parallel_for(classes.size(), workers, [&](std::size_t i) {
    slots[i] = distill_class(classes[i], latents, config);
  });
  DistillRun run;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!errors[i]) {
      run.outcomes.push_back(std::move(*slots[i]));
      continue;
    }
    if (!skip_failed) std::rethrow_exception(errors[i]);
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DistillError& e) {
      run.failures.push_back({classes[i].label, e.what()});
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Manifest

struct SynthesisManifest {
  std::uint32_t format_version = kManifestFormatVersion;
  DistillConfig config;
  std::vector<PrototypePair> pairs;  ///< label order, then ascending cluster id
  std::vector<ClassFailure> warnings;
};

inline SynthesisManifest build_manifest(std::vector<std::vector<PrototypePair>> per_class_pairs,
                                        const DistillConfig& config,
                                        std::vector<ClassFailure> warnings = {}) {
  SynthesisManifest m;
  m.config = config;
  m.warnings = std::move(warnings);
  std::map<std::string, std::size_t> per_label;
  std::set<std::pair<std::string, std::size_t>> seen;
  for (auto& group : per_class_pairs) {
    for (auto& p : group) {
      if (!seen.emplace(p.class_label, p.cluster_id).second) {
        throw ValidationError("duplicate pair (class '" + p.class_label + "', cluster " +
                              std::to_string(p.cluster_id) + ")");
      }
      ++per_label[p.class_label];
      m.pairs.push_back(std::move(p));
    }
  }
  for (const auto& [label, count] : per_label) {
    if (count != config.ipc) {
      throw ValidationError("class '" + label + "' has " + std::to_string(count) +
                            " pairs, expected ipc=" + std::to_string(config.ipc));
    }
  }
  std::sort(m.pairs.begin(), m.pairs.end(), [](const PrototypePair& a, const PrototypePair& b) {
    return a.class_label != b.class_label ? a.class_label < b.class_label
                                          : a.cluster_id < b.cluster_id;
  });
  std::sort(m.warnings.begin(), m.warnings.end(),
            [](const ClassFailure& a, const ClassFailure& b) { return a.class_label < b.class_label; });
  return m;
}

inline SynthesisManifest build_manifest(const DistillRun& run, const DistillConfig& config) {
  std::vector<std::vector<PrototypePair>> groups;
  for (const auto& o : run.outcomes) groups.push_back(o.pairs);
  return build_manifest(std::move(groups), config, run.failures);
}

/// Where image prototype vectors go when serialized.
struct ExternalPrototypes {
  /// File name recorded in the manifest (relative to the manifest).
  std::string file;
};

/// JSON form of the manifest. With `external`, each image_prototype carries
/// {shape, file, row} instead of inline data; see externalize_prototypes.
inline Json manifest_to_json(const SynthesisManifest& m,
                             const std::optional<ExternalPrototypes>& external = std::nullopt) {
  Json pairs = Json::array();
  for (std::size_t i = 0; i < m.pairs.size(); ++i) {
    const auto& p = m.pairs[i];
    Json image{{"shape", p.tensor_shape}};
    if (external) {
      image["file"] = external->file;
      image["row"] = i;
    } else {
      image["data"] = p.image_prototype;
    }
    pairs.push_back(Json{{"class_label", p.class_label},
                         {"cluster_id", p.cluster_id},
                         {"image_prototype", std::move(image)},
                         {"text_prototype", p.text_prototype},
                         {"noise_strength", p.noise_strength},
                         {"seed", p.seed}});
  }
  Json j{{"format_version", m.format_version},
         {"config", to_json(m.config)},
         {"pairs", std::move(pairs)}};
  if (!m.warnings.empty()) {
    Json w = Json::array();
    for (const auto& f : m.warnings) w.push_back(Json{{"class_label", f.class_label}, {"message", f.message}});
    j["warnings"] = std::move(w);
  }
  return j;
}

inline std::string serialize_manifest(const SynthesisManifest& m,
                                      const std::optional<ExternalPrototypes>& external = std::nullopt) {
  return canonical_dump(manifest_to_json(m, external)) + "\n";
}

/// Prototype vectors as a VLPD matrix, one row per pair in manifest order.
/// Values are rounded to binary32.
inline LatentMatrix externalize_prototypes(const SynthesisManifest& m) {
  if (m.pairs.empty()) return LatentMatrix(0, {1}, {});
  std::vector<float> data;
  const auto shape = m.pairs.front().tensor_shape;
  for (const auto& p : m.pairs) {
    if (p.tensor_shape != shape) throw ValidationError("pairs disagree on tensor shape");
    for (double v : p.image_prototype) data.push_back(static_cast<float>(v));
  }
  return LatentMatrix(m.pairs.size(), shape, std::move(data));
}

/// Parses a manifest. Externalized prototypes are loaded relative to
/// `base_dir`.
inline SynthesisManifest parse_manifest(std::string_view text,
                                        const std::filesystem::path& base_dir = {}) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("manifest: malformed JSON (") + e.what() + ")");
  }
  SynthesisManifest m;
  try {
    m.format_version = j.at("format_version").get<std::uint32_t>();
    if (m.format_version != kManifestFormatVersion) {
      throw FormatError("manifest: unsupported format_version " + std::to_string(m.format_version));
    }
    m.config = config_from_json(j.at("config"));
    std::map<std::string, LatentMatrix> external;
    for (const auto& pj : j.at("pairs")) {
      PrototypePair p;
      p.class_label = pj.at("class_label").get<std::string>();
      p.cluster_id = pj.at("cluster_id").get<std::size_t>();
      const auto& img = pj.at("image_prototype");
      p.tensor_shape = img.at("shape").get<std::vector<std::uint32_t>>();
      if (img.contains("data")) {
        p.image_prototype = img.at("data").get<std::vector<double>>();
      } else {
        const auto file = img.at("file").get<std::string>();
        auto it = external.find(file);
        if (it == external.end()) it = external.emplace(file, read_latents(base_dir / file)).first;
        const auto row = img.at("row").get<std::size_t>();
        if (row >= it->second.n_samples()) throw FormatError("manifest: external row out of range");
        const auto r = it->second.row(row);
        p.image_prototype.assign(r.begin(), r.end());
      }
      std::uint64_t dim = 1;
      for (auto s : p.tensor_shape) dim *= s;
      if (dim != p.image_prototype.size()) {
        throw FormatError("manifest: prototype length does not match its shape");
      }
      p.text_prototype = pj.at("text_prototype").get<std::string>();
      p.noise_strength = pj.at("noise_strength").get<double>();
      p.seed = pj.at("seed").get<std::uint64_t>();
      m.pairs.push_back(std::move(p));
    }
    if (j.contains("warnings")) {
      for (const auto& w : j.at("warnings")) {
        m.warnings.push_back({w.at("class_label").get<std::string>(), w.at("message").get<std::string>()});
      }
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reference backend

struct StubMatch {
  std::size_t pair_index = 0;
  std::size_t latent_row = 0;
  double sq_distance = 0.0;
};

/// Test double for a generative backend: "reconstructs" each pair as the
/// kept sample of its class nearest to the image prototype (lower latent
/// row on ties). Kept sets are recomputed from the manifest's config echo.
inline std::vector<StubMatch> stub_synthesize(const SynthesisManifest& manifest,
                                              const LatentMatrix& latents,
                                              std::span<const CaptionRecord> captions) {
  const auto classes = join_classes(latents, captions);
  std::map<std::string, std::vector<std::size_t>> kept;
  std::vector<StubMatch> out;
  for (std::size_t i = 0; i < manifest.pairs.size(); ++i) {
    const auto& p = manifest.pairs[i];
    auto it = kept.find(p.class_label);
    if (it == kept.end()) {
      auto cls = std::find_if(classes.begin(), classes.end(),
                              [&](const ClassDataset& c) { return c.label == p.class_label; });
      if (cls == classes.end()) {
        throw ValidationError("manifest class '" + p.class_label + "' not in dataset");
      }
      const auto rows = cls->indices();
      const auto report = filter_outliers(latents.select_rows(rows), manifest.config.lof);
      std::vector<std::size_t> k;
      for (std::size_t r : report.kept) k.push_back(rows[r]);
      it = kept.emplace(p.class_label, std::move(k)).first;
    }
    if (it->second.empty()) throw ValidationError("class '" + p.class_label + "' is empty");
    if (p.image_prototype.size() != latents.dim()) {
      throw ValidationError("prototype dim does not match latent dim");
    }
    StubMatch best{i, it->second.front(), std::numeric_limits<double>::infinity()};
    for (std::size_t row : it->second) {
      const double d = detail::sq_dist(latents.row(row), p.image_prototype);
      if (d < best.sq_distance) {
        best.sq_distance = d;
        best.latent_row = row;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace vlproto
