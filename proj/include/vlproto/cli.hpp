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

// Command-line front end. Exit codes: 0 success, 1 runtime or class
// failure, 2 input or flag validation failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vlproto/error.hpp"
#include "vlproto/fixture.hpp"
#include "vlproto/interchange.hpp"
#include "vlproto/json_format.hpp"
#include "vlproto/pipeline.hpp"
#include "vlproto/sweep.hpp"

namespace vlproto::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;

struct DistillFlags {
  std::string latents;
  std::string captions;
  std::string output;
  std::string config;
  std::size_t ipc = 10;
  double alpha = 0.05;
  double beta = 0.2;
  std::size_t top_k = 35;
  std::size_t neighbors = 10;
  std::uint64_t seed = 0;
  double noise_strength = 0.7;
  std::size_t restarts = 1;
  std::size_t max_iter = 300;
  double tol = 1e-6;
  std::size_t workers = 1;
  bool skip_failed = false;
  std::string dump_clusters;
  std::string dump_text;
  std::string external_prototypes;
  std::string prompt_template{kDefaultPromptTemplate};

  DistillConfig to_config() const {
    DistillConfig c;
    c.ipc = ipc;
    c.lof = {neighbors, alpha};
    c.max_iter = max_iter;
    c.tol = tol;
    c.n_restarts = restarts;
    c.beta = beta;
    c.top_k = top_k;
    c.master_seed = seed;
    c.noise_strength = noise_strength;
    c.prompt_template = prompt_template;
    c.validate();
    return c;
  }
};

namespace detail {

inline void add_input_flags(CLI::App* sub, DistillFlags& f, bool required = true) {
  sub->add_option("--latents", f.latents, "VLPD latent file")
      ->required(required)
      ->check(CLI::ExistingFile);
  sub->add_option("--captions", f.captions, "caption JSONL file")
      ->required(required)
      ->check(CLI::ExistingFile);
}

// Options a --config file may provide cannot be marked required at parse
// time; they are checked after the config is applied.
inline void require_flags(const DistillFlags& f, bool need_output) {
  if (f.latents.empty()) throw ValidationError("--latents is required");
  if (f.captions.empty()) throw ValidationError("--captions is required");
  if (need_output && f.output.empty()) throw ValidationError("--output is required");
}

inline void add_distill_flags(CLI::App* sub, DistillFlags& f) {
  sub->add_option("--config", f.config, "JSON file supplying any flag; explicit flags win")
      ->check(CLI::ExistingFile);
  sub->add_option("--ipc", f.ipc, "prototypes (clusters) per class")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", f.alpha, "LOF contamination per class")->check(CLI::Range(0.0, 0.5));
  sub->add_option("--beta", f.beta, "nonrepresentative-word threshold")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--top-k", f.top_k, "representative words per cluster")
      ->check(CLI::PositiveNumber);
  sub->add_option("--neighbors", f.neighbors, "LOF n_neighbors")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_option("--noise-strength", f.noise_strength, "img2img noise strength")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--restarts", f.restarts, "k-means restarts, best inertia wins")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", f.max_iter, "k-means iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--tol", f.tol, "k-means squared center-shift tolerance")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--workers", f.workers, "classes processed in parallel")
      ->check(CLI::PositiveNumber);
  sub->add_option("--prompt-template", f.prompt_template, "caption prompt echoed in the manifest");
}

inline std::string json_scalar_to_arg(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  throw ValidationError("config value must be a scalar or array of scalars");
}

/// Fills every option of `sub` that was not given on the command line from
/// the JSON object at `path`. Keys are flag names without the leading
/// dashes; '_' and '-' are interchangeable.
inline void apply_json_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("config " + path + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError("config " + path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    for (char& c : name)
      if (c == '_') c = '-';
    if (name == "config") continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (!opt) throw ValidationError("config " + path + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    try {
      if (value.is_array()) {
        std::vector<std::string> items;
        for (const auto& v : value) items.push_back(json_scalar_to_arg(v));
        opt->add_result(items);
      } else {
        opt->add_result(json_scalar_to_arg(value));
      }
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ValidationError("config " + path + ": key '" + key + "': " + e.what());
    }
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  ::vlproto::detail::write_file_bytes(path, text);
}

struct Dataset {
  LatentMatrix latents;
  std::vector<CaptionRecord> captions;
  std::vector<ClassDataset> classes;
};

inline Dataset load_dataset(const std::string& latents, const std::string& captions) {
  Dataset d;
  d.latents = read_latents(latents);
  d.captions = read_captions(captions);
  d.classes = join_classes(d.latents, d.captions);
  return d;
}

inline int cmd_validate(const DistillFlags& f, std::ostream& out) {
  const Dataset d = load_dataset(f.latents, f.captions);
  out << "ok: " << d.latents.n_samples() << " latent rows (dim " << d.latents.dim() << "), "
      << d.captions.size() << " captions, " << d.classes.size() << " classes\n";
  for (const auto& c : d.classes) out << "  " << c.label << '\t' << c.size() << '\n';
  return kExitOk;
}

inline int cmd_distill(const DistillFlags& f, std::ostream& out, std::ostream& err) {
  const DistillConfig config = f.to_config();
  const Dataset d = load_dataset(f.latents, f.captions);
  const DistillRun run = distill_all(d.classes, d.latents, config, f.workers, f.skip_failed);
  const SynthesisManifest manifest = build_manifest(run, config);

  std::optional<ExternalPrototypes> external;
  if (!f.external_prototypes.empty()) {
    const std::filesystem::path name(f.external_prototypes);
    if (name.has_parent_path()) {
      throw ValidationError("--external-prototypes takes a bare file name, written next to the manifest");
    }
    external = ExternalPrototypes{name.string()};
    write_latents(externalize_prototypes(manifest),
                  std::filesystem::path(f.output).parent_path() / name);
  }
  write_text(f.output, serialize_manifest(manifest, external));

  if (!f.dump_clusters.empty()) {
    Json classes = Json::array();
    for (const auto& o : run.outcomes) {
      classes.push_back(Json{{"label", o.clustered.label},
                             {"lof", to_json(o.clustered.lof)},
                             {"kept_rows", o.clustered.kept_rows},
                             {"kmeans", to_json(o.clustered.clusters)}});
    }
    write_text(f.dump_clusters, canonical_dump(Json{{"classes", classes}}) + "\n");
  }
  if (!f.dump_text.empty()) {
    Json classes = Json::array();
    for (const auto& o : run.outcomes) {
      Json clusters = Json::array();
      for (const auto& tp : o.texts.prototypes) {
        clusters.push_back(text_cluster_json(tp, o.clustered.members[tp.cluster_id].size(),
                                             o.texts.nonrepresentative));
      }
      classes.push_back(Json{{"label", o.clustered.label}, {"clusters", clusters}});
    }
    write_text(f.dump_text, canonical_dump(Json{{"classes", classes}}) + "\n");
  }
  for (const auto& w : run.failures) err << "warning: skipped " << w.message << '\n';
  out << "wrote " << manifest.pairs.size() << " pairs for " << run.outcomes.size()
      << " classes to " << f.output << '\n';
  return kExitOk;
}

inline int cmd_sweep(const DistillFlags& f, const SweepGrid& grid, std::ostream& out) {
  const DistillConfig config = f.to_config();
  const Dataset d = load_dataset(f.latents, f.captions);
  const auto rows = run_sweep(d.classes, d.latents, config, grid, f.workers);
  const std::string csv = format_sweep_csv(rows);
  if (f.output.empty()) {
    out << csv;
  } else {
    write_text(f.output, csv);
  }
  return kExitOk;
}

inline int cmd_stub(const std::string& manifest_path, const DistillFlags& f,
                    const std::string& output, std::ostream& out) {
  const std::filesystem::path mp(manifest_path);
  const SynthesisManifest m =
      parse_manifest(::vlproto::detail::read_file_bytes(mp), mp.parent_path());
  const LatentMatrix latents = read_latents(f.latents);
  const auto captions = read_captions(f.captions);
  const auto matches = stub_synthesize(m, latents, captions);
  std::map<std::size_t, const CaptionRecord*> by_index;
  for (const auto& c : captions) by_index[c.index] = &c;
  Json list = Json::array();
  for (const auto& s : matches) {
    const auto& p = m.pairs[s.pair_index];
    list.push_back(Json{{"pair_index", s.pair_index},
                        {"class_label", p.class_label},
                        {"cluster_id", p.cluster_id},
                        {"latent_row", s.latent_row},
                        {"sample_id", by_index.at(s.latent_row)->sample_id}});
  }
  const std::string text = canonical_dump(list) + "\n";
  if (output.empty()) {
    out << text;
  } else {
    write_text(output, text);
  }
  return kExitOk;
}

}  // namespace detail

/// Runs the CLI. `argv[0]` is the program name.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Distill (latent, caption) datasets into vision-language category prototypes"};
  app.name("vlproto");
  app.require_subcommand(1);

  DistillFlags f;

  auto* validate = app.add_subcommand("validate", "check latent and caption files and report class sizes");
  detail::add_input_flags(validate, f);

  auto* distill = app.add_subcommand("distill", "write the synthesis manifest");
  detail::add_input_flags(distill, f, false);
  detail::add_distill_flags(distill, f);
  distill->add_option("--output", f.output, "manifest path");
  distill->add_flag("--skip-failed", f.skip_failed, "emit a partial manifest when classes fail");
  distill->add_option("--dump-clusters", f.dump_clusters, "write per-class LOF and k-means JSON");
  distill->add_option("--dump-text", f.dump_text, "write per-cluster keyword JSON");
  distill->add_option("--external-prototypes", f.external_prototypes,
                      "store prototype vectors in this VLPD file next to the manifest");

  SweepGrid grid{{0.0, 0.05}, {0.1, 0.2, 0.4}, {5, 35, 60}};
  auto* sweep = app.add_subcommand("sweep", "summary statistics over an alpha/beta/top-k grid (CSV)");
  detail::add_input_flags(sweep, f, false);
  detail::add_distill_flags(sweep, f);
  sweep->add_option("--output", f.output, "CSV path (stdout when omitted)");
  sweep->add_option("--alphas", grid.alphas, "contamination values")->delimiter(',');
  sweep->add_option("--betas", grid.betas, "nonrepresentative thresholds")->delimiter(',');
  sweep->add_option("--top-ks", grid.top_ks, "top-k values")->delimiter(',');

  std::string manifest_path, stub_output;
  auto* stub = app.add_subcommand("stub-synthesize",
                                  "reference backend: nearest kept sample per prototype");
  stub->add_option("--manifest", manifest_path, "manifest JSON")->required()->check(CLI::ExistingFile);
  detail::add_input_flags(stub, f);
  stub->add_option("--output", stub_output, "JSON path (stdout when omitted)");

  FixtureSpec fx;
  std::string fx_latents, fx_captions;
  auto* fixture = app.add_subcommand("make-fixture", "write a synthetic dataset");
  fixture->add_option("--latents-out", fx_latents, "VLPD output")->required();
  fixture->add_option("--captions-out", fx_captions, "JSONL output")->required();
  fixture->add_option("--classes", fx.n_classes, "number of classes")->check(CLI::PositiveNumber);
  fixture->add_option("--per-class", fx.per_class, "samples per class")->check(CLI::PositiveNumber);
  fixture->add_option("--shape", fx.tensor_shape, "latent tensor shape")->delimiter(',');
  fixture->add_option("--modes", fx.modes, "visual modes per class")->check(CLI::PositiveNumber);
  fixture->add_option("--outliers", fx.outliers_per_class, "far samples per class");
  fixture->add_option("--seed", fx.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    for (auto* sub : {distill, sweep}) {
      if (sub->parsed() && !f.config.empty()) detail::apply_json_config(sub, f.config);
    }
    if (validate->parsed()) return detail::cmd_validate(f, out);
    if (distill->parsed()) {
      detail::require_flags(f, true);
      return detail::cmd_distill(f, out, err);
    }
    if (sweep->parsed()) {
      detail::require_flags(f, false);
      return detail::cmd_sweep(f, grid, out);
    }
    if (stub->parsed()) return detail::cmd_stub(manifest_path, f, stub_output, out);
    if (fixture->parsed()) {
      const Fixture data = make_fixture(fx);
      write_latents(data.latents, fx_latents);
      write_captions(data.captions, fx_captions);
      out << "wrote " << data.latents.n_samples() << " samples in " << fx.n_classes
          << " classes\n";
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalid;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"vlproto"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vlproto::cli
