/* Copyright 2026 The Dualguard Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <map>

#include "error.hpp"
#include "experiment.hpp"
#include "manifest.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string pair_name(const std::string& split, const std::string& category, std::size_t n,
                      const char* variant) {
  char idx[16];
  std::snprintf(idx, sizeof(idx), "%04zu", n);
  return split + "/" + category + "/" + idx + "/" + variant;
}

std::string file_stem(const std::string& name) {
  std::string s = name;
  for (auto& ch : s) {
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  }
  return s;
}

// Writes the pairs of one split and returns its manifest.
TensorManifest write_pairs(const fs::path& dir, const std::string& split,
                           const std::vector<EmbeddingPair>& pairs,
                           const std::vector<std::string>& categories) {
  TensorManifest m;
  m.root = dir;
  for (const auto& p : pairs) {
    for (const auto* variant : {"safe", "unsafe"}) {
      const Tensor& t = std::string(variant) == "safe" ? p.safe : p.unsafe;
      ManifestEntry e;
      e.name = pair_name(split, categories[p.category], p.pair_index, variant);
      e.role = TensorRole::kPromptEmbedding;
      e.path = file_stem(e.name) + ".dtvt";
      e.shape = t.shape();
      e.category = categories[p.category];
      e.pair_index = static_cast<int>(p.pair_index);
      e.variant = variant;
      write_tensor(t, dir / e.path);
      m.entries.push_back(std::move(e));
    }
  }
  save_manifest(m, dir / "manifest.json");
  return m;
}

std::size_t category_index(const std::vector<std::string>& categories,
                           const std::optional<std::string>& name, const std::string& entry) {
  require(name.has_value(), ErrorKind::kData, "manifest entry '" + entry + "' has no category");
  for (std::size_t c = 0; c < categories.size(); ++c) {
    if (categories[c] == *name) return c;
  }
  fail(ErrorKind::kData, "manifest entry '" + entry + "' has unknown category '" + *name + "'");
}

// Safe/unsafe prompt embeddings grouped into pairs by (category, pair_index).
std::vector<EmbeddingPair> read_pairs(const TensorManifest& m,
                                      const std::vector<std::string>& categories) {
  std::map<std::pair<std::size_t, int>, EmbeddingPair> grouped;
  std::map<std::pair<std::size_t, int>, int> seen;
  for (const auto& e : m.entries) {
    if (e.role != TensorRole::kPromptEmbedding) continue;
    require(e.pair_index && e.variant, ErrorKind::kData,
            "manifest entry '" + e.name + "' lacks pair_index/variant");
    const std::size_t c = category_index(categories, e.category, e.name);
    const auto key = std::pair(c, *e.pair_index);
    auto& pair = grouped[key];
    pair.category = c;
    pair.pair_index = static_cast<std::size_t>(*e.pair_index);
    if (*e.variant == "safe") {
      pair.safe = m.load(e);
      seen[key] |= 1;
    } else if (*e.variant == "unsafe") {
      pair.unsafe = m.load(e);
      seen[key] |= 2;
    } else {
      fail(ErrorKind::kData, "manifest entry '" + e.name + "' has variant '" + *e.variant +
                                 "', expected safe or unsafe");
    }
  }
  std::vector<EmbeddingPair> out;
  for (auto& [key, pair] : grouped) {
    require(seen[key] == 3, ErrorKind::kData,
            "pair " + std::to_string(key.second) + " of '" + categories[key.first] +
                "' is missing its safe or unsafe half");
    out.push_back(std::move(pair));
  }
  require(!out.empty(), ErrorKind::kData, "manifest contains no paired prompt embeddings");
  return out;
}

// Visual features exported per (category, pair, variant, step, layer).
void read_feature_pairs(const TensorManifest& m, const std::vector<std::string>& categories,
                        std::vector<FeatureSeries>& unsafe, std::vector<FeatureSeries>& safe) {
  using Key = std::tuple<std::size_t, int, int, int>;  // category, step, layer, pair
  std::map<Key, Tensor> u, s;
  for (const auto& e : m.entries) {
    if (e.role != TensorRole::kVisualFeature) continue;
    require(e.step && e.layer && e.pair_index && e.variant, ErrorKind::kData,
            "visual feature '" + e.name + "' lacks step/layer/pair_index/variant");
    const std::size_t c = category_index(categories, e.category, e.name);
    const Key key{c, *e.step, *e.layer, *e.pair_index};
    auto& target = *e.variant == "unsafe" ? u : s;
    require(*e.variant == "unsafe" || *e.variant == "safe", ErrorKind::kData,
            "visual feature '" + e.name + "' has an unknown variant");
    require(target.emplace(key, m.load(e)).second, ErrorKind::kData,
            "duplicate visual feature for '" + e.name + "'");
  }
  require(!u.empty(), ErrorKind::kData, "manifest contains no visual features");
  unsafe.assign(categories.size(), {});
  safe.assign(categories.size(), {});
  for (auto& [key, tensor] : u) {
    const auto it = s.find(key);
    require(it != s.end(), ErrorKind::kData, "visual feature without a safe counterpart");
    const auto [c, step, layer, pair] = key;
    unsafe[c][{step, layer}].push_back(std::move(tensor));
    safe[c][{step, layer}].push_back(std::move(it->second));
    s.erase(it);
  }
  require(s.empty(), ErrorKind::kData, "visual feature without an unsafe counterpart");
}

json report_headline(const DefenseReport& r) {
  return {{"arm", r.flags.label()},
          {"n_b", r.overall.n_b},
          {"n_d", r.overall.n_d},
          {"dsr", r.overall.dsr ? json(*r.overall.dsr) : json(nullptr)},
          {"benign_cosine", r.benign_cosine},
          {"benign_rel_change", r.benign_rel_change},
          {"failures", r.failures}};
}

void write_sidecar(const fs::path& dir, const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  write_text_file(dir / "run_meta.json",
                  json{{"command", command}, {"timestamp", buf}}.dump(2) + "\n");
}

}  // namespace

json cmd_validate_config(const RunConfig& cfg) {
  validate_config(cfg, true);
  return {{"status", "ok"}, {"categories", cfg.categories}, {"config", config_to_json(cfg)}};
}

json cmd_gen_usp(const RunConfig& cfg) {
  validate_config(cfg, true);
  require(!cfg.paths.concepts.empty(), ErrorKind::kConfig, "paths.concepts is not set");
  const auto concepts = read_concepts_jsonl(cfg.resolve(cfg.paths.concepts), cfg.categories);
  const auto text = build_usp(concepts, cfg.text_templates,
                              ConstructionMode::kMinimalSubstitution);
  const auto visual = build_usp(concepts, cfg.visual_templates,
                                ConstructionMode::kConceptAppend);
  const fs::path dir = cfg.out_dir() / "usp";
  write_text_file(dir / "usp_text.jsonl", usp_to_jsonl(text));
  write_text_file(dir / "usp_visual.jsonl", usp_to_jsonl(visual));
  return {{"concepts", concepts.size()},
          {"text_pairs", text.size()},
          {"visual_pairs", visual.size()},
          {"out", dir.string()}};
}

json cmd_synth_embed(const RunConfig& cfg) {
  validate_config(cfg, true);
  const auto syn = cfg.synthetic_config();
  const fs::path dir = cfg.out_dir() / "embeddings";
  const auto text = generate_synthetic_pairs(syn, "text_train");
  const auto visual = generate_synthetic_pairs(syn, "visual_train");
  const auto tm = write_pairs(dir / "text", "text", text.pairs, cfg.categories);
  const auto vm = write_pairs(dir / "visual", "visual", visual.pairs, cfg.categories);

  TensorManifest bm;
  bm.root = dir / "benign";
  const auto benign = generate_benign(syn, cfg.benchmark.benign, "eval");
  for (std::size_t i = 0; i < benign.size(); ++i) {
    ManifestEntry e;
    char idx[16];
    std::snprintf(idx, sizeof(idx), "%04zu", i);
    e.name = std::string("benign/") + idx;
    e.role = TensorRole::kPromptEmbedding;
    e.path = file_stem(e.name) + ".dtvt";
    e.shape = benign[i].shape();
    e.variant = "benign";
    write_tensor(benign[i], bm.root / e.path);
    bm.entries.push_back(std::move(e));
  }
  save_manifest(bm, bm.root / "manifest.json");
  return {{"text_entries", tm.entries.size()},
          {"visual_entries", vm.entries.size()},
          {"benign_entries", bm.entries.size()},
          {"out", dir.string()}};
}

json cmd_train_directions(const RunConfig& cfg) {
  validate_config(cfg, true);
  const auto manifest = load_manifest(cfg.text_manifest());
  const auto pairs = read_pairs(manifest, cfg.categories);
  auto trained = train_direction_bank(pool_pairs(pairs), cfg.categories, cfg.svm_options(),
                                      embedding_provenance(pairs), cfg.threads);
  const fs::path dir = cfg.bank_dir();
  save_bank(trained.bank, dir);
  const auto reloaded = load_bank(dir);  // norms and checksums checked on load
  if (trained.direction_error) {
    fail(ErrorKind::kNumeric, *trained.direction_error +
                                  " (bank written with steering vectors only: " +
                                  dir.string() + ")");
  }
  json svms = json::array();
  for (const auto& s : trained.svms) {
    svms.push_back({{"pair", {cfg.categories[s.c], cfg.categories[s.j]}},
                    {"train_accuracy", s.train_accuracy},
                    {"hinge_loss", s.hinge_loss},
                    {"degenerate", s.degenerate}});
  }
  return {{"categories", reloaded.categories},
          {"dim", reloaded.dim()},
          {"validation", "pass"},
          {"provenance", reloaded.provenance},
          {"svms", svms},
          {"out", dir.string()}};
}

json cmd_train_visual_steering(const RunConfig& cfg) {
  validate_config(cfg, true);
  std::vector<FeatureSeries> unsafe, safe;
  std::string source;
  if (!cfg.paths.visual_features_manifest.empty()) {
    const auto m = load_manifest(cfg.resolve(cfg.paths.visual_features_manifest));
    read_feature_pairs(m, cfg.categories, unsafe, safe);
    source = "exported features";
  } else {
    const auto m = load_manifest(cfg.visual_manifest());
    const auto pairs = read_pairs(m, cfg.categories);
    const ToyDenoiser denoiser(cfg.pipeline_config());
    collect_visual_features(denoiser, pairs, cfg.categories.size(), cfg.threads, unsafe, safe);
    source = "toy denoiser";
  }
  const auto set = compute_visual_steering(cfg.categories, unsafe, safe);
  const fs::path dir = cfg.visual_steering_dir();
  save_visual_steering(set, dir);
  return {{"source", source},
          {"steps", set.steps()},
          {"layers", set.layers()},
          {"channels", set.channels()},
          {"inert", set.inert_count()},
          {"out", dir.string()}};
}

json cmd_intervene(const RunConfig& cfg, const fs::path& manifest_path) {
  validate_config(cfg, true);
  const auto bank = load_bank(cfg.bank_dir());
  const auto manifest = load_manifest(manifest_path);
  const fs::path dir = cfg.out_dir() / "intervened";
  TensorManifest out;
  out.root = dir;
  std::size_t processed = 0;
  json errors = json::array();
  for (const auto& e : manifest.entries) {
    if (e.role != TensorRole::kPromptEmbedding) continue;
    try {
      const auto result = purify(manifest.load(e), bank, cfg.textual);
      ManifestEntry oe = e;
      oe.path = file_stem(e.name) + ".dtvt";
      write_tensor(result.output, dir / oe.path);
      json trace = result.trace.to_json();
      trace["name"] = e.name;
      write_text_file(dir / (file_stem(e.name) + ".trace.json"), trace.dump(2) + "\n");
      out.entries.push_back(std::move(oe));
      ++processed;
    } catch (const Error& err) {
      errors.push_back({{"name", e.name},
                        {"kind", error_kind_name(err.kind())},
                        {"message", err.what()}});
    }
  }
  save_manifest(out, dir / "manifest.json");
  json summary{{"processed", processed}, {"errors", errors}, {"out", dir.string()}};
  if (!errors.empty()) {
    fail(ErrorKind::kData, std::to_string(errors.size()) + " embedding(s) failed: " +
                               errors.dump());
  }
  return summary;
}

json cmd_run(const RunConfig& cfg) {
  validate_config(cfg, true);
  const auto exp = build_experiment(cfg);
  const json snapshot = config_to_json(cfg);
  auto finish = [&](DefenseReport r) {
    r.config_snapshot = snapshot;
    return r;
  };
  const DefenseReport report =
      finish(exp->harness->run(cfg.benchmark.flags, cfg.textual, cfg.visual));
  const fs::path dir = cfg.out_dir() / "report";
  write_text_file(dir / "report.json", report.to_json().dump(2) + "\n");
  write_text_file(dir / "summary.csv", report_summary_csv(report));
  write_text_file(dir / "records.csv", report_records_csv(report));
  json summary{{"report", report_headline(report)}, {"out", dir.string()}};
  if (exp->direction_error) summary["direction_warning"] = *exp->direction_error;
  if (cfg.benchmark.ablation) {
    std::vector<DefenseReport> arms;
    for (const auto flags : {AblationFlags{false, false}, AblationFlags{true, false},
                             AblationFlags{false, true}, AblationFlags{true, true}}) {
      arms.push_back(finish(exp->harness->run(flags, cfg.textual, cfg.visual)));
    }
    write_text_file(dir / "ablation.csv", ablation_csv(arms));
    json jarms = json::array();
    for (const auto& a : arms) jarms.push_back(report_headline(a));
    summary["ablation"] = jarms;
  }
  write_sidecar(dir, "run");
  return summary;
}

json cmd_sweep(const RunConfig& cfg, const std::string& param) {
  validate_config(cfg, true);
  std::vector<SweepParam> params;
  if (param.empty()) {
    params = {SweepParam::kLambda, SweepParam::kEpsilonF};
  } else {
    params = {parse_sweep_param(param)};
  }
  const auto exp = build_experiment(cfg);
  const fs::path dir = cfg.out_dir() / "sweep";
  json summary{{"out", dir.string()}};
  for (const auto p : params) {
    const auto& grid = p == SweepParam::kLambda ? cfg.sweep.lambda : cfg.sweep.epsilon_f;
    const auto rows =
        run_sweep(*exp->harness, p, grid, cfg.textual, cfg.visual, cfg.benchmark.flags);
    const std::string file = std::string("sweep_") + sweep_param_name(p) + ".csv";
    write_text_file(dir / file, sweep_to_csv(p, rows, cfg.categories));
    json col = json::array();
    for (const auto& r : rows) {
      col.push_back({{"value", r.value},
                     {"dsr", r.report.overall.dsr ? json(*r.report.overall.dsr) : json(nullptr)}});
    }
    summary[sweep_param_name(p)] = col;
  }
  write_sidecar(dir, "sweep");
  return summary;
}

}  // namespace dualguard
