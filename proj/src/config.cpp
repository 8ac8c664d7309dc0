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

#include "config.hpp"

#include <cmath>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

using nlohmann::json;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

const json& section(const json& j, const char* key) {
  static const json kEmpty = json::object();
  if (!j.contains(key)) return kEmpty;
  require(j.at(key).is_object(), ErrorKind::kConfig,
          std::string("config section '") + key + "' must be an object");
  return j.at(key);
}

void check_known_keys(const json& j, std::initializer_list<const char*> keys,
                      const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    require(known, ErrorKind::kConfig, "unknown config key '" + where + k + "'");
  }
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::filesystem::path RunConfig::text_manifest() const {
  return paths.text_manifest.empty() ? out_dir() / "embeddings" / "text" / "manifest.json"
                                     : resolve(paths.text_manifest);
}

std::filesystem::path RunConfig::visual_manifest() const {
  return paths.visual_manifest.empty()
             ? out_dir() / "embeddings" / "visual" / "manifest.json"
             : resolve(paths.visual_manifest);
}

std::filesystem::path RunConfig::bank_dir() const {
  return paths.bank_dir.empty() ? out_dir() / "bank" : resolve(paths.bank_dir);
}

std::filesystem::path RunConfig::visual_steering_dir() const {
  return paths.visual_steering_dir.empty() ? out_dir() / "visual_steering"
                                           : resolve(paths.visual_steering_dir);
}

SyntheticEmbeddingConfig RunConfig::synthetic_config() const {
  SyntheticEmbeddingConfig s = synthetic;
  s.categories = categories.size();
  s.seed = derive_seed(seed, "synthetic");
  return s;
}

SvmOptions RunConfig::svm_options() const {
  SvmOptions s = svm;
  s.seed = derive_seed(seed, "svm");
  return s;
}

ToyPipelineConfig RunConfig::pipeline_config() const {
  ToyPipelineConfig p = pipeline;
  p.text_dim = synthetic.dim;
  p.seed = derive_seed(seed, "pipeline");
  return p;
}

JudgeOptions RunConfig::judge_options() const {
  JudgeOptions o = judge;
  o.seed = derive_seed(seed, "judge");
  return o;
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  try {
    require(j.is_object(), ErrorKind::kConfig, "config must be a JSON object");
    check_known_keys(j,
                     {"seed", "categories", "paths", "templates", "synthetic", "svm",
                      "textual", "visual", "pipeline", "judge", "benchmark", "sweep",
                      "threads"},
                     "");
    read(j, "seed", cfg.seed);
    read(j, "categories", cfg.categories);
    read(j, "threads", cfg.threads);

    const auto& paths = section(j, "paths");
    check_known_keys(paths,
                     {"concepts", "out_dir", "text_manifest", "visual_manifest",
                      "visual_features_manifest", "bank_dir", "visual_steering_dir"},
                     "paths.");
    read(paths, "concepts", cfg.paths.concepts);
    read(paths, "out_dir", cfg.paths.out_dir);
    read(paths, "text_manifest", cfg.paths.text_manifest);
    read(paths, "visual_manifest", cfg.paths.visual_manifest);
    read(paths, "visual_features_manifest", cfg.paths.visual_features_manifest);
    read(paths, "bank_dir", cfg.paths.bank_dir);
    read(paths, "visual_steering_dir", cfg.paths.visual_steering_dir);

    const auto& templates = section(j, "templates");
    check_known_keys(templates, {"text", "visual"}, "templates.");
    read(templates, "text", cfg.text_templates);
    read(templates, "visual", cfg.visual_templates);

    const auto& syn = section(j, "synthetic");
    check_known_keys(syn,
                     {"dim", "seq_len", "separation", "noise", "safe_mean_norm",
                      "pairs_per_category"},
                     "synthetic.");
    read(syn, "dim", cfg.synthetic.dim);
    read(syn, "seq_len", cfg.synthetic.seq_len);
    read(syn, "separation", cfg.synthetic.separation);
    read(syn, "noise", cfg.synthetic.noise);
    read(syn, "safe_mean_norm", cfg.synthetic.safe_mean_norm);
    read(syn, "pairs_per_category", cfg.synthetic.pairs_per_category);

    const auto& svm = section(j, "svm");
    check_known_keys(svm, {"reg", "epochs"}, "svm.");
    read(svm, "reg", cfg.svm.reg);
    read(svm, "epochs", cfg.svm.epochs);

    const auto& textual = section(j, "textual");
    check_known_keys(textual, {"lambda", "epsilon_f"}, "textual.");
    read(textual, "lambda", cfg.textual.lambda);
    read(textual, "epsilon_f", cfg.textual.epsilon_f);

    const auto& visual = section(j, "visual");
    check_known_keys(visual, {"beta"}, "visual.");
    read(visual, "beta", cfg.visual.beta);

    const auto& pipe = section(j, "pipeline");
    check_known_keys(pipe, {"steps", "layers", "positions", "visual_dim", "eta"},
                     "pipeline.");
    read(pipe, "steps", cfg.pipeline.steps);
    read(pipe, "layers", cfg.pipeline.layers);
    read(pipe, "positions", cfg.pipeline.positions);
    read(pipe, "visual_dim", cfg.pipeline.visual_dim);
    read(pipe, "eta", cfg.pipeline.eta);

    const auto& judge = section(j, "judge");
    check_known_keys(judge, {"epochs", "learning_rate", "l2"}, "judge.");
    read(judge, "epochs", cfg.judge.epochs);
    read(judge, "learning_rate", cfg.judge.learning_rate);
    read(judge, "l2", cfg.judge.l2);

    const auto& bench = section(j, "benchmark");
    check_known_keys(bench, {"unsafe_per_category", "benign", "textual", "visual", "ablation"},
                     "benchmark.");
    read(bench, "unsafe_per_category", cfg.benchmark.unsafe_per_category);
    read(bench, "benign", cfg.benchmark.benign);
    read(bench, "textual", cfg.benchmark.flags.textual);
    read(bench, "visual", cfg.benchmark.flags.visual);
    read(bench, "ablation", cfg.benchmark.ablation);

    const auto& sweep = section(j, "sweep");
    check_known_keys(sweep, {"lambda", "epsilon_f"}, "sweep.");
    read(sweep, "lambda", cfg.sweep.lambda);
    read(sweep, "epsilon_f", cfg.sweep.epsilon_f);
  } catch (const json::exception& ex) {
    fail(ErrorKind::kConfig, std::string("invalid config value: ") + ex.what());
  }
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  return json{
      {"seed", cfg.seed},
      {"categories", cfg.categories},
      {"threads", cfg.threads},
      {"paths",
       {{"concepts", cfg.paths.concepts},
        {"out_dir", cfg.paths.out_dir},
        {"text_manifest", cfg.paths.text_manifest},
        {"visual_manifest", cfg.paths.visual_manifest},
        {"visual_features_manifest", cfg.paths.visual_features_manifest},
        {"bank_dir", cfg.paths.bank_dir},
        {"visual_steering_dir", cfg.paths.visual_steering_dir}}},
      {"templates", {{"text", cfg.text_templates}, {"visual", cfg.visual_templates}}},
      {"synthetic",
       {{"dim", cfg.synthetic.dim},
        {"seq_len", cfg.synthetic.seq_len},
        {"separation", cfg.synthetic.separation},
        {"noise", cfg.synthetic.noise},
        {"safe_mean_norm", cfg.synthetic.safe_mean_norm},
        {"pairs_per_category", cfg.synthetic.pairs_per_category}}},
      {"svm", {{"reg", cfg.svm.reg}, {"epochs", cfg.svm.epochs}}},
      {"textual", {{"lambda", cfg.textual.lambda}, {"epsilon_f", cfg.textual.epsilon_f}}},
      {"visual", {{"beta", cfg.visual.beta}}},
      {"pipeline",
       {{"steps", cfg.pipeline.steps},
        {"layers", cfg.pipeline.layers},
        {"positions", cfg.pipeline.positions},
        {"visual_dim", cfg.pipeline.visual_dim},
        {"eta", cfg.pipeline.eta}}},
      {"judge",
       {{"epochs", cfg.judge.epochs},
        {"learning_rate", cfg.judge.learning_rate},
        {"l2", cfg.judge.l2}}},
      {"benchmark",
       {{"unsafe_per_category", cfg.benchmark.unsafe_per_category},
        {"benign", cfg.benchmark.benign},
        {"textual", cfg.benchmark.flags.textual},
        {"visual", cfg.benchmark.flags.visual},
        {"ablation", cfg.benchmark.ablation}}},
      {"sweep", {{"lambda", cfg.sweep.lambda}, {"epsilon_f", cfg.sweep.epsilon_f}}}};
}

json load_config_json(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error&) {
    fail(ErrorKind::kConfig, "cannot read config file: " + path.string());
  }
  try {
    return json::parse(text);
  } catch (const json::exception& ex) {
    fail(ErrorKind::kConfig, path.string() + ": " + ex.what());
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
          "override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    require(!part.empty(), ErrorKind::kConfig, "malformed override key '" + key + "'");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void validate_config(const RunConfig& cfg, bool check_paths) {
  require(!cfg.categories.empty(), ErrorKind::kConfig, "at least one category is required");
  for (std::size_t i = 0; i < cfg.categories.size(); ++i) {
    require(!cfg.categories[i].empty(), ErrorKind::kConfig, "category names must be non-empty");
    for (std::size_t k = 0; k < i; ++k) {
      require(cfg.categories[i] != cfg.categories[k], ErrorKind::kConfig,
              "duplicate category '" + cfg.categories[i] + "'");
    }
  }
  cfg.synthetic_config().validate();
  require(cfg.svm.reg > 0 && std::isfinite(cfg.svm.reg), ErrorKind::kConfig,
          "svm.reg must be > 0");
  require(cfg.svm.epochs >= 1, ErrorKind::kConfig, "svm.epochs must be >= 1");
  cfg.textual.validate();
  cfg.visual.validate();
  cfg.pipeline_config().validate();
  require(cfg.judge.epochs >= 1 && cfg.judge.learning_rate > 0 && cfg.judge.l2 >= 0,
          ErrorKind::kConfig, "judge settings out of range");
  require(cfg.benchmark.unsafe_per_category >= 1, ErrorKind::kConfig,
          "benchmark.unsafe_per_category must be >= 1");
  for (const auto* grid : {&cfg.sweep.lambda, &cfg.sweep.epsilon_f}) {
    for (std::size_t i = 0; i < grid->size(); ++i) {
      require(std::isfinite((*grid)[i]) && (*grid)[i] >= 0, ErrorKind::kConfig,
              "sweep values must be finite and >= 0");
      require(i == 0 || (*grid)[i - 1] < (*grid)[i], ErrorKind::kConfig,
              "sweep values must be sorted ascending");
    }
  }
  require(!cfg.paths.out_dir.empty(), ErrorKind::kConfig, "paths.out_dir must be set");
  if (check_paths) {
    if (!cfg.paths.concepts.empty()) {
      require(std::filesystem::is_regular_file(cfg.resolve(cfg.paths.concepts)),
              ErrorKind::kConfig,
              "concept file not found: " + cfg.resolve(cfg.paths.concepts).string());
    }
    if (!cfg.paths.visual_features_manifest.empty()) {
      const auto p = cfg.resolve(cfg.paths.visual_features_manifest);
      require(std::filesystem::is_regular_file(p), ErrorKind::kConfig,
              "visual features manifest not found: " + p.string());
    }
  }
}

}  // namespace dualguard
