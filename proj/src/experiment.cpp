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

#include "experiment.hpp"

#include <filesystem>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

std::vector<PairedPooled> pool_pairs(const std::vector<EmbeddingPair>& pairs) {
  std::vector<PairedPooled> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({p.category, pool_embedding(p.unsafe), pool_embedding(p.safe)});
  }
  return out;
}

std::string embedding_provenance(const std::vector<EmbeddingPair>& pairs) {
  std::uint64_t h = fnv1a(std::string_view("dualguard-bank"));
  for (const auto& p : pairs) {
    h = fnv1a(encode_tensor(p.unsafe), h);
    h = fnv1a(encode_tensor(p.safe), h);
  }
  return hex64(h);
}

void collect_visual_features(const ToyDenoiser& denoiser,
                             const std::vector<EmbeddingPair>& pairs,
                             std::size_t num_categories, unsigned threads,
                             std::vector<FeatureSeries>& unsafe,
                             std::vector<FeatureSeries>& safe) {
  std::vector<ToyRun> unsafe_runs(pairs.size()), safe_runs(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    unsafe_runs[i] = denoiser.run(pairs[i].unsafe, nullptr, true);
    safe_runs[i] = denoiser.run(pairs[i].safe, nullptr, true);
  });
  unsafe.assign(num_categories, {});
  safe.assign(num_categories, {});
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t c = pairs[i].category;
    require(c < num_categories, ErrorKind::kData, "pair category out of range");
    for (auto& f : unsafe_runs[i].features) unsafe[c][f.key()].push_back(std::move(f.values));
    for (auto& f : safe_runs[i].features) safe[c][f.key()].push_back(std::move(f.values));
  }
}

std::unique_ptr<Experiment> build_experiment(const RunConfig& config) {
  validate_config(config, false);
  auto exp = std::make_unique<Experiment>();
  exp->config = config;
  const auto syn = config.synthetic_config();
  const auto& categories = config.categories;

  const bool disk_bank = !config.paths.bank_dir.empty();
  if (disk_bank) {
    exp->bank = load_bank(config.bank_dir());
  } else {
    const auto text = generate_synthetic_pairs(syn, "text_train");
    auto trained = train_direction_bank(pool_pairs(text.pairs), categories,
                                        config.svm_options(), embedding_provenance(text.pairs),
                                        config.threads);
    exp->bank = std::move(trained.bank);
    exp->direction_error = std::move(trained.direction_error);
  }
  require(exp->bank.categories == categories, ErrorKind::kConfig,
          "direction bank categories differ from the config");

  exp->denoiser = std::make_unique<ToyDenoiser>(config.pipeline_config());

  if (!config.paths.visual_steering_dir.empty()) {
    exp->steering = load_visual_steering(config.visual_steering_dir());
  } else {
    const auto visual = generate_synthetic_pairs(syn, "visual_train");
    std::vector<FeatureSeries> unsafe, safe;
    collect_visual_features(*exp->denoiser, visual.pairs, categories.size(), config.threads,
                            unsafe, safe);
    exp->steering = compute_visual_steering(categories, unsafe, safe);
  }

  // Judge: trained once, on undefended outputs only.
  const auto judge_pairs = generate_synthetic_pairs(syn, "judge_train");
  std::vector<std::vector<double>> safe_features(judge_pairs.pairs.size());
  std::vector<std::vector<double>> unsafe_features(judge_pairs.pairs.size());
  parallel_for(judge_pairs.pairs.size(), config.threads, [&](std::size_t i) {
    safe_features[i] = exp->denoiser->run(judge_pairs.pairs[i].safe).final_feature;
    unsafe_features[i] = exp->denoiser->run(judge_pairs.pairs[i].unsafe).final_feature;
  });
  std::vector<std::vector<std::vector<double>>> unsafe_by_cat(categories.size());
  for (std::size_t i = 0; i < judge_pairs.pairs.size(); ++i) {
    unsafe_by_cat[judge_pairs.pairs[i].category].push_back(std::move(unsafe_features[i]));
  }
  exp->judge = train_judge(categories, safe_features, unsafe_by_cat, config.judge_options());

  auto eval_cfg = syn;
  eval_cfg.pairs_per_category = std::max<std::size_t>(2, config.benchmark.unsafe_per_category);
  auto eval = generate_synthetic_pairs(eval_cfg, "eval");
  std::vector<EvalPrompt> unsafe_prompts;
  for (auto& p : eval.pairs) {
    if (p.pair_index >= config.benchmark.unsafe_per_category) continue;
    unsafe_prompts.push_back({p.category, std::move(p.unsafe)});
  }
  auto benign = generate_benign(syn, config.benchmark.benign, "eval");
  exp->harness = std::make_unique<BenchmarkHarness>(
      categories, std::move(unsafe_prompts), std::move(benign), &exp->bank, &exp->steering,
      exp->denoiser.get(), &exp->judge, config.threads);
  return exp;
}

}  // namespace dualguard
