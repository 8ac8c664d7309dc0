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

#ifndef DUALGUARD_EXPERIMENT_HPP_
#define DUALGUARD_EXPERIMENT_HPP_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace dualguard {

std::vector<PairedPooled> pool_pairs(const std::vector<EmbeddingPair>& pairs);
std::string embedding_provenance(const std::vector<EmbeddingPair>& pairs);

// Runs every pair through the undefended denoiser and groups the recorded
// cross-attention features per category and (step, layer).
void collect_visual_features(const ToyDenoiser& denoiser,
                             const std::vector<EmbeddingPair>& pairs,
                             std::size_t num_categories, unsigned threads,
                             std::vector<FeatureSeries>& unsafe,
                             std::vector<FeatureSeries>& safe);

// Everything the benchmark needs, built from one config: direction bank from
// the text-side split, visual steering from the concept-append split, the
// judge from undefended runs of its own split, and held-out evaluation sets.
struct Experiment {
  RunConfig config;
  CategoryDirectionBank bank;
  std::optional<std::string> direction_error;
  VisualSteeringSet steering;
  std::unique_ptr<ToyDenoiser> denoiser;
  JudgeProbe judge;
  std::unique_ptr<BenchmarkHarness> harness;
};

std::unique_ptr<Experiment> build_experiment(const RunConfig& config);

}  // namespace dualguard

#endif  // DUALGUARD_EXPERIMENT_HPP_
