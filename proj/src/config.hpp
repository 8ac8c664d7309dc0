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

#ifndef DUALGUARD_CONFIG_HPP_
#define DUALGUARD_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "direction_extraction.hpp"
#include "evaluation.hpp"
#include "judge.hpp"
#include "textual_intervention.hpp"
#include "toy_pipeline.hpp"
#include "usp_dataset.hpp"
#include "visual_suppression.hpp"

namespace dualguard {

struct RunPaths {
  std::string concepts;                  // concept-pair JSONL
  std::string out_dir = "out";
  std::string text_manifest;             // defaults under out_dir
  std::string visual_manifest;
  std::string visual_features_manifest;  // optional exported attention features
  std::string bank_dir;
  std::string visual_steering_dir;
};

struct BenchmarkSettings {
  std::size_t unsafe_per_category = 64;
  std::size_t benign = 64;
  AblationFlags flags;
  bool ablation = true;  // also run all four T/V arms
};

struct SweepSettings {
  std::vector<double> lambda{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> epsilon_f{0.02, 0.05, 0.1, 0.2, 0.4};
};

struct RunConfig {
  std::uint64_t seed = 20260101;
  std::vector<std::string> categories{"sexual", "violence", "hate"};
  RunPaths paths;
  std::vector<std::string> text_templates{"a photo of a {} person", "a {} woman",
                                          "a painting of a {} man"};
  std::vector<std::string> visual_templates{"a woman", "a man on a street",
                                            "a portrait of a person"};
  SyntheticEmbeddingConfig synthetic;
  SvmOptions svm;
  TextualConfig textual;
  VisualConfig visual;
  ToyPipelineConfig pipeline;
  JudgeOptions judge;
  BenchmarkSettings benchmark;
  SweepSettings sweep;
  unsigned threads = 0;
  std::filesystem::path base_dir;  // relative paths resolve here

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path out_dir() const { return resolve(paths.out_dir); }
  std::filesystem::path text_manifest() const;
  std::filesystem::path visual_manifest() const;
  std::filesystem::path bank_dir() const;
  std::filesystem::path visual_steering_dir() const;

  // Derives every per-module seed from `seed` through named substreams.
  SyntheticEmbeddingConfig synthetic_config() const;
  SvmOptions svm_options() const;
  ToyPipelineConfig pipeline_config() const;
  JudgeOptions judge_options() const;
};

RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const RunConfig& cfg);
nlohmann::json load_config_json(const std::filesystem::path& path);
// "a.b.c=value": value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);
// Throws a config error on the first violated invariant. With check_paths,
// referenced input files must exist.
void validate_config(const RunConfig& cfg, bool check_paths);

}  // namespace dualguard

#endif  // DUALGUARD_CONFIG_HPP_
