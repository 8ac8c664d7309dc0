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

#ifndef DUALGUARD_EVALUATION_HPP_
#define DUALGUARD_EVALUATION_HPP_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "direction_extraction.hpp"
#include "judge.hpp"
#include "textual_intervention.hpp"
#include "toy_pipeline.hpp"
#include "visual_suppression.hpp"

namespace dualguard {

// (N_b - N_d) / N_b * 100. Negative values are kept. N_b = 0 throws a
// numeric error; reports store that case as null ("N/A").
double compute_dsr(std::size_t n_b, std::size_t n_d);
std::optional<double> try_compute_dsr(std::size_t n_b, std::size_t n_d);

struct AblationFlags {
  bool textual = true;
  bool visual = true;

  std::string label() const;
  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct CategoryStats {
  std::string category;  // "overall" for the aggregate row
  std::size_t prompts = 0;
  std::size_t n_b = 0;
  std::size_t n_d = 0;
  std::optional<double> dsr;

  friend bool operator==(const CategoryStats&, const CategoryStats&) = default;
};

struct PromptRecord {
  std::string kind;  // "unsafe" or "benign"
  std::size_t index = 0;
  std::optional<std::string> category;
  bool undefended_unsafe = false;
  bool defended_unsafe = false;
  double undefended_probability = 0.0;
  double defended_probability = 0.0;
  double embedding_rel_change = 0.0;
  double feature_cosine = 1.0;
  double cap_factor = 1.0;
  std::optional<std::string> error;

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

struct DefenseReport {
  AblationFlags flags;
  TextualConfig textual;
  VisualConfig visual;
  std::vector<CategoryStats> per_category;
  CategoryStats overall;
  // Drift proxies on benign prompts (stand-ins for image-quality metrics):
  // mean cosine of defended vs. undefended final features, and mean
  // ||purify(X) - X||_F / ||X||_F.
  double benign_cosine = 1.0;
  double benign_rel_change = 0.0;
  std::size_t benign_flagged_undefended = 0;
  std::size_t benign_flagged_defended = 0;
  std::size_t failures = 0;
  std::vector<PromptRecord> records;
  nlohmann::json config_snapshot;

  nlohmann::json to_json() const;
  static DefenseReport from_json(const nlohmann::json& j);
  // DSR fields agree with compute_dsr over the report's own counts.
  bool consistent() const;
};

struct EvalPrompt {
  std::size_t category = 0;
  Tensor embedding;
};

// Holds the shared judge and the undefended runs, computed once, so every
// ablation arm and sweep point compares against the same baseline.
class BenchmarkHarness {
 public:
  BenchmarkHarness(std::vector<std::string> categories, std::vector<EvalPrompt> unsafe,
                   std::vector<Tensor> benign, const CategoryDirectionBank* bank,
                   const VisualSteeringSet* steering, const ToyDenoiser* denoiser,
                   const JudgeProbe* judge, unsigned threads = 1);

  DefenseReport run(const AblationFlags& flags, const TextualConfig& textual,
                    const VisualConfig& visual) const;

  const std::vector<std::string>& categories() const { return categories_; }

 private:
  struct Baseline {
    std::vector<double> feature;
    JudgeVerdict verdict;
  };

  std::vector<std::string> categories_;
  std::vector<EvalPrompt> unsafe_;
  std::vector<Tensor> benign_;
  const CategoryDirectionBank* bank_;
  const VisualSteeringSet* steering_;
  const ToyDenoiser* denoiser_;
  const JudgeProbe* judge_;
  unsigned threads_;
  std::vector<Baseline> unsafe_baseline_;
  std::vector<Baseline> benign_baseline_;
};

enum class SweepParam { kLambda, kEpsilonF };

const char* sweep_param_name(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

struct SweepRow {
  double value = 0.0;
  DefenseReport report;
};

// One benchmark run per value (ascending), everything else fixed.
std::vector<SweepRow> run_sweep(const BenchmarkHarness& harness, SweepParam param,
                                const std::vector<double>& values,
                                const TextualConfig& textual, const VisualConfig& visual,
                                const AblationFlags& flags);

// Header: param,value,dsr_overall,dsr_<category>...,benign_cosine,benign_rel_change
std::string sweep_to_csv(SweepParam param, const std::vector<SweepRow>& rows,
                         const std::vector<std::string>& categories);
std::string report_summary_csv(const DefenseReport& report);
std::string report_records_csv(const DefenseReport& report);
std::string ablation_csv(const std::vector<DefenseReport>& arms);
std::string format_number(double v);

}  // namespace dualguard

#endif  // DUALGUARD_EVALUATION_HPP_
