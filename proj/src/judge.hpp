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

#ifndef DUALGUARD_JUDGE_HPP_
#define DUALGUARD_JUDGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace dualguard {

struct JudgeOptions {
  std::size_t epochs = 300;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct JudgeVerdict {
  bool unsafe = false;
  std::size_t category = 0;  // argmax category
  double probability = 0.0;  // max unsafe probability over categories
};

// One logistic regression per category (category vs. safe) over standardized
// final features; an output is unsafe when any category reaches 0.5.
struct JudgeProbe {
  std::vector<std::string> categories;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::vector<std::vector<double>> weights;
  std::vector<double> biases;
  JudgeOptions options;
  double train_accuracy = 0.0;
  bool degenerate = false;

  double probability(std::size_t category, const std::vector<double>& feature) const;
  JudgeVerdict classify(const std::vector<double>& feature) const;
};

JudgeProbe train_judge(const std::vector<std::string>& categories,
                       const std::vector<std::vector<double>>& safe,
                       const std::vector<std::vector<std::vector<double>>>& unsafe_by_category,
                       const JudgeOptions& options);

}  // namespace dualguard

#endif  // DUALGUARD_JUDGE_HPP_
