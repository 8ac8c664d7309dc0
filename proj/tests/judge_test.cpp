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

#include "judge.hpp"

#include <gtest/gtest.h>

#include "util.hpp"

namespace dualguard {
namespace {

std::vector<std::vector<double>> blob(Rng& rng, std::vector<double> center, std::size_t n) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = center;
    for (auto& v : p) v += 0.3 * rng.normal();
    out.push_back(p);
  }
  return out;
}

TEST(Judge, SeparableClustersAreLearned) {
  Rng rng(5);
  const auto safe = blob(rng, {0, 0, 0}, 60);
  const std::vector<std::vector<std::vector<double>>> unsafe{blob(rng, {3, 0, 0}, 60),
                                                             blob(rng, {0, 3, 0}, 60)};
  const auto judge = train_judge({"a", "b"}, safe, unsafe, JudgeOptions{.seed = 1});
  EXPECT_GE(judge.train_accuracy, 0.99);
  std::size_t correct = 0;
  for (const auto& s : safe) correct += !judge.classify(s).unsafe;
  for (std::size_t c = 0; c < 2; ++c) {
    for (const auto& u : unsafe[c]) {
      const auto v = judge.classify(u);
      correct += v.unsafe && v.category == c;
    }
  }
  EXPECT_GE(correct, static_cast<std::size_t>(0.99 * 180));
}

TEST(Judge, SameSeedSameWeights) {
  Rng rng(6);
  const auto safe = blob(rng, {0, 0}, 20);
  const std::vector<std::vector<std::vector<double>>> unsafe{blob(rng, {1, 1}, 20)};
  const auto a = train_judge({"a"}, safe, unsafe, JudgeOptions{.seed = 2});
  const auto b = train_judge({"a"}, safe, unsafe, JudgeOptions{.seed = 2});
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.biases, b.biases);
}

}  // namespace
}  // namespace dualguard
