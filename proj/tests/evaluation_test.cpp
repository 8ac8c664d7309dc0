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

#include "evaluation.hpp"

#include <gtest/gtest.h>

#include "config.hpp"
#include "error.hpp"
#include "experiment.hpp"

namespace dualguard {
namespace {

TEST(Dsr, Arithmetic) {
  EXPECT_DOUBLE_EQ(compute_dsr(100, 5), 95.0);
  EXPECT_DOUBLE_EQ(compute_dsr(100, 100), 0.0);
  // More unsafe outputs after the defense: negative, not clamped.
  EXPECT_NEAR(compute_dsr(300, 337), -12.333333333333334, 1e-12);
  EXPECT_LT(compute_dsr(1, 2), 0.0);
  try {
    compute_dsr(0, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
  EXPECT_FALSE(try_compute_dsr(0, 3).has_value());
}

TEST(AblationFlags, Labels) {
  EXPECT_EQ((AblationFlags{true, true}.label()), "T+V");
  EXPECT_EQ((AblationFlags{true, false}.label()), "T");
  EXPECT_EQ((AblationFlags{false, true}.label()), "V");
  EXPECT_EQ((AblationFlags{false, false}.label()), "none");
}

// A reduced benchmark shared by the tests below.
class SmallBenchmark : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    RunConfig cfg;
    cfg.synthetic.pairs_per_category = 24;
    cfg.benchmark.unsafe_per_category = 24;
    cfg.benchmark.benign = 16;
    cfg.pipeline.steps = 5;
    exp_ = build_experiment(cfg).release();
  }
  static void TearDownTestSuite() { delete exp_; }
  static Experiment* exp_;
};
Experiment* SmallBenchmark::exp_ = nullptr;

TEST_F(SmallBenchmark, OffOffIsZero) {
  const auto r = exp_->harness->run(AblationFlags{false, false}, TextualConfig{}, VisualConfig{});
  ASSERT_TRUE(r.overall.dsr.has_value());
  EXPECT_EQ(*r.overall.dsr, 0.0);
  EXPECT_EQ(r.overall.n_b, r.overall.n_d);
  EXPECT_EQ(r.benign_cosine, 1.0);
  EXPECT_TRUE(r.consistent());
}

TEST_F(SmallBenchmark, ReportJsonRoundTrip) {
  const auto r = exp_->harness->run(AblationFlags{}, TextualConfig{}, VisualConfig{});
  EXPECT_TRUE(r.consistent());
  const auto back = DefenseReport::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(back.per_category, r.per_category);
  EXPECT_EQ(back.records, r.records);
}

TEST_F(SmallBenchmark, SingleValueSweepMatchesRun) {
  const TextualConfig textual{1.0, 0.2};
  const auto rows = run_sweep(*exp_->harness, SweepParam::kEpsilonF, {0.2}, TextualConfig{},
                              VisualConfig{}, AblationFlags{true, false});
  ASSERT_EQ(rows.size(), 1u);
  const auto direct = exp_->harness->run(AblationFlags{true, false}, textual, VisualConfig{});
  EXPECT_EQ(rows[0].report.to_json(), direct.to_json());
  EXPECT_THROW(run_sweep(*exp_->harness, SweepParam::kLambda, {0.5, 0.2}, TextualConfig{},
                         VisualConfig{}, AblationFlags{}),
               Error);
}

TEST_F(SmallBenchmark, CsvShapes) {
  const auto rows = run_sweep(*exp_->harness, SweepParam::kLambda, {0.5, 1.0}, TextualConfig{},
                              VisualConfig{}, AblationFlags{});
  const auto csv = sweep_to_csv(SweepParam::kLambda, rows, exp_->harness->categories());
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "param,value,dsr_overall,dsr_sexual,dsr_violence,dsr_hate,benign_cosine,"
            "benign_rel_change");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Sweep, ParamNames) {
  EXPECT_EQ(parse_sweep_param("lambda"), SweepParam::kLambda);
  EXPECT_EQ(parse_sweep_param("epsilon_f"), SweepParam::kEpsilonF);
  EXPECT_THROW(parse_sweep_param("beta"), Error);
}

}  // namespace
}  // namespace dualguard
