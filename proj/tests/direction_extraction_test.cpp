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

#include "direction_extraction.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "error.hpp"
#include "experiment.hpp"
#include "test_support.hpp"
#include "util.hpp"

namespace dualguard {
namespace {

using testing::TempDir;

PairwiseSvm svm(std::size_t c, std::size_t j, std::vector<double> normal) {
  PairwiseSvm s;
  s.c = c;
  s.j = j;
  s.normal = std::move(normal);
  return s;
}

std::vector<std::vector<double>> cluster(Rng& rng, double cx, double cy, std::size_t n) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back({cx + 0.1 * rng.normal(), cy + 0.1 * rng.normal()});
  }
  return pts;
}

TEST(Pooling, MeanOfRows) {
  EXPECT_EQ(pool_embedding(Tensor(Shape{2, 2}, {1, 2, 3, 4})), (std::vector<double>{2, 3}));
}

TEST(PairwiseSvm, SeparatesClustersAlongTheirAxis) {
  Rng rng(42);
  const auto pos = cluster(rng, 5, 0, 50);
  const auto neg = cluster(rng, -5, 0, 50);
  const auto s = train_pairwise_svm(pos, neg, SvmOptions{.seed = 1});
  EXPECT_EQ(s.train_accuracy, 1.0);
  EXPECT_FALSE(s.degenerate);
  const double angle = std::acos(s.normal[0] / norm2(s.normal)) * 180.0 / std::numbers::pi;
  EXPECT_LE(angle, 5.0);
  for (const auto& p : pos) EXPECT_GT(s.score(p), 0.0);
}

TEST(PairwiseSvm, IdenticalSetsAreDegenerate) {
  Rng rng(1);
  const auto pts = cluster(rng, 1, 1, 10);
  const auto s = train_pairwise_svm(pts, pts, SvmOptions{});
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(norm2(s.normal), 0.0);
}

TEST(PairwiseSvm, SameSeedSameNormal) {
  Rng rng(9);
  const auto pos = cluster(rng, 1, 2, 30);
  const auto neg = cluster(rng, -1, 0, 30);
  const auto a = train_pairwise_svm(pos, neg, SvmOptions{.seed = 5});
  const auto b = train_pairwise_svm(pos, neg, SvmOptions{.seed = 5});
  EXPECT_EQ(a.normal, b.normal);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Aggregation, PairwiseNormalsSum) {
  const std::vector<PairwiseSvm> svms{svm(0, 1, {1, 0, 0}), svm(0, 2, {0, 1, 0}),
                                      svm(1, 2, {0, 0, 1})};
  const auto w0 = aggregate_category_direction(svms, 0);
  EXPECT_NEAR(w0[0], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(w0[1], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(w0[2], 0.0, 1e-12);
  // Category 2 only appears as the negative side: w = -(e2 + e3)/sqrt(2).
  const auto w2 = aggregate_category_direction(svms, 2);
  EXPECT_NEAR(w2[1], -1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(w2[2], -1 / std::sqrt(2.0), 1e-12);
  // Order of the input list does not matter.
  const std::vector<PairwiseSvm> shuffled{svms[2], svms[0], svms[1]};
  EXPECT_EQ(aggregate_category_direction(shuffled, 0), w0);
}

TEST(Aggregation, ZeroNormalsRaise) {
  const std::vector<PairwiseSvm> svms{svm(0, 1, {0, 0})};
  try {
    aggregate_category_direction(svms, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
}

TEST(SteeringVector, SinglePairAndZero) {
  EXPECT_EQ(compute_steering_vector({{{0, 2}, {0, 0}}}), (std::vector<double>{0, 1}));
  EXPECT_THROW(compute_steering_vector({{{1, 1}, {1, 1}}}), Error);
}

TEST(SteeringVector, NoiseFreePairsGiveTheAxis) {
  SyntheticEmbeddingConfig cfg;
  cfg.noise = 0.0;
  cfg.safe_mean_norm = 0.0;
  cfg.pairs_per_category = 4;
  const auto data = generate_synthetic_pairs(cfg);
  const auto pooled = pool_pairs(data.pairs);
  for (std::size_t c = 0; c < cfg.categories; ++c) {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    for (const auto& p : pooled) {
      if (p.category == c) pairs.emplace_back(p.unsafe, p.safe);
    }
    const auto delta = compute_steering_vector(pairs);
    for (std::size_t k = 0; k < cfg.dim; ++k) {
      EXPECT_NEAR(delta[k], data.geometry.axes[c][k], 1e-7);
    }
  }
}

class DefaultBank : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new SyntheticEmbeddingConfig();
    data_ = new SyntheticPairs(generate_synthetic_pairs(*cfg_, "text_train"));
    result_ = new BankTrainingResult(train_direction_bank(
        pool_pairs(data_->pairs), {"a", "b", "c"}, SvmOptions{.seed = 3}, "test", 0));
  }
  static void TearDownTestSuite() {
    delete result_;
    delete data_;
    delete cfg_;
  }
  static SyntheticEmbeddingConfig* cfg_;
  static SyntheticPairs* data_;
  static BankTrainingResult* result_;
};
SyntheticEmbeddingConfig* DefaultBank::cfg_ = nullptr;
SyntheticPairs* DefaultBank::data_ = nullptr;
BankTrainingResult* DefaultBank::result_ = nullptr;

TEST_F(DefaultBank, UnitVectorsAndSeparableTraining) {
  const auto& bank = result_->bank;
  EXPECT_FALSE(result_->direction_error.has_value());
  ASSERT_TRUE(bank.has_directions());
  EXPECT_NO_THROW(bank.validate());
  for (const auto& s : result_->svms) EXPECT_GE(s.train_accuracy, 0.99);
}

TEST_F(DefaultBank, SteeringVectorsWithinFiveDegrees) {
  for (std::size_t c = 0; c < cfg_->categories; ++c) {
    const double cos = dot(result_->bank.steering[c], to_double(data_->geometry.axes[c]));
    EXPECT_LE(std::acos(std::min(1.0, cos)) * 180.0 / std::numbers::pi, 5.0);
  }
}

TEST_F(DefaultBank, DirectionsPointTowardTheirCategory) {
  // One-vs-one aggregation of orthonormal axes lands near 2/sqrt(6) rather
  // than on the axis itself; it still favors its own axis over the others.
  for (std::size_t c = 0; c < cfg_->categories; ++c) {
    const auto& w = result_->bank.directions[c];
    const double own = dot(w, to_double(data_->geometry.axes[c]));
    EXPECT_GT(own, 0.7);
    EXPECT_LT(own, 0.9);
    for (std::size_t o = 0; o < cfg_->categories; ++o) {
      if (o != c) EXPECT_LT(dot(w, to_double(data_->geometry.axes[o])), 0.0);
    }
  }
}

TEST_F(DefaultBank, RetrainingIsBitExact) {
  const auto again = train_direction_bank(pool_pairs(data_->pairs), {"a", "b", "c"},
                                          SvmOptions{.seed = 3}, "test", 1);
  EXPECT_EQ(again.bank.directions, result_->bank.directions);
  EXPECT_EQ(again.bank.steering, result_->bank.steering);
}

TEST_F(DefaultBank, SaveLoadAndCorruption) {
  TempDir dir;
  save_bank(result_->bank, dir.path());
  const auto back = load_bank(dir.path());
  EXPECT_EQ(back.directions, result_->bank.directions);
  EXPECT_EQ(back.steering, result_->bank.steering);
  EXPECT_EQ(back.categories, result_->bank.categories);
  auto bytes = read_file_bytes(dir / "w_1.dtvt");
  bytes.back() ^= 0x01;
  write_file_bytes(dir / "w_1.dtvt", bytes);
  try {
    load_bank(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

TEST(DirectionBank, SingleCategoryKeepsSteeringOnly) {
  SyntheticEmbeddingConfig cfg;
  cfg.categories = 1;
  cfg.pairs_per_category = 16;
  const auto data = generate_synthetic_pairs(cfg);
  const auto r = train_direction_bank(pool_pairs(data.pairs), {"only"}, SvmOptions{}, "x");
  EXPECT_TRUE(r.direction_error.has_value());
  EXPECT_FALSE(r.bank.has_directions());
  ASSERT_EQ(r.bank.steering.size(), 1u);
  EXPECT_NEAR(norm2(r.bank.steering[0]), 1.0, 1e-6);
  TempDir dir;
  save_bank(r.bank, dir.path());
  EXPECT_FALSE(load_bank(dir.path()).has_directions());
}

}  // namespace
}  // namespace dualguard
