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

#include "textual_intervention.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "error.hpp"
#include "test_support.hpp"

namespace dualguard {
namespace {

using testing::unit;

CategoryDirectionBank bank_of(std::vector<std::vector<float>> w,
                              std::vector<std::vector<float>> delta) {
  CategoryDirectionBank b;
  for (std::size_t c = 0; c < delta.size(); ++c) b.categories.push_back("c" + std::to_string(c));
  b.directions = std::move(w);
  b.steering = std::move(delta);
  return b;
}

// Orthonormal random directions via Gram-Schmidt.
std::vector<std::vector<float>> orthonormal(std::mt19937_64& gen, std::size_t count,
                                            std::size_t dim) {
  std::normal_distribution<double> n;
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    std::vector<double> v(dim);
    for (auto& x : v) x = n(gen);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double p = dot(v, b);
        for (std::size_t k = 0; k < dim; ++k) v[k] -= p * b[k];
      }
    }
    const double len = norm2(v);
    for (auto& x : v) x /= len;
    basis.push_back(v);
  }
  std::vector<std::vector<float>> out;
  for (const auto& b : basis) out.push_back(to_float(b));
  return out;
}

TEST(Removal, HandExample) {
  const Tensor x(Shape{2, 2}, {1, 0, 0, 1});
  const auto bank = bank_of({{1, 0}}, {{0, 1}});
  InterventionTrace trace;
  const Tensor out = remove_malicious_components(x, bank, 1.0, &trace);
  EXPECT_DOUBLE_EQ(trace.removal_norm, 1.0);  // pre-rescale [[0,0],[0,1]]
  EXPECT_EQ(trace.projection_after[0], 0.0);
  EXPECT_EQ(out.at(0, 0), 0.0f);
  EXPECT_EQ(out.at(0, 1), 0.0f);
  EXPECT_EQ(out.at(1, 0), 0.0f);
  EXPECT_FLOAT_EQ(out.at(1, 1), std::sqrt(2.0f));
}

TEST(Removal, LambdaZeroAndOrthogonalInputsAreNoOps) {
  std::mt19937_64 gen(1);
  const Tensor x = testing::random_matrix(gen, 8, 4);
  const auto bank = bank_of({unit(4, 0)}, {unit(4, 1)});
  EXPECT_EQ(remove_malicious_components(x, bank, 0.0), x);

  Tensor y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) y.at(r, 0) = 0.0f;
  InterventionTrace trace;
  EXPECT_EQ(remove_malicious_components(y, bank, 1.0, &trace), y);
  EXPECT_EQ(trace.rescale_factor, 1.0);
}

TEST(Removal, CollapseIsAnError) {
  const Tensor x(Shape{2, 2}, {1, 0, 3, 0});
  try {
    remove_malicious_components(x, bank_of({{1, 0}}, {{0, 1}}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNumeric);
  }
}

TEST(Removal, NormRestoredAndPlantedDirectionsCleared) {
  std::mt19937_64 gen(17);
  const auto w = orthonormal(gen, 3, 64);
  const auto bank = bank_of(w, orthonormal(gen, 3, 64));
  for (int i = 0; i < 100; ++i) {
    const Tensor x = testing::random_matrix(gen, 8, 64, 1.0 + i);
    InterventionTrace trace;
    const Tensor out = remove_malicious_components(x, bank, 1.0, &trace);
    EXPECT_NEAR(frobenius_norm(out), frobenius_norm(x), 1e-5 * frobenius_norm(x));
    for (double p : trace.projection_after) EXPECT_LE(p, 1e-5);
  }
}

TEST(Steering, CapBindsAtTenPercent) {
  const Tensor x(Shape{1, 2}, {1, 0});
  const auto bank = bank_of({}, {{0, 1}});
  InterventionTrace trace;
  const Tensor out = steer_away(x, x, bank, TextualConfig{1.0, 0.1}, &trace);
  EXPECT_FLOAT_EQ(out.at(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(out.at(0, 1), -0.1f);
  EXPECT_DOUBLE_EQ(trace.steering_norm, 1.0);
  EXPECT_DOUBLE_EQ(trace.cap_factor, 0.1);
}

TEST(Steering, LargeEpsilonLeavesStepUncapped) {
  const Tensor x(Shape{1, 2}, {1, 0});
  const Tensor out = steer_away(x, x, bank_of({}, {{0, 1}}), TextualConfig{1.0, 10.0});
  EXPECT_FLOAT_EQ(out.at(0, 0), 1.0f);
  EXPECT_FLOAT_EQ(out.at(0, 1), -1.0f);
}

TEST(Steering, ZeroSteeringIsIdentity) {
  const Tensor x(Shape{1, 2}, {1, 2});
  InterventionTrace trace;
  EXPECT_EQ(steer_away(x, x, bank_of({}, {{0, 0}}), TextualConfig{}, &trace), x);
  EXPECT_EQ(trace.cap_factor, 1.0);
}

TEST(Purify, LambdaZeroIsIdentity) {
  std::mt19937_64 gen(2);
  const Tensor x = testing::random_matrix(gen, 8, 16);
  const auto bank = bank_of(orthonormal(gen, 3, 16), orthonormal(gen, 3, 16));
  for (double eps : {0.0, 0.1, 5.0}) {
    EXPECT_EQ(purify(x, bank, TextualConfig{0.0, eps}).output, x);
  }
}

TEST(Purify, CapAndHomogeneity) {
  std::mt19937_64 gen(23);
  const auto bank = bank_of(orthonormal(gen, 3, 64), orthonormal(gen, 3, 64));
  for (int i = 0; i < 50; ++i) {
    const Tensor x = testing::random_matrix(gen, 8, 64);
    for (double eps : {0.05, 0.1, 0.5}) {
      const auto r = purify(x, bank, TextualConfig{1.0, eps});
      double change = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        change += std::pow(double{r.output.data()[k]} - x.data()[k], 2);
      }
      EXPECT_LE(std::sqrt(change), eps * frobenius_norm(x) * (1 + 1e-6));
    }
    const auto base = purify(x, bank, TextualConfig{}).output;
    for (float alpha : {0.5f, 2.0f, 10.0f}) {
      Tensor ax = x;
      for (auto& v : ax.data()) v *= alpha;
      const auto scaled = purify(ax, bank, TextualConfig{}).output;
      double diff = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        diff += std::pow(double{scaled.data()[k]} - alpha * double{base.data()[k]}, 2);
      }
      EXPECT_LE(std::sqrt(diff), 1e-5 * alpha * frobenius_norm(base));
    }
  }
}

TEST(Purify, EmptyBankAndZeroInput) {
  const Tensor x(Shape{1, 2}, {1, 2});
  EXPECT_EQ(purify(x, CategoryDirectionBank{}, TextualConfig{}).output, x);
  const Tensor zero = Tensor::matrix(2, 2);
  EXPECT_EQ(purify(zero, bank_of({{1, 0}}, {{0, 1}}), TextualConfig{}).output, zero);
}

TEST(Purify, RejectsDimensionMismatchAndBadConfig) {
  const Tensor x(Shape{1, 3}, {1, 2, 3});
  EXPECT_THROW(purify(x, bank_of({{1, 0}}, {{0, 1}}), TextualConfig{}), Error);
  EXPECT_THROW((TextualConfig{-1.0, 0.1}.validate()), Error);
  EXPECT_THROW((TextualConfig{1.0, NAN}.validate()), Error);
}

TEST(Purify, TraceSerializes) {
  const Tensor x(Shape{2, 2}, {1, 0, 0, 1});
  const auto r = purify(x, bank_of({{1, 0}}, {{0, 1}}), TextualConfig{});
  const auto j = r.trace.to_json();
  EXPECT_TRUE(j.contains("cap_factor"));
  EXPECT_EQ(j["projection_before"].size(), 1u);
}

}  // namespace
}  // namespace dualguard
