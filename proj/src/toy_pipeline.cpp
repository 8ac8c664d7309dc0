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

#include "toy_pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

Tensor gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Tensor t = Tensor::matrix(rows, cols);
  for (auto& v : t.data()) v = static_cast<float>(scale * rng.normal());
  return t;
}

void softmax_rows(Tensor& logits) {
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    const float peak = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (auto& v : row) {
      v = static_cast<float>(std::exp(double{v} - double{peak}));
      total += v;
    }
    for (auto& v : row) v = static_cast<float>(double{v} / total);
  }
}

}  // namespace

void ToyPipelineConfig::validate() const {
  require(steps >= 1, ErrorKind::kConfig, "pipeline.steps must be >= 1");
  require(layers >= 1, ErrorKind::kConfig, "pipeline.layers must be >= 1");
  require(positions >= 1, ErrorKind::kConfig, "pipeline.positions must be >= 1");
  require(text_dim >= 1 && visual_dim >= 1, ErrorKind::kConfig,
          "pipeline dimensions must be >= 1");
  require(std::isfinite(eta) && eta > 0, ErrorKind::kConfig, "pipeline.eta must be > 0");
}

ToyDenoiser::ToyDenoiser(const ToyPipelineConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed, "denoiser/weights");
  const double q_scale = 1.0 / std::sqrt(static_cast<double>(config_.visual_dim));
  const double kv_scale = 1.0 / std::sqrt(static_cast<double>(config_.text_dim));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    query_.push_back(gaussian_matrix(rng, config_.visual_dim, config_.visual_dim, q_scale));
    key_.push_back(gaussian_matrix(rng, config_.text_dim, config_.visual_dim, kv_scale));
    value_.push_back(gaussian_matrix(rng, config_.text_dim, config_.visual_dim, kv_scale));
  }
  Rng latent_rng(config_.seed, "denoiser/latent");
  latent_ = gaussian_matrix(latent_rng, config_.positions, config_.visual_dim, 1.0);
}

ToyRun ToyDenoiser::run(const Tensor& text, const SuppressionHook* hook, bool record) const {
  require(text.ndim() == 2 && text.cols() == config_.text_dim, ErrorKind::kData,
          "toy pipeline expects an L x " + std::to_string(config_.text_dim) + " embedding");
  ToyRun out;
  // Text-side projections do not depend on the latent.
  std::vector<Tensor> keys, values;
  for (std::size_t l = 0; l < config_.layers; ++l) {
    keys.push_back(matmul(text, key_[l]));
    values.push_back(matmul(text, value_[l]));
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(config_.visual_dim));
  Tensor z = latent_;
  for (std::size_t t = config_.steps; t >= 1; --t) {
    for (std::size_t l = 0; l < config_.layers; ++l) {
      const Tensor q = matmul(z, query_[l]);
      Tensor attn = matmul_transposed(q, keys[l]);
      for (auto& v : attn.data()) v = static_cast<float>(double{v} * inv_sqrt);
      softmax_rows(attn);
      Tensor h = matmul(attn, values[l]);
      const StepLayer key{static_cast<int>(t), static_cast<int>(l)};
      if (record) out.features.push_back(VisualFeature{key.step, key.layer, h});
      if (hook && hook->steering) h = suppress_values(h, *hook->steering, key, hook->config);
      auto zd = z.data();
      const auto hd = h.data();
      for (std::size_t i = 0; i < zd.size(); ++i) {
        zd[i] = static_cast<float>(double{zd[i]} + config_.eta * double{hd[i]});
      }
      require(z.all_finite(), ErrorKind::kNumeric,
              "toy pipeline produced a non-finite latent at step " + std::to_string(t));
    }
  }
  out.final_feature = row_mean(z);
  return out;
}

}  // namespace dualguard
