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

#ifndef DUALGUARD_TOY_PIPELINE_HPP_
#define DUALGUARD_TOY_PIPELINE_HPP_

#include <cstdint>
#include <vector>

#include "tensor.hpp"
#include "visual_suppression.hpp"

namespace dualguard {

struct ToyPipelineConfig {
  std::size_t steps = 10;       // T
  std::size_t layers = 2;       // cross-attention layers per step
  std::size_t positions = 16;   // P
  std::size_t text_dim = 64;    // d
  std::size_t visual_dim = 32;  // d_v
  double eta = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SuppressionHook {
  const VisualSteeringSet* steering = nullptr;
  VisualConfig config;
};

struct ToyRun {
  std::vector<double> final_feature;      // mean of the final latent over positions
  std::vector<VisualFeature> features;    // pre-hook h^{t,l}, when recorded
};

// Deterministic stand-in for a cross-attention denoiser. The latent starts
// from a seeded Gaussian; for t = T..1 and each layer l:
//   h = softmax(z W_Q (X W_K)^T / sqrt(d_v)) X W_V,  z <- z + eta * hook(h).
// All weights and the initial latent derive from config().seed, so every run
// with the same config shares them.
class ToyDenoiser {
 public:
  explicit ToyDenoiser(const ToyPipelineConfig& config);

  const ToyPipelineConfig& config() const { return config_; }
  ToyRun run(const Tensor& text, const SuppressionHook* hook = nullptr,
             bool record = false) const;
  std::vector<double> initial_feature() const { return row_mean(latent_); }

 private:
  ToyPipelineConfig config_;
  std::vector<Tensor> query_, key_, value_;
  Tensor latent_;
};

}  // namespace dualguard

#endif  // DUALGUARD_TOY_PIPELINE_HPP_
