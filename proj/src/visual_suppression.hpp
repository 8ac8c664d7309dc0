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

#ifndef DUALGUARD_VISUAL_SUPPRESSION_HPP_
#define DUALGUARD_VISUAL_SUPPRESSION_HPP_

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace dualguard {

struct StepLayer {
  int step = 0;
  int layer = 0;

  friend auto operator<=>(const StepLayer&, const StepLayer&) = default;
};

// Cross-attention output at one (step, layer): P positions x d_l channels.
struct VisualFeature {
  int step = 0;
  int layer = 0;
  Tensor values;

  StepLayer key() const { return {step, layer}; }
};

// Per (step, layer): features of the N pairs, aligned by pair index.
using FeatureSeries = std::map<StepLayer, std::vector<Tensor>>;

struct VisualConfig {
  double beta = 2.0;  // suppression strength

  void validate() const;
};

class VisualSteeringSet {
 public:
  VisualSteeringSet() = default;
  VisualSteeringSet(std::vector<std::string> categories, std::vector<int> steps,
                    std::vector<int> layers, std::size_t channels);

  const std::vector<std::string>& categories() const { return categories_; }
  const std::vector<int>& steps() const { return steps_; }
  const std::vector<int>& layers() const { return layers_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return vectors_.empty(); }

  bool contains(StepLayer key) const { return vectors_.count(key) != 0; }
  // Unit vector for (key, category), or nullopt when that entry is inert.
  const std::optional<std::vector<float>>& vector(StepLayer key, std::size_t category) const;
  void set(StepLayer key, std::size_t category, std::optional<std::vector<float>> v);

  std::size_t inert_count() const;
  // Complete steps x layers grid, one slot per category, unit norms.
  void validate() const;

  friend bool operator==(const VisualSteeringSet&, const VisualSteeringSet&) = default;

 private:
  std::vector<std::string> categories_;
  std::vector<int> steps_;
  std::vector<int> layers_;
  std::size_t channels_ = 0;
  std::map<StepLayer, std::vector<std::optional<std::vector<float>>>> vectors_;
};

// Difference of means over pairs and spatial positions, normalized. Returns
// nullopt (inert) when the difference has norm < 1e-9.
std::optional<std::vector<float>> steering_direction(const std::vector<Tensor>& unsafe,
                                                     const std::vector<Tensor>& safe);

// unsafe[c] and safe[c] hold the paired features of category c.
VisualSteeringSet compute_visual_steering(const std::vector<std::string>& categories,
                                          const std::vector<FeatureSeries>& unsafe,
                                          const std::vector<FeatureSeries>& safe);

// h~_p = h_p - sum_c max(0, beta <h_p, v_c>) v_c per position, all terms from
// the original h_p. Inert entries are skipped.
Tensor suppress_values(const Tensor& h, const VisualSteeringSet& steering, StepLayer key,
                       const VisualConfig& cfg);
VisualFeature suppress(const VisualFeature& h, const VisualSteeringSet& steering,
                       const VisualConfig& cfg);

// Directory layout: index.json mapping (step, layer, category) to a .dtvt
// file, with inert entries listed explicitly.
void save_visual_steering(const VisualSteeringSet& set, const std::filesystem::path& dir);
VisualSteeringSet load_visual_steering(const std::filesystem::path& dir);

}  // namespace dualguard

#endif  // DUALGUARD_VISUAL_SUPPRESSION_HPP_
