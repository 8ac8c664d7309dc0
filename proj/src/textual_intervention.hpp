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

#ifndef DUALGUARD_TEXTUAL_INTERVENTION_HPP_
#define DUALGUARD_TEXTUAL_INTERVENTION_HPP_

#include <vector>

#include <nlohmann/json.hpp>

#include "direction_extraction.hpp"
#include "tensor.hpp"

namespace dualguard {

struct TextualConfig {
  double lambda = 1.0;     // intervention strength
  double epsilon_f = 0.1;  // maximum steering ratio

  void validate() const;
};

struct InterventionTrace {
  double input_norm = 0.0;
  // ||X w_c||_2 per category, before removal and after removal (pre-rescale).
  std::vector<double> projection_before;
  std::vector<double> projection_after;
  double removal_norm = 0.0;  // ||X'||_F before the scale is restored
  double rescale_factor = 1.0;
  double steering_norm = 0.0;  // ||X'' - X||_F before the cap
  double cap_factor = 1.0;
  double output_change = 0.0;  // ||out - X||_F

  nlohmann::json to_json() const;
};

// X' = X - lambda * sum_c (X w_c) w_c^T in one joint update, rescaled back to
// ||X||_F. A bank without directions, or lambda = 0, leaves X unchanged.
Tensor remove_malicious_components(const Tensor& x, const CategoryDirectionBank& bank,
                                   double lambda, InterventionTrace* trace = nullptr);

// X'' = X' - (lambda ||X||_F / C) sum_c delta_c on every row, then the total
// change from the original X is capped at epsilon_f ||X||_F.
Tensor steer_away(const Tensor& x_removed, const Tensor& x, const CategoryDirectionBank& bank,
                  const TextualConfig& cfg, InterventionTrace* trace = nullptr);

struct PurifyResult {
  Tensor output;
  InterventionTrace trace;
};

PurifyResult purify(const Tensor& x, const CategoryDirectionBank& bank,
                    const TextualConfig& cfg);

}  // namespace dualguard

#endif  // DUALGUARD_TEXTUAL_INTERVENTION_HPP_
