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

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace dualguard {

namespace {

// Row-major L x d working copy in double.
struct Work {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  explicit Work(const Tensor& t) : rows(t.rows()), cols(t.cols()), v(to_double(t.data())) {}

  std::span<double> row(std::size_t r) { return std::span<double>(v).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(v).subspan(r * cols, cols);
  }
  double norm() const { return norm2(v); }

  Tensor to_tensor() const { return Tensor(Shape{rows, cols}, to_float(v)); }
};

void check_input(const Tensor& x, const CategoryDirectionBank& bank) {
  require(x.ndim() == 2, ErrorKind::kData, "prompt embedding must be L x d");
  require(x.all_finite(), ErrorKind::kData, "prompt embedding has non-finite values");
  if (bank.size() > 0) {
    require(x.cols() == bank.dim(), ErrorKind::kData,
            "embedding dim " + std::to_string(x.cols()) + " does not match bank dim " +
                std::to_string(bank.dim()));
  }
}

std::vector<double> projection_norms(const Work& x, const CategoryDirectionBank& bank) {
  std::vector<double> out;
  for (const auto& w : bank.directions) {
    double s = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
      const double p = dot(std::span<const float>(w), x.row(r));
      s += p * p;
    }
    out.push_back(std::sqrt(s));
  }
  return out;
}

Work remove_work(const Tensor& x, const CategoryDirectionBank& bank, double lambda,
                 InterventionTrace* trace) {
  Work out(x);
  const double input_norm = out.norm();
  if (trace) {
    trace->input_norm = input_norm;
    trace->projection_before = projection_norms(out, bank);
  }
  if (!bank.has_directions() || lambda == 0.0 || input_norm == 0.0) {
    if (trace) {
      trace->projection_after = trace->projection_before;
      trace->removal_norm = input_norm;
      trace->rescale_factor = 1.0;
    }
    return out;
  }
  const Work original = out;
  for (std::size_t r = 0; r < out.rows; ++r) {
    const auto xr = original.row(r);
    auto orow = out.row(r);
    for (const auto& w : bank.directions) {
      const double p = lambda * dot(std::span<const float>(w), xr);
      for (std::size_t k = 0; k < out.cols; ++k) orow[k] -= p * double{w[k]};
    }
  }
  const double removed_norm = out.norm();
  if (trace) {
    trace->projection_after = projection_norms(out, bank);
    trace->removal_norm = removed_norm;
  }
  require(removed_norm >= 1e-12, ErrorKind::kNumeric,
          "degenerate collapse: embedding lies entirely in the unsafe span");
  const double scale = input_norm / removed_norm;
  for (auto& v : out.v) v *= scale;
  if (trace) trace->rescale_factor = scale;
  return out;
}

Work steer_work(Work removed, const Tensor& x, const CategoryDirectionBank& bank,
                const TextualConfig& cfg, InterventionTrace* trace) {
  const Work original(x);
  const double input_norm = original.norm();
  const std::size_t num_categories = bank.steering.size();
  if (num_categories > 0 && cfg.lambda != 0.0 && input_norm > 0.0) {
    std::vector<double> shift(removed.cols, 0.0);
    for (const auto& delta : bank.steering) {
      for (std::size_t k = 0; k < shift.size(); ++k) shift[k] += delta[k];
    }
    const double scale = cfg.lambda * input_norm / static_cast<double>(num_categories);
    for (std::size_t r = 0; r < removed.rows; ++r) {
      auto row = removed.row(r);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] -= scale * shift[k];
    }
  }
  // Delta is measured against the original X, so the cap bounds removal and
  // steering together.
  std::vector<double> delta(removed.v.size());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = removed.v[i] - original.v[i];
  const double delta_norm = norm2(delta);
  double cap = 1.0;
  if (delta_norm > 0.0) cap = std::min(1.0, cfg.epsilon_f * input_norm / delta_norm);
  Work out = original;
  for (std::size_t i = 0; i < delta.size(); ++i) out.v[i] += cap * delta[i];
  if (trace) {
    trace->steering_norm = delta_norm;
    trace->cap_factor = cap;
  }
  return out;
}

void finish_trace(InterventionTrace* trace, const Tensor& out, const Tensor& x) {
  if (!trace) return;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = double{out.data()[i]} - double{x.data()[i]};
    s += d * d;
  }
  trace->output_change = std::sqrt(s);
}

}  // namespace

void TextualConfig::validate() const {
  require(std::isfinite(lambda) && lambda >= 0, ErrorKind::kConfig,
          "textual.lambda must be finite and >= 0");
  require(std::isfinite(epsilon_f) && epsilon_f >= 0, ErrorKind::kConfig,
          "textual.epsilon_f must be finite and >= 0");
}

nlohmann::json InterventionTrace::to_json() const {
  return nlohmann::json{{"input_norm", input_norm},
                                {"projection_before", projection_before},
                                {"projection_after", projection_after},
                                {"removal_norm", removal_norm},
                                {"rescale_factor", rescale_factor},
                                {"steering_norm", steering_norm},
                                {"cap_factor", cap_factor},
                                {"output_change", output_change}};
}

Tensor remove_malicious_components(const Tensor& x, const CategoryDirectionBank& bank,
                                   double lambda, InterventionTrace* trace) {
  check_input(x, bank);
  Tensor out = remove_work(x, bank, lambda, trace).to_tensor();
  finish_trace(trace, out, x);
  return out;
}

Tensor steer_away(const Tensor& x_removed, const Tensor& x, const CategoryDirectionBank& bank,
                  const TextualConfig& cfg, InterventionTrace* trace) {
  check_input(x, bank);
  check_input(x_removed, bank);
  require(x_removed.shape() == x.shape(), ErrorKind::kData,
          "steer_away: embedding shapes differ");
  Tensor out = steer_work(Work(x_removed), x, bank, cfg, trace).to_tensor();
  finish_trace(trace, out, x);
  return out;
}

PurifyResult purify(const Tensor& x, const CategoryDirectionBank& bank,
                    const TextualConfig& cfg) {
  cfg.validate();
  check_input(x, bank);
  PurifyResult result;
  Work removed = remove_work(x, bank, cfg.lambda, &result.trace);
  result.output = steer_work(std::move(removed), x, bank, cfg, &result.trace).to_tensor();
  finish_trace(&result.trace, result.output, x);
  return result;
}

}  // namespace dualguard
