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

#include <cmath>

#include "error.hpp"
#include "tensor.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double JudgeProbe::probability(std::size_t category, const std::vector<double>& feature) const {
  require(feature.size() == feature_mean.size(), ErrorKind::kData,
          "judge feature dimension mismatch");
  double z = biases[category];
  const auto& w = weights[category];
  for (std::size_t i = 0; i < feature.size(); ++i) {
    z += w[i] * (feature[i] - feature_mean[i]) / feature_scale[i];
  }
  return sigmoid(z);
}

JudgeVerdict JudgeProbe::classify(const std::vector<double>& feature) const {
  JudgeVerdict v;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const double p = probability(c, feature);
    if (c == 0 || p > v.probability) {
      v.probability = p;
      v.category = c;
    }
  }
  v.unsafe = v.probability >= 0.5;
  return v;
}

JudgeProbe train_judge(const std::vector<std::string>& categories,
                       const std::vector<std::vector<double>>& safe,
                       const std::vector<std::vector<std::vector<double>>>& unsafe_by_category,
                       const JudgeOptions& options) {
  require(!safe.empty(), ErrorKind::kData, "judge needs safe examples");
  require(unsafe_by_category.size() == categories.size() && !categories.empty(),
          ErrorKind::kData, "judge needs unsafe examples for every category");
  const std::size_t d = safe.front().size();

  JudgeProbe probe;
  probe.categories = categories;
  probe.options = options;

  // Standardize with statistics over every training example.
  std::vector<const std::vector<double>*> all;
  for (const auto& x : safe) all.push_back(&x);
  for (const auto& set : unsafe_by_category) {
    require(!set.empty(), ErrorKind::kData, "judge needs unsafe examples for every category");
    for (const auto& x : set) all.push_back(&x);
  }
  probe.feature_mean.assign(d, 0.0);
  probe.feature_scale.assign(d, 0.0);
  for (const auto* x : all) {
    require(x->size() == d, ErrorKind::kData, "judge feature dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) probe.feature_mean[i] += (*x)[i];
  }
  for (auto& m : probe.feature_mean) m /= static_cast<double>(all.size());
  for (const auto* x : all) {
    for (std::size_t i = 0; i < d; ++i) {
      const double dev = (*x)[i] - probe.feature_mean[i];
      probe.feature_scale[i] += dev * dev;
    }
  }
  for (auto& s : probe.feature_scale) {
    s = std::sqrt(s / static_cast<double>(all.size()));
    if (s < 1e-12) s = 1.0;
  }
  auto standardize = [&](const std::vector<double>& x) {
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i) {
      z[i] = (x[i] - probe.feature_mean[i]) / probe.feature_scale[i];
    }
    return z;
  };

  const auto safe_mean = [&] {
    std::vector<double> m(d, 0.0);
    for (const auto& x : safe) {
      for (std::size_t i = 0; i < d; ++i) m[i] += x[i] / static_cast<double>(safe.size());
    }
    return m;
  }();

  for (std::size_t c = 0; c < categories.size(); ++c) {
    const auto& unsafe = unsafe_by_category[c];
    std::vector<double> unsafe_mean(d, 0.0);
    for (const auto& x : unsafe) {
      for (std::size_t i = 0; i < d; ++i) {
        unsafe_mean[i] += x[i] / static_cast<double>(unsafe.size());
      }
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < d; ++i) gap += std::pow(unsafe_mean[i] - safe_mean[i], 2);
    if (std::sqrt(gap) < 1e-9) probe.degenerate = true;

    struct Sample {
      std::vector<double> x;
      double y;
    };
    std::vector<Sample> samples;
    for (const auto& x : safe) samples.push_back({standardize(x), 0.0});
    for (const auto& x : unsafe) samples.push_back({standardize(x), 1.0});
    // Balance the classes so the 0.5 threshold sits between them.
    const double w_pos = 0.5 * static_cast<double>(samples.size()) /
                         static_cast<double>(unsafe.size());
    const double w_neg = 0.5 * static_cast<double>(samples.size()) /
                         static_cast<double>(safe.size());

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(options.seed, "judge/" + std::to_string(c));
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t idx : order) {
        const auto& s = samples[idx];
        double z = b;
        for (std::size_t i = 0; i < d; ++i) z += w[i] * s.x[i];
        const double g = (sigmoid(z) - s.y) * (s.y > 0.5 ? w_pos : w_neg);
        for (std::size_t i = 0; i < d; ++i) {
          w[i] -= options.learning_rate * (g * s.x[i] + options.l2 * w[i]);
        }
        b -= options.learning_rate * g;
      }
    }
    probe.weights.push_back(std::move(w));
    probe.biases.push_back(b);
  }

  std::size_t correct = 0, total = 0;
  for (const auto& x : safe) {
    correct += probe.classify(x).unsafe ? 0 : 1;
    ++total;
  }
  for (const auto& set : unsafe_by_category) {
    for (const auto& x : set) {
      correct += probe.classify(x).unsafe ? 1 : 0;
      ++total;
    }
  }
  probe.train_accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return probe;
}

}  // namespace dualguard
