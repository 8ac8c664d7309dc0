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

#ifndef DUALGUARD_DIRECTION_EXTRACTION_HPP_
#define DUALGUARD_DIRECTION_EXTRACTION_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace dualguard {

// Mean over the token rows of an L x d embedding.
std::vector<double> pool_embedding(const Tensor& x);

struct SvmOptions {
  double reg = 1e-2;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
};

struct PairwiseSvm {
  std::size_t c = 0;  // positive category
  std::size_t j = 0;  // negative category, c < j
  std::vector<double> normal;  // oriented toward category c
  double bias = 0.0;
  std::size_t iterations = 0;
  double reg = 0.0;
  std::uint64_t seed = 0;
  double hinge_loss = 0.0;
  double train_accuracy = 0.0;
  bool degenerate = false;

  double score(std::span<const double> x) const { return dot(normal, x) + bias; }
};

// Linear SVM by Pegasos subgradient descent (step 1/(reg*t), seeded epoch
// shuffles) on hinge loss + L2. Inputs are centered on the midpoint of the
// class means before training and the bias is folded back afterwards.
// Coincident class means yield a result with `degenerate` set and a zero
// normal.
PairwiseSvm train_pairwise_svm(const std::vector<std::vector<double>>& pos,
                               const std::vector<std::vector<double>>& neg,
                               const SvmOptions& options);

// w~_c = sum_j w_{c,j} - sum_j w_{j,c} with w_{j,c} = -w_{c,j}, normalized.
// Expects one SVM per unordered category pair; summation order is fixed by
// (c, j) so the result does not depend on the order of `svms`.
std::vector<double> aggregate_category_direction(const std::vector<PairwiseSvm>& svms,
                                                 std::size_t category);

// Unit-norm mean of (e_u - e_s) over pooled pairs.
std::vector<double> compute_steering_vector(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);

struct CategoryDirectionBank {
  std::vector<std::string> categories;
  // Unit w_c per category. Empty when no direction could be formed (a single
  // category has nothing to be separated from); removal is then skipped.
  std::vector<std::vector<float>> directions;
  std::vector<std::vector<float>> steering;  // unit delta_c per category
  std::string provenance;  // hash of the training embeddings
  SvmOptions solver;

  std::size_t size() const { return categories.size(); }
  std::size_t dim() const;
  bool has_directions() const { return !directions.empty(); }
  // Unit norms within 1e-6, consistent dimensions, C >= 1.
  void validate() const;
};

struct PairedPooled {
  std::size_t category = 0;
  std::vector<double> unsafe;
  std::vector<double> safe;
};

struct BankTrainingResult {
  CategoryDirectionBank bank;
  std::vector<PairwiseSvm> svms;
  // Set when w_c could not be formed (C = 1, degenerate pairs); the bank then
  // carries steering vectors only.
  std::optional<std::string> direction_error;
};

// One-vs-one SVMs over the pooled unsafe embeddings (trained in parallel on
// `threads` workers), aggregated into w_c; steering vectors from the pairs.
BankTrainingResult train_direction_bank(const std::vector<PairedPooled>& data,
                                        const std::vector<std::string>& categories,
                                        const SvmOptions& options,
                                        const std::string& provenance,
                                        unsigned threads = 1);

// Directory layout: bank.json plus w_<c>.dtvt and delta_<c>.dtvt. bank.json
// records an FNV-1a checksum per file; load verifies checksums and shapes.
void save_bank(const CategoryDirectionBank& bank, const std::filesystem::path& dir);
CategoryDirectionBank load_bank(const std::filesystem::path& dir);

}  // namespace dualguard

#endif  // DUALGUARD_DIRECTION_EXTRACTION_HPP_
