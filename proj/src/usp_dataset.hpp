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

#ifndef DUALGUARD_USP_DATASET_HPP_
#define DUALGUARD_USP_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tensor.hpp"

namespace dualguard {

inline constexpr std::string_view kSlotMarker = "{}";

struct ConceptPair {
  std::string category;
  std::string unsafe_concept;
  std::string safe_concept;
};

enum class ConstructionMode { kMinimalSubstitution, kConceptAppend };

const char* mode_name(ConstructionMode mode);
ConstructionMode parse_mode(const std::string& name);

struct USPair {
  std::string category;
  std::string safe_prompt;
  std::string unsafe_prompt;
  ConstructionMode mode = ConstructionMode::kMinimalSubstitution;

  friend bool operator==(const USPair&, const USPair&) = default;
};

// Minimal substitution fills the template's single "{}" slot with the safe
// and the unsafe concept. Concept appending uses the template verbatim as the
// safe prompt and appends ", <unsafe concept>"; such templates must not
// contain a slot. Output is concept-major, template-minor.
std::vector<USPair> build_usp(const std::vector<ConceptPair>& concepts,
                              const std::vector<std::string>& templates,
                              ConstructionMode mode);

// JSON lines: {"category": str, "unsafe": str, "safe": str}. Categories must
// appear in `categories`.
std::vector<ConceptPair> read_concepts_jsonl(const std::filesystem::path& path,
                                             const std::vector<std::string>& categories);
std::string usp_to_jsonl(const std::vector<USPair>& pairs);
std::vector<USPair> usp_from_jsonl(std::string_view text);

struct SyntheticEmbeddingConfig {
  std::size_t dim = 64;             // d
  std::size_t seq_len = 8;          // L
  std::size_t categories = 3;       // C
  double separation = 4.0;          // s
  double noise = 1.0;               // sigma
  double safe_mean_norm = 24.0;     // norm of the shared safe mean
  std::uint64_t seed = 20260101;
  std::size_t pairs_per_category = 64;  // N

  void validate() const;
};

// Fixed seeded geometry shared by every stream of one seed.
struct SyntheticGeometry {
  std::vector<std::vector<float>> axes;  // C orthonormal unit vectors u_c
  std::vector<float> safe_mean;          // mu_safe
};

SyntheticGeometry make_synthetic_geometry(const SyntheticEmbeddingConfig& cfg);

struct EmbeddingPair {
  std::size_t category = 0;
  std::size_t pair_index = 0;
  Tensor safe;    // L x d
  Tensor unsafe;  // L x d
};

struct SyntheticPairs {
  SyntheticGeometry geometry;
  std::vector<EmbeddingPair> pairs;  // category-major
  std::vector<std::size_t> labels;
};

// Safe rows ~ mu_safe + sigma*N(0, I); unsafe = safe + s*u_c on every row +
// (sigma/4)*N(0, I). `stream` names an independent substream family so train,
// judge and evaluation splits never share draws; each category has its own
// substream, so generation order does not matter.
SyntheticPairs generate_synthetic_pairs(const SyntheticEmbeddingConfig& cfg,
                                        std::string_view stream = "text");

// Benign (safe-only) embeddings from their own substream.
std::vector<Tensor> generate_benign(const SyntheticEmbeddingConfig& cfg,
                                    std::size_t count, std::string_view stream);

}  // namespace dualguard

#endif  // DUALGUARD_USP_DATASET_HPP_
