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

#ifndef DUALGUARD_MANIFEST_HPP_
#define DUALGUARD_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tensor.hpp"

namespace dualguard {

enum class TensorRole {
  kPromptEmbedding,
  kPooledEmbedding,
  kDirection,
  kSteeringVector,
  kVisualFeature,
};

const char* role_name(TensorRole role);
TensorRole parse_role(const std::string& name);

struct ManifestEntry {
  std::string name;
  TensorRole role = TensorRole::kPromptEmbedding;
  std::string path;  // relative to the manifest's directory
  Shape shape;
  std::optional<std::string> category;
  std::optional<int> step;
  std::optional<int> layer;
  // Paired data: entries sharing pair_index (and category) form one
  // safe/unsafe pair; variant is "safe", "unsafe" or "benign".
  std::optional<int> pair_index;
  std::optional<std::string> variant;
};

// Index of .dtvt files. Entry paths resolve against `root`.
struct TensorManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
  Tensor load(const ManifestEntry& e) const;
};

nlohmann::json manifest_to_json(const TensorManifest& m);
TensorManifest manifest_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& root);

// Loading checks names are unique and, when verify_files is set, that every
// declared shape matches the header of the file on disk.
TensorManifest load_manifest(const std::filesystem::path& path, bool verify_files = true);
void save_manifest(const TensorManifest& m, const std::filesystem::path& path);
void verify_manifest_files(const TensorManifest& m);

}  // namespace dualguard

#endif  // DUALGUARD_MANIFEST_HPP_
