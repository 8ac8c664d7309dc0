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

#include "manifest.hpp"

#include <set>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

struct RoleName {
  TensorRole role;
  const char* name;
};

constexpr RoleName kRoles[] = {
    {TensorRole::kPromptEmbedding, "prompt_embedding"},
    {TensorRole::kPooledEmbedding, "pooled_embedding"},
    {TensorRole::kDirection, "direction"},
    {TensorRole::kSteeringVector, "steering_vector"},
    {TensorRole::kVisualFeature, "visual_feature"},
};

}  // namespace

const char* role_name(TensorRole role) {
  for (const auto& r : kRoles) {
    if (r.role == role) return r.name;
  }
  return "prompt_embedding";
}

TensorRole parse_role(const std::string& name) {
  for (const auto& r : kRoles) {
    if (name == r.name) return r.role;
  }
  fail(ErrorKind::kData, "unknown tensor role '" + name + "'");
}

Tensor TensorManifest::load(const ManifestEntry& e) const {
  Tensor t = read_tensor(resolve(e));
  require(t.shape() == e.shape, ErrorKind::kData,
          "manifest entry '" + e.name + "' shape does not match its file");
  return t;
}

nlohmann::json manifest_to_json(const TensorManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j;
    j["name"] = e.name;
    j["role"] = role_name(e.role);
    j["path"] = e.path;
    j["shape"] = e.shape;
    if (e.category) j["category"] = *e.category;
    if (e.step) j["step"] = *e.step;
    if (e.layer) j["layer"] = *e.layer;
    if (e.pair_index) j["pair_index"] = *e.pair_index;
    if (e.variant) j["variant"] = *e.variant;
    entries.push_back(std::move(j));
  }
  return nlohmann::json{{"format", "dtvt-manifest"}, {"version", 1}, {"entries", entries}};
}

TensorManifest manifest_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& root) {
  TensorManifest m;
  m.root = root;
  try {
    require(j.is_object() && j.contains("entries") && j["entries"].is_array(),
            ErrorKind::kData, "manifest must be an object with an 'entries' array");
    if (j.contains("format")) {
      require(j["format"] == "dtvt-manifest", ErrorKind::kData,
              "not a tensor manifest (format " + j["format"].dump() + ")");
    }
    if (j.contains("version")) {
      require(j["version"].get<int>() == 1, ErrorKind::kData,
              "unsupported manifest version");
    }
    std::set<std::string> names;
    for (const auto& je : j["entries"]) {
      ManifestEntry e;
      e.name = je.at("name").get<std::string>();
      e.role = parse_role(je.at("role").get<std::string>());
      e.path = je.at("path").get<std::string>();
      e.shape = je.at("shape").get<Shape>();
      validate_shape(e.shape);
      if (je.contains("category")) e.category = je["category"].get<std::string>();
      if (je.contains("step")) e.step = je["step"].get<int>();
      if (je.contains("layer")) e.layer = je["layer"].get<int>();
      if (je.contains("pair_index")) e.pair_index = je["pair_index"].get<int>();
      if (je.contains("variant")) e.variant = je["variant"].get<std::string>();
      require(names.insert(e.name).second, ErrorKind::kData,
              "duplicate manifest entry name '" + e.name + "'");
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kData, std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

void verify_manifest_files(const TensorManifest& m) {
  for (const auto& e : m.entries) {
    const Shape on_disk = read_tensor_shape(m.resolve(e));
    require(on_disk == e.shape, ErrorKind::kData,
            "manifest entry '" + e.name + "' declares a shape that differs from " +
                m.resolve(e).string());
  }
}

TensorManifest load_manifest(const std::filesystem::path& path, bool verify_files) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kData, path.string() + ": " + ex.what());
  }
  TensorManifest m = manifest_from_json(j, path.parent_path());
  if (verify_files) verify_manifest_files(m);
  return m;
}

void save_manifest(const TensorManifest& m, const std::filesystem::path& path) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace dualguard
