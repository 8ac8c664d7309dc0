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

#include "visual_suppression.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

std::vector<double> position_mean_sum(const std::vector<Tensor>& feats, std::size_t& count) {
  std::vector<double> sum;
  for (const auto& f : feats) {
    require(f.ndim() == 2, ErrorKind::kData, "visual feature must be P x d");
    if (sum.empty()) sum.assign(f.cols(), 0.0);
    require(f.cols() == sum.size(), ErrorKind::kData, "visual feature channel mismatch");
    for (std::size_t p = 0; p < f.rows(); ++p) {
      const auto row = f.row(p);
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += row[k];
      ++count;
    }
  }
  return sum;
}

}  // namespace

void VisualConfig::validate() const {
  require(std::isfinite(beta) && beta >= 0, ErrorKind::kConfig,
          "visual.beta must be finite and >= 0");
}

VisualSteeringSet::VisualSteeringSet(std::vector<std::string> categories,
                                     std::vector<int> steps, std::vector<int> layers,
                                     std::size_t channels)
    : categories_(std::move(categories)),
      steps_(std::move(steps)),
      layers_(std::move(layers)),
      channels_(channels) {
  for (int t : steps_) {
    for (int l : layers_) vectors_[{t, l}].assign(categories_.size(), std::nullopt);
  }
}

const std::optional<std::vector<float>>& VisualSteeringSet::vector(StepLayer key,
                                                                    std::size_t category) const {
  const auto it = vectors_.find(key);
  require(it != vectors_.end(), ErrorKind::kData,
          "no steering entry for step " + std::to_string(key.step) + ", layer " +
              std::to_string(key.layer));
  require(category < it->second.size(), ErrorKind::kData, "steering category out of range");
  return it->second[category];
}

void VisualSteeringSet::set(StepLayer key, std::size_t category,
                            std::optional<std::vector<float>> v) {
  const auto it = vectors_.find(key);
  require(it != vectors_.end(), ErrorKind::kData, "steering key outside the grid");
  require(category < it->second.size(), ErrorKind::kData, "steering category out of range");
  if (v) {
    require(v->size() == channels_, ErrorKind::kData, "steering vector channel mismatch");
  }
  it->second[category] = std::move(v);
}

std::size_t VisualSteeringSet::inert_count() const {
  std::size_t n = 0;
  for (const auto& [key, per_cat] : vectors_) {
    for (const auto& v : per_cat) n += v ? 0 : 1;
  }
  return n;
}

void VisualSteeringSet::validate() const {
  require(vectors_.size() == steps_.size() * layers_.size(), ErrorKind::kData,
          "steering keys do not form a complete step x layer grid");
  for (int t : steps_) {
    for (int l : layers_) {
      const auto it = vectors_.find({t, l});
      require(it != vectors_.end(), ErrorKind::kData, "steering grid has a hole");
      require(it->second.size() == categories_.size(), ErrorKind::kData,
              "steering entry does not cover every category");
      for (const auto& v : it->second) {
        if (!v) continue;
        require(v->size() == channels_, ErrorKind::kData, "steering channel mismatch");
        require(std::abs(norm2(*v) - 1.0) <= 1e-6, ErrorKind::kData,
                "visual steering vector is not unit norm");
      }
    }
  }
}

std::optional<std::vector<float>> steering_direction(const std::vector<Tensor>& unsafe,
                                                     const std::vector<Tensor>& safe) {
  require(!unsafe.empty() && unsafe.size() == safe.size(), ErrorKind::kData,
          "visual steering needs the same non-zero number of unsafe and safe features");
  std::size_t nu = 0, ns = 0;
  const auto su = position_mean_sum(unsafe, nu);
  const auto ss = position_mean_sum(safe, ns);
  require(su.size() == ss.size(), ErrorKind::kData, "visual feature channel mismatch");
  std::vector<double> diff(su.size());
  for (std::size_t k = 0; k < diff.size(); ++k) {
    diff[k] = su[k] / static_cast<double>(nu) - ss[k] / static_cast<double>(ns);
  }
  const double n = norm2(diff);
  if (n < 1e-9) return std::nullopt;
  for (auto& v : diff) v /= n;
  auto out = to_float(diff);
  // Renormalize in f32 so the stored vector passes the unit check.
  const double nf = norm2(out);
  for (auto& v : out) v = static_cast<float>(double{v} / nf);
  return out;
}

VisualSteeringSet compute_visual_steering(const std::vector<std::string>& categories,
                                          const std::vector<FeatureSeries>& unsafe,
                                          const std::vector<FeatureSeries>& safe) {
  require(!categories.empty() && unsafe.size() == categories.size() &&
              safe.size() == categories.size(),
          ErrorKind::kData, "visual features must be given for every category");
  std::vector<int> steps, layers;
  for (const auto& [key, feats] : unsafe.front()) {
    if (std::find(steps.begin(), steps.end(), key.step) == steps.end()) steps.push_back(key.step);
    if (std::find(layers.begin(), layers.end(), key.layer) == layers.end())
      layers.push_back(key.layer);
  }
  require(!steps.empty(), ErrorKind::kData, "no visual features supplied");
  std::sort(steps.begin(), steps.end(), std::greater<>());
  std::sort(layers.begin(), layers.end());
  const auto& first = unsafe.front().begin()->second;
  require(!first.empty(), ErrorKind::kData, "no visual features supplied");
  VisualSteeringSet set(categories, steps, layers, first.front().cols());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    require(unsafe[c].size() == steps.size() * layers.size() &&
                safe[c].size() == unsafe[c].size(),
            ErrorKind::kData,
            "features for '" + categories[c] + "' do not cover the step x layer grid");
    for (const auto& [key, feats] : unsafe[c]) {
      const auto it = safe[c].find(key);
      require(it != safe[c].end(), ErrorKind::kData, "unpaired visual feature key");
      set.set(key, c, steering_direction(feats, it->second));
    }
  }
  set.validate();
  return set;
}

Tensor suppress_values(const Tensor& h, const VisualSteeringSet& steering, StepLayer key,
                       const VisualConfig& cfg) {
  require(h.ndim() == 2, ErrorKind::kData, "visual feature must be P x d");
  if (cfg.beta == 0.0) return h;
  std::vector<const std::vector<float>*> active;
  for (std::size_t c = 0; c < steering.categories().size(); ++c) {
    const auto& v = steering.vector(key, c);
    if (v) active.push_back(&*v);
  }
  if (active.empty()) return h;
  require(h.cols() == steering.channels(), ErrorKind::kData,
          "visual feature has " + std::to_string(h.cols()) + " channels, steering has " +
              std::to_string(steering.channels()));
  Tensor out = h;
  std::vector<double> acc(h.cols());
  for (std::size_t p = 0; p < h.rows(); ++p) {
    const auto hp = h.row(p);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = hp[k];
    for (const auto* v : active) {
      const double gate = std::max(0.0, cfg.beta * dot(hp, std::span<const float>(*v)));
      if (gate == 0.0) continue;
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] -= gate * double{(*v)[k]};
    }
    auto orow = out.row(p);
    for (std::size_t k = 0; k < acc.size(); ++k) orow[k] = static_cast<float>(acc[k]);
  }
  return out;
}

VisualFeature suppress(const VisualFeature& h, const VisualSteeringSet& steering,
                       const VisualConfig& cfg) {
  return VisualFeature{h.step, h.layer, suppress_values(h.values, steering, h.key(), cfg)};
}

void save_visual_steering(const VisualSteeringSet& set, const std::filesystem::path& dir) {
  set.validate();
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (int t : set.steps()) {
    for (int l : set.layers()) {
      for (std::size_t c = 0; c < set.categories().size(); ++c) {
        nlohmann::ordered_json e;
        e["step"] = t;
        e["layer"] = l;
        e["category"] = set.categories()[c];
        const auto& v = set.vector({t, l}, c);
        if (v) {
          const std::string name = "v_t" + std::to_string(t) + "_l" + std::to_string(l) +
                                   "_c" + std::to_string(c) + ".dtvt";
          const auto bytes = encode_tensor(Tensor::vector(std::span<const float>(*v)));
          write_file_bytes(dir / name, bytes);
          e["inert"] = false;
          e["path"] = name;
          e["checksum"] = hex64(fnv1a(bytes));
        } else {
          e["inert"] = true;
          e["path"] = nullptr;
        }
        entries.push_back(std::move(e));
      }
    }
  }
  nlohmann::ordered_json j;
  j["format"] = "dualguard-visual-steering";
  j["version"] = 1;
  j["categories"] = set.categories();
  j["steps"] = set.steps();
  j["layers"] = set.layers();
  j["channels"] = set.channels();
  j["entries"] = entries;
  write_text_file(dir / "index.json", j.dump(2) + "\n");
}

VisualSteeringSet load_visual_steering(const std::filesystem::path& dir) {
  try {
    const auto j = nlohmann::json::parse(read_text_file(dir / "index.json"));
    require(j.at("format").get<std::string>() == "dualguard-visual-steering",
            ErrorKind::kData, "not a visual steering index");
    const auto categories = j.at("categories").get<std::vector<std::string>>();
    VisualSteeringSet set(categories, j.at("steps").get<std::vector<int>>(),
                          j.at("layers").get<std::vector<int>>(),
                          j.at("channels").get<std::size_t>());
    require(j.at("entries").size() ==
                set.steps().size() * set.layers().size() * categories.size(),
            ErrorKind::kData, "steering index does not list every (step, layer, category)");
    for (const auto& e : j.at("entries")) {
      const StepLayer key{e.at("step").get<int>(), e.at("layer").get<int>()};
      const auto it = std::find(categories.begin(), categories.end(),
                                e.at("category").get<std::string>());
      require(it != categories.end(), ErrorKind::kData, "steering entry for unknown category");
      const auto c = static_cast<std::size_t>(it - categories.begin());
      if (e.at("inert").get<bool>()) {
        set.set(key, c, std::nullopt);
        continue;
      }
      const auto path = dir / e.at("path").get<std::string>();
      const auto bytes = read_file_bytes(path);
      if (e.contains("checksum")) {
        require(hex64(fnv1a(bytes)) == e["checksum"].get<std::string>(), ErrorKind::kData,
                "checksum mismatch for " + path.string());
      }
      const Tensor t = decode_tensor(bytes);
      require(t.shape() == Shape{set.channels()}, ErrorKind::kData,
              "unexpected shape in " + path.string());
      set.set(key, c, std::vector<float>(t.data().begin(), t.data().end()));
    }
    set.validate();
    return set;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kData, (dir / "index.json").string() + ": " + ex.what());
  }
}

}  // namespace dualguard
