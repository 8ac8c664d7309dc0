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

#include "usp_dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

std::size_t count_slots(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(kSlotMarker); pos != std::string_view::npos;
       pos = text.find(kSlotMarker, pos + kSlotMarker.size())) {
    ++n;
  }
  return n;
}

std::string fill_slot(const std::string& tmpl, const std::string& value) {
  std::string out = tmpl;
  out.replace(out.find(kSlotMarker), kSlotMarker.size(), value);
  return out;
}

Tensor gaussian_rows(Rng& rng, const std::vector<float>& mean, std::size_t rows,
                     double sigma) {
  Tensor t = Tensor::matrix(rows, mean.size());
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = t.row(r);
    for (std::size_t c = 0; c < mean.size(); ++c) {
      row[c] = static_cast<float>(double{mean[c]} + sigma * rng.normal());
    }
  }
  return t;
}

}  // namespace

const char* mode_name(ConstructionMode mode) {
  return mode == ConstructionMode::kConceptAppend ? "concept_append"
                                                  : "minimal_substitution";
}

ConstructionMode parse_mode(const std::string& name) {
  if (name == "minimal_substitution") return ConstructionMode::kMinimalSubstitution;
  if (name == "concept_append") return ConstructionMode::kConceptAppend;
  fail(ErrorKind::kData, "unknown construction mode '" + name + "'");
}

std::vector<USPair> build_usp(const std::vector<ConceptPair>& concepts,
                              const std::vector<std::string>& templates,
                              ConstructionMode mode) {
  require(!concepts.empty(), ErrorKind::kData, "concept list is empty");
  for (const auto& t : templates) {
    const std::size_t slots = count_slots(t);
    if (mode == ConstructionMode::kMinimalSubstitution) {
      require(slots == 1, ErrorKind::kConfig,
              "template must contain exactly one '{}' slot: \"" + t + "\"");
    } else {
      require(slots == 0, ErrorKind::kConfig,
              "concept-append template must not contain a slot: \"" + t + "\"");
    }
  }
  std::vector<USPair> out;
  out.reserve(concepts.size() * templates.size());
  for (const auto& cp : concepts) {
    require(!cp.unsafe_concept.empty(), ErrorKind::kData, "empty unsafe concept");
    if (mode == ConstructionMode::kMinimalSubstitution) {
      require(!cp.safe_concept.empty(), ErrorKind::kData, "empty safe concept");
    }
    for (const auto& t : templates) {
      USPair p;
      p.category = cp.category;
      p.mode = mode;
      if (mode == ConstructionMode::kMinimalSubstitution) {
        p.safe_prompt = fill_slot(t, cp.safe_concept);
        p.unsafe_prompt = fill_slot(t, cp.unsafe_concept);
      } else {
        p.safe_prompt = t;
        p.unsafe_prompt = t + ", " + cp.unsafe_concept;
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<ConceptPair> read_concepts_jsonl(const std::filesystem::path& path,
                                             const std::vector<std::string>& categories) {
  std::istringstream in(read_text_file(path));
  std::vector<ConceptPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      ConceptPair cp{j.at("category").get<std::string>(), j.at("unsafe").get<std::string>(),
                     j.at("safe").get<std::string>()};
      require(!cp.unsafe_concept.empty() && !cp.safe_concept.empty(), ErrorKind::kData,
              where + ": concepts must be non-empty");
      require(std::find(categories.begin(), categories.end(), cp.category) !=
                  categories.end(),
              ErrorKind::kData, where + ": unknown category '" + cp.category + "'");
      out.push_back(std::move(cp));
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::kData, where + ": " + ex.what());
    }
  }
  require(!out.empty(), ErrorKind::kData, path.string() + ": no concept pairs");
  return out;
}

std::string usp_to_jsonl(const std::vector<USPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    // Keys kept in a fixed order so reruns are byte-identical.
    nlohmann::ordered_json j;
    j["category"] = p.category;
    j["safe_prompt"] = p.safe_prompt;
    j["unsafe_prompt"] = p.unsafe_prompt;
    j["mode"] = mode_name(p.mode);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<USPair> usp_from_jsonl(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<USPair> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(USPair{j.at("category").get<std::string>(),
                           j.at("safe_prompt").get<std::string>(),
                           j.at("unsafe_prompt").get<std::string>(),
                           parse_mode(j.at("mode").get<std::string>())});
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorKind::kData, std::string("malformed USP line: ") + ex.what());
    }
  }
  return out;
}

void SyntheticEmbeddingConfig::validate() const {
  require(dim >= 2, ErrorKind::kConfig, "synthetic.dim must be >= 2");
  require(seq_len >= 1, ErrorKind::kConfig, "synthetic.seq_len must be >= 1");
  require(categories >= 1, ErrorKind::kConfig, "synthetic: need at least one category");
  require(std::isfinite(separation) && separation > 0, ErrorKind::kConfig,
          "synthetic.separation must be > 0");
  require(std::isfinite(noise) && noise >= 0, ErrorKind::kConfig,
          "synthetic.noise must be >= 0");
  require(std::isfinite(safe_mean_norm) && safe_mean_norm >= 0, ErrorKind::kConfig,
          "synthetic.safe_mean_norm must be >= 0");
  require(pairs_per_category >= 2, ErrorKind::kConfig,
          "synthetic.pairs_per_category must be >= 2");
  require(dim >= categories, ErrorKind::kConfig,
          "synthetic.dim must be >= number of categories (orthonormal axes)");
}

SyntheticGeometry make_synthetic_geometry(const SyntheticEmbeddingConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, "synthetic/axes");
  std::vector<std::vector<double>> basis;
  // Gram-Schmidt twice over Gaussian draws; the mean is orthogonalized against
  // the axes too so the safe/unsafe offset lives purely along u_c.
  for (std::size_t c = 0; c <= cfg.categories; ++c) {
    std::vector<double> v(cfg.dim);
    double n = 0.0;
    while (n < 1e-6) {
      for (auto& x : v) x = rng.normal();
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) {
          const double p = dot(std::span<const double>(v), b);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * b[i];
        }
      }
      n = norm2(v);
    }
    for (auto& x : v) x /= n;
    basis.push_back(std::move(v));
  }
  SyntheticGeometry g;
  for (std::size_t c = 0; c < cfg.categories; ++c) g.axes.push_back(to_float(basis[c]));
  std::vector<double> mean = basis.back();
  for (auto& x : mean) x *= cfg.safe_mean_norm;
  g.safe_mean = to_float(mean);
  return g;
}

SyntheticPairs generate_synthetic_pairs(const SyntheticEmbeddingConfig& cfg,
                                        std::string_view stream) {
  SyntheticPairs out;
  out.geometry = make_synthetic_geometry(cfg);
  const auto& g = out.geometry;
  for (std::size_t c = 0; c < cfg.categories; ++c) {
    Rng rng(cfg.seed, std::string("synthetic/") + std::string(stream) + "/c" +
                          std::to_string(c));
    const auto& axis = g.axes[c];
    for (std::size_t n = 0; n < cfg.pairs_per_category; ++n) {
      EmbeddingPair p;
      p.category = c;
      p.pair_index = n;
      p.safe = gaussian_rows(rng, g.safe_mean, cfg.seq_len, cfg.noise);
      p.unsafe = Tensor::matrix(cfg.seq_len, cfg.dim);
      for (std::size_t r = 0; r < cfg.seq_len; ++r) {
        const auto srow = p.safe.row(r);
        auto urow = p.unsafe.row(r);
        for (std::size_t k = 0; k < cfg.dim; ++k) {
          urow[k] = static_cast<float>(double{srow[k]} + cfg.separation * axis[k] +
                                       0.25 * cfg.noise * rng.normal());
        }
      }
      out.labels.push_back(c);
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<Tensor> generate_benign(const SyntheticEmbeddingConfig& cfg,
                                    std::size_t count, std::string_view stream) {
  const auto g = make_synthetic_geometry(cfg);
  Rng rng(cfg.seed, std::string("synthetic/") + std::string(stream) + "/benign");
  std::vector<Tensor> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(gaussian_rows(rng, g.safe_mean, cfg.seq_len, cfg.noise));
  }
  return out;
}

}  // namespace dualguard
