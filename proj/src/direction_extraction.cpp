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

#include "direction_extraction.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

std::vector<double> mean_of(const std::vector<std::vector<double>>& xs) {
  std::vector<double> m(xs.front().size(), 0.0);
  for (const auto& x : xs) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += x[i];
  }
  for (auto& v : m) v /= static_cast<double>(xs.size());
  return m;
}

void check_unit(std::span<const float> v, const std::string& what) {
  const double n = norm2(v);
  require(std::abs(n - 1.0) <= 1e-6, ErrorKind::kData,
          what + " is not unit norm (|v| = " + std::to_string(n) + ")");
}

std::vector<float> normalized_float(std::span<const double> v) {
  const double n = norm2(v);
  std::vector<double> unit(v.begin(), v.end());
  for (auto& x : unit) x /= n;
  return to_float(unit);
}

}  // namespace

std::vector<double> pool_embedding(const Tensor& x) {
  require(x.ndim() == 2 && x.rows() >= 1, ErrorKind::kData,
          "pool_embedding expects an L x d tensor");
  return row_mean(x);
}

PairwiseSvm train_pairwise_svm(const std::vector<std::vector<double>>& pos,
                               const std::vector<std::vector<double>>& neg,
                               const SvmOptions& options) {
  require(!pos.empty() && !neg.empty(), ErrorKind::kData,
          "SVM training needs samples from both classes");
  require(options.reg > 0 && std::isfinite(options.reg), ErrorKind::kConfig,
          "SVM regularization must be > 0");
  const std::size_t d = pos.front().size();
  for (const auto* set : {&pos, &neg}) {
    for (const auto& x : *set) {
      require(x.size() == d, ErrorKind::kData, "SVM samples differ in dimension");
    }
  }

  PairwiseSvm svm;
  svm.reg = options.reg;
  svm.seed = options.seed;
  svm.normal.assign(d, 0.0);

  const auto mean_pos = mean_of(pos);
  const auto mean_neg = mean_of(neg);
  std::vector<double> gap(d), center(d);
  for (std::size_t i = 0; i < d; ++i) {
    gap[i] = mean_pos[i] - mean_neg[i];
    center[i] = 0.5 * (mean_pos[i] + mean_neg[i]);
  }
  if (norm2(gap) < 1e-9) {
    svm.degenerate = true;
    return svm;
  }

  // Augmented samples [x - center, 1] with labels; the last weight is the bias.
  struct Sample {
    std::vector<double> x;
    double y;
  };
  std::vector<Sample> samples;
  samples.reserve(pos.size() + neg.size());
  for (const auto& x : pos) samples.push_back({x, 1.0});
  for (const auto& x : neg) samples.push_back({x, -1.0});
  for (auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) s.x[i] -= center[i];
    s.x.push_back(1.0);
  }

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(options.seed);
  std::vector<double> w(d + 1, 0.0);
  const double radius = 1.0 / std::sqrt(options.reg);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      ++t;
      const auto& s = samples[idx];
      const double eta = 1.0 / (options.reg * static_cast<double>(t));
      const double margin = s.y * dot(std::span<const double>(w), s.x);
      const double shrink = 1.0 - eta * options.reg;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t i = 0; i <= d; ++i) w[i] += eta * s.y * s.x[i];
      }
      const double n = norm2(w);
      if (n > radius) {
        for (auto& v : w) v *= radius / n;
      }
    }
  }
  svm.iterations = t;

  double hinge = 0.0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const double score = dot(std::span<const double>(w), s.x);
    hinge += std::max(0.0, 1.0 - s.y * score);
    if (s.y * score > 0) ++correct;
  }
  const double wn = norm2(std::span<const double>(w).first(d));
  svm.hinge_loss = hinge / static_cast<double>(samples.size()) +
                   0.5 * options.reg * wn * wn;
  svm.train_accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());

  std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d), svm.normal.begin());
  svm.bias = w[d] - dot(std::span<const double>(svm.normal), center);

  double mean_score = 0.0;
  for (const auto& x : pos) mean_score += svm.score(x);
  if (mean_score < 0) {
    for (auto& v : svm.normal) v = -v;
    svm.bias = -svm.bias;
  }
  return svm;
}

std::vector<double> aggregate_category_direction(const std::vector<PairwiseSvm>& svms,
                                                 std::size_t category) {
  require(!svms.empty(), ErrorKind::kNumeric,
          "zero direction: no pairwise separators for category " +
              std::to_string(category));
  std::vector<const PairwiseSvm*> sorted;
  for (const auto& s : svms) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const PairwiseSvm* a, const PairwiseSvm* b) {
    return std::pair(a->c, a->j) < std::pair(b->c, b->j);
  });
  std::vector<double> total(svms.front().normal.size(), 0.0);
  for (const auto* s : sorted) {
    require(s->normal.size() == total.size(), ErrorKind::kData,
            "pairwise normals differ in dimension");
    double sign = 0.0;
    if (s->c == category) sign = 2.0;        // w_{c,j} - w_{j,c} = 2 w_{c,j}
    else if (s->j == category) sign = -2.0;  // the separator reversed
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += sign * s->normal[i];
  }
  const double n = norm2(total);
  require(n >= 1e-9, ErrorKind::kNumeric,
          "zero direction for category " + std::to_string(category));
  for (auto& v : total) v /= n;
  return total;
}

std::vector<double> compute_steering_vector(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
  require(!pairs.empty(), ErrorKind::kData, "steering vector needs at least one pair");
  const std::size_t d = pairs.front().first.size();
  std::vector<double> mean(d, 0.0);
  for (const auto& [unsafe, safe] : pairs) {
    require(unsafe.size() == d && safe.size() == d, ErrorKind::kData,
            "steering pair dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) mean[i] += unsafe[i] - safe[i];
  }
  for (auto& v : mean) v /= static_cast<double>(pairs.size());
  const double n = norm2(mean);
  require(n >= 1e-9, ErrorKind::kNumeric, "zero steering vector");
  for (auto& v : mean) v /= n;
  return mean;
}

std::size_t CategoryDirectionBank::dim() const {
  return steering.empty() ? 0 : steering.front().size();
}

void CategoryDirectionBank::validate() const {
  require(!categories.empty(), ErrorKind::kData, "bank has no categories");
  require(steering.size() == categories.size(), ErrorKind::kData,
          "bank steering count does not match categories");
  require(directions.empty() || directions.size() == categories.size(),
          ErrorKind::kData, "bank direction count does not match categories");
  const std::size_t d = dim();
  require(d >= 1, ErrorKind::kData, "bank vectors are empty");
  for (std::size_t c = 0; c < categories.size(); ++c) {
    require(steering[c].size() == d, ErrorKind::kData, "bank dimension mismatch");
    check_unit(steering[c], "steering vector for " + categories[c]);
    if (!directions.empty()) {
      require(directions[c].size() == d, ErrorKind::kData, "bank dimension mismatch");
      check_unit(directions[c], "direction for " + categories[c]);
    }
  }
}

BankTrainingResult train_direction_bank(const std::vector<PairedPooled>& data,
                                        const std::vector<std::string>& categories,
                                        const SvmOptions& options,
                                        const std::string& provenance,
                                        unsigned threads) {
  const std::size_t num_categories = categories.size();
  require(num_categories >= 1, ErrorKind::kConfig, "no categories configured");
  std::vector<std::vector<std::vector<double>>> unsafe_by_cat(num_categories);
  std::vector<std::vector<std::pair<std::vector<double>, std::vector<double>>>> pairs_by_cat(
      num_categories);
  for (const auto& p : data) {
    require(p.category < num_categories, ErrorKind::kData, "category id out of range");
    unsafe_by_cat[p.category].push_back(p.unsafe);
    pairs_by_cat[p.category].emplace_back(p.unsafe, p.safe);
  }
  for (std::size_t c = 0; c < num_categories; ++c) {
    require(!pairs_by_cat[c].empty(), ErrorKind::kData,
            "no training pairs for category '" + categories[c] + "'");
  }

  BankTrainingResult result;
  auto& bank = result.bank;
  bank.categories = categories;
  bank.provenance = provenance;
  bank.solver = options;

  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t c = 0; c < num_categories; ++c) {
    for (std::size_t j = c + 1; j < num_categories; ++j) jobs.emplace_back(c, j);
  }
  result.svms.resize(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const auto [c, j] = jobs[k];
    SvmOptions opt = options;
    opt.seed = derive_seed(options.seed,
                           "svm/" + std::to_string(c) + "-" + std::to_string(j));
    PairwiseSvm svm = train_pairwise_svm(unsafe_by_cat[c], unsafe_by_cat[j], opt);
    svm.c = c;
    svm.j = j;
    result.svms[k] = std::move(svm);
  });

  if (num_categories == 1) {
    result.direction_error = "zero direction: a single category has no pairwise separator";
  } else {
    std::vector<std::vector<float>> directions;
    try {
      for (std::size_t c = 0; c < num_categories; ++c) {
        directions.push_back(to_float(aggregate_category_direction(result.svms, c)));
      }
      bank.directions = std::move(directions);
    } catch (const Error& e) {
      result.direction_error = e.what();
    }
  }
  for (std::size_t c = 0; c < num_categories; ++c) {
    bank.steering.push_back(to_float(compute_steering_vector(pairs_by_cat[c])));
  }
  // Renormalize after rounding to f32 so stored vectors meet the unit check.
  for (auto* set : {&bank.directions, &bank.steering}) {
    for (auto& v : *set) v = normalized_float(to_double(v));
  }
  bank.validate();
  return result;
}

void save_bank(const CategoryDirectionBank& bank, const std::filesystem::path& dir) {
  bank.validate();
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  auto emit = [&](const std::vector<float>& v, std::size_t c, const char* kind,
                  const std::string& stem) {
    const auto bytes = encode_tensor(Tensor::vector(std::span<const float>(v)));
    const std::string name = stem + "_" + std::to_string(c) + ".dtvt";
    write_file_bytes(dir / name, bytes);
    nlohmann::ordered_json f;
    f["category"] = bank.categories[c];
    f["kind"] = kind;
    f["path"] = name;
    f["shape"] = Shape{v.size()};
    f["checksum"] = hex64(fnv1a(bytes));
    files.push_back(std::move(f));
  };
  for (std::size_t c = 0; c < bank.size(); ++c) {
    if (bank.has_directions()) emit(bank.directions[c], c, "direction", "w");
    emit(bank.steering[c], c, "steering_vector", "delta");
  }
  nlohmann::ordered_json j;
  j["format"] = "dualguard-bank";
  j["version"] = 1;
  j["categories"] = bank.categories;
  j["dim"] = bank.dim();
  j["has_directions"] = bank.has_directions();
  j["provenance"] = bank.provenance;
  j["solver"] = {{"kind", "pegasos_ovo"},
                 {"reg", bank.solver.reg},
                 {"epochs", bank.solver.epochs},
                 {"seed", bank.solver.seed}};
  j["files"] = files;
  write_text_file(dir / "bank.json", j.dump(2) + "\n");
}

CategoryDirectionBank load_bank(const std::filesystem::path& dir) {
  CategoryDirectionBank bank;
  try {
    const auto j = nlohmann::json::parse(read_text_file(dir / "bank.json"));
    require(j.at("format").get<std::string>() == "dualguard-bank", ErrorKind::kData,
            "not a direction bank");
    bank.categories = j.at("categories").get<std::vector<std::string>>();
    const auto dim = j.at("dim").get<std::size_t>();
    const bool has_directions = j.at("has_directions").get<bool>();
    bank.provenance = j.at("provenance").get<std::string>();
    const auto& solver = j.at("solver");
    bank.solver.reg = solver.at("reg").get<double>();
    bank.solver.epochs = solver.at("epochs").get<std::size_t>();
    bank.solver.seed = solver.at("seed").get<std::uint64_t>();
    const std::size_t n = bank.categories.size();
    bank.steering.assign(n, {});
    if (has_directions) bank.directions.assign(n, {});
    for (const auto& f : j.at("files")) {
      const auto path = dir / f.at("path").get<std::string>();
      const auto bytes = read_file_bytes(path);
      require(hex64(fnv1a(bytes)) == f.at("checksum").get<std::string>(),
              ErrorKind::kData, "checksum mismatch for " + path.string());
      Tensor t = decode_tensor(bytes);
      require(t.shape() == Shape{dim}, ErrorKind::kData,
              "unexpected shape in " + path.string());
      const auto it = std::find(bank.categories.begin(), bank.categories.end(),
                                f.at("category").get<std::string>());
      require(it != bank.categories.end(), ErrorKind::kData,
              "bank file for unknown category in " + path.string());
      const auto c = static_cast<std::size_t>(it - bank.categories.begin());
      const std::string kind = f.at("kind").get<std::string>();
      std::vector<float> v(t.data().begin(), t.data().end());
      if (kind == "direction" && has_directions) {
        bank.directions[c] = std::move(v);
      } else if (kind == "steering_vector") {
        bank.steering[c] = std::move(v);
      } else {
        fail(ErrorKind::kData, "unexpected bank file kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kData, (dir / "bank.json").string() + ": " + ex.what());
  }
  for (const auto& v : bank.steering) {
    require(!v.empty(), ErrorKind::kData, "bank is missing a steering vector");
  }
  for (const auto& v : bank.directions) {
    require(!v.empty(), ErrorKind::kData, "bank is missing a direction");
  }
  bank.validate();
  return bank;
}

}  // namespace dualguard
