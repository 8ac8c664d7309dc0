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

#include "evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "error.hpp"
#include "util.hpp"

namespace dualguard {

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

nlohmann::json stats_to_json(const CategoryStats& s) {
  return {{"category", s.category},
          {"prompts", s.prompts},
          {"n_b", s.n_b},
          {"n_d", s.n_d},
          {"dsr", optional_number(s.dsr)}};
}

CategoryStats stats_from_json(const nlohmann::json& j) {
  return CategoryStats{j.at("category").get<std::string>(), j.at("prompts").get<std::size_t>(),
                       j.at("n_b").get<std::size_t>(), j.at("n_d").get<std::size_t>(),
                       read_optional_number(j.at("dsr"))};
}

std::string csv_dsr(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

double compute_dsr(std::size_t n_b, std::size_t n_d) {
  require(n_b > 0, ErrorKind::kNumeric, "DSR is undefined when N_b = 0");
  return (static_cast<double>(n_b) - static_cast<double>(n_d)) / static_cast<double>(n_b) *
         100.0;
}

std::optional<double> try_compute_dsr(std::size_t n_b, std::size_t n_d) {
  if (n_b == 0) return std::nullopt;
  return compute_dsr(n_b, n_d);
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string AblationFlags::label() const {
  if (textual && visual) return "T+V";
  if (textual) return "T";
  if (visual) return "V";
  return "none";
}

nlohmann::json DefenseReport::to_json() const {
  nlohmann::json per_cat = nlohmann::json::array();
  for (const auto& s : per_category) per_cat.push_back(stats_to_json(s));
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"kind", r.kind},
                    {"index", r.index},
                    {"category", r.category ? nlohmann::json(*r.category) : nlohmann::json(nullptr)},
                    {"undefended_unsafe", r.undefended_unsafe},
                    {"defended_unsafe", r.defended_unsafe},
                    {"undefended_probability", r.undefended_probability},
                    {"defended_probability", r.defended_probability},
                    {"embedding_rel_change", r.embedding_rel_change},
                    {"feature_cosine", r.feature_cosine},
                    {"cap_factor", r.cap_factor},
                    {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)}});
  }
  return {{"format", "dualguard-defense-report"},
          {"version", 1},
          {"ablation", {{"textual", flags.textual}, {"visual", flags.visual},
                        {"label", flags.label()}}},
          {"textual", {{"lambda", textual.lambda}, {"epsilon_f", textual.epsilon_f}}},
          {"visual", {{"beta", visual.beta}}},
          {"per_category", per_cat},
          {"overall", stats_to_json(overall)},
          {"benign",
           {{"cosine_proxy", benign_cosine},
            {"rel_change_proxy", benign_rel_change},
            {"flagged_undefended", benign_flagged_undefended},
            {"flagged_defended", benign_flagged_defended},
            {"note", "drift proxies on toy-pipeline features, not image-quality metrics"}}},
          {"failures", failures},
          {"records", recs},
          {"config", config_snapshot}};
}

DefenseReport DefenseReport::from_json(const nlohmann::json& j) {
  DefenseReport r;
  try {
    require(j.at("format").get<std::string>() == "dualguard-defense-report", ErrorKind::kData,
            "not a defense report");
    r.flags.textual = j.at("ablation").at("textual").get<bool>();
    r.flags.visual = j.at("ablation").at("visual").get<bool>();
    r.textual.lambda = j.at("textual").at("lambda").get<double>();
    r.textual.epsilon_f = j.at("textual").at("epsilon_f").get<double>();
    r.visual.beta = j.at("visual").at("beta").get<double>();
    for (const auto& s : j.at("per_category")) r.per_category.push_back(stats_from_json(s));
    r.overall = stats_from_json(j.at("overall"));
    const auto& b = j.at("benign");
    r.benign_cosine = b.at("cosine_proxy").get<double>();
    r.benign_rel_change = b.at("rel_change_proxy").get<double>();
    r.benign_flagged_undefended = b.at("flagged_undefended").get<std::size_t>();
    r.benign_flagged_defended = b.at("flagged_defended").get<std::size_t>();
    r.failures = j.at("failures").get<std::size_t>();
    for (const auto& jr : j.at("records")) {
      PromptRecord p;
      p.kind = jr.at("kind").get<std::string>();
      p.index = jr.at("index").get<std::size_t>();
      if (!jr.at("category").is_null()) p.category = jr["category"].get<std::string>();
      p.undefended_unsafe = jr.at("undefended_unsafe").get<bool>();
      p.defended_unsafe = jr.at("defended_unsafe").get<bool>();
      p.undefended_probability = jr.at("undefended_probability").get<double>();
      p.defended_probability = jr.at("defended_probability").get<double>();
      p.embedding_rel_change = jr.at("embedding_rel_change").get<double>();
      p.feature_cosine = jr.at("feature_cosine").get<double>();
      p.cap_factor = jr.at("cap_factor").get<double>();
      if (!jr.at("error").is_null()) p.error = jr["error"].get<std::string>();
      r.records.push_back(std::move(p));
    }
    r.config_snapshot = j.at("config");
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kData, std::string("malformed defense report: ") + ex.what());
  }
  return r;
}

bool DefenseReport::consistent() const {
  auto ok = [](const CategoryStats& s) { return s.dsr == try_compute_dsr(s.n_b, s.n_d); };
  if (!ok(overall)) return false;
  std::size_t nb = 0, nd = 0;
  for (const auto& s : per_category) {
    if (!ok(s)) return false;
    nb += s.n_b;
    nd += s.n_d;
  }
  return nb == overall.n_b && nd == overall.n_d;
}

BenchmarkHarness::BenchmarkHarness(std::vector<std::string> categories,
                                   std::vector<EvalPrompt> unsafe, std::vector<Tensor> benign,
                                   const CategoryDirectionBank* bank,
                                   const VisualSteeringSet* steering,
                                   const ToyDenoiser* denoiser, const JudgeProbe* judge,
                                   unsigned threads)
    : categories_(std::move(categories)),
      unsafe_(std::move(unsafe)),
      benign_(std::move(benign)),
      bank_(bank),
      steering_(steering),
      denoiser_(denoiser),
      judge_(judge),
      threads_(threads) {
  require(denoiser_ && judge_, ErrorKind::kInternal, "harness needs a denoiser and a judge");
  for (const auto& p : unsafe_) {
    require(p.category < categories_.size(), ErrorKind::kData, "prompt category out of range");
  }
  auto baseline = [&](const std::vector<const Tensor*>& inputs) {
    std::vector<Baseline> out(inputs.size());
    parallel_for(inputs.size(), threads_, [&](std::size_t i) {
      out[i].feature = denoiser_->run(*inputs[i]).final_feature;
      out[i].verdict = judge_->classify(out[i].feature);
    });
    return out;
  };
  std::vector<const Tensor*> inputs;
  for (const auto& p : unsafe_) inputs.push_back(&p.embedding);
  unsafe_baseline_ = baseline(inputs);
  inputs.clear();
  for (const auto& b : benign_) inputs.push_back(&b);
  benign_baseline_ = baseline(inputs);
}

DefenseReport BenchmarkHarness::run(const AblationFlags& flags, const TextualConfig& textual,
                                    const VisualConfig& visual) const {
  textual.validate();
  visual.validate();
  require(!flags.textual || bank_, ErrorKind::kConfig, "textual defense needs a direction bank");
  require(!flags.visual || steering_, ErrorKind::kConfig,
          "visual defense needs a visual steering set");
  DefenseReport report;
  report.flags = flags;
  report.textual = textual;
  report.visual = visual;

  const SuppressionHook hook{steering_, visual};
  auto defend = [&](const Tensor& x, const Baseline& base, PromptRecord& rec) {
    rec.undefended_unsafe = base.verdict.unsafe;
    rec.undefended_probability = base.verdict.probability;
    try {
      const Tensor* input = &x;
      PurifyResult purified;
      if (flags.textual) {
        purified = purify(x, *bank_, textual);
        input = &purified.output;
        const double norm = frobenius_norm(x);
        rec.embedding_rel_change = norm > 0 ? purified.trace.output_change / norm : 0.0;
        rec.cap_factor = purified.trace.cap_factor;
      }
      std::vector<double> feature;
      if (!flags.textual && !flags.visual) {
        feature = base.feature;
      } else {
        feature = denoiser_->run(*input, flags.visual ? &hook : nullptr).final_feature;
      }
      const JudgeVerdict verdict = judge_->classify(feature);
      rec.defended_unsafe = verdict.unsafe;
      rec.defended_probability = verdict.probability;
      rec.feature_cosine = cosine(feature, base.feature);
    } catch (const Error& e) {
      rec.error = std::string(error_kind_name(e.kind())) + ": " + e.what();
    }
  };

  std::vector<PromptRecord> unsafe_records(unsafe_.size());
  parallel_for(unsafe_.size(), threads_, [&](std::size_t i) {
    auto& rec = unsafe_records[i];
    rec.kind = "unsafe";
    rec.index = i;
    rec.category = categories_[unsafe_[i].category];
    defend(unsafe_[i].embedding, unsafe_baseline_[i], rec);
  });
  std::vector<PromptRecord> benign_records(benign_.size());
  parallel_for(benign_.size(), threads_, [&](std::size_t i) {
    auto& rec = benign_records[i];
    rec.kind = "benign";
    rec.index = i;
    defend(benign_[i], benign_baseline_[i], rec);
  });

  report.per_category.resize(categories_.size());
  for (std::size_t c = 0; c < categories_.size(); ++c) {
    report.per_category[c].category = categories_[c];
  }
  report.overall.category = "overall";
  for (std::size_t i = 0; i < unsafe_records.size(); ++i) {
    const auto& rec = unsafe_records[i];
    auto& stats = report.per_category[unsafe_[i].category];
    ++stats.prompts;
    if (rec.error) {
      ++report.failures;
      continue;
    }
    stats.n_b += rec.undefended_unsafe ? 1 : 0;
    stats.n_d += rec.defended_unsafe ? 1 : 0;
  }
  for (auto& s : report.per_category) {
    s.dsr = try_compute_dsr(s.n_b, s.n_d);
    report.overall.prompts += s.prompts;
    report.overall.n_b += s.n_b;
    report.overall.n_d += s.n_d;
  }
  report.overall.dsr = try_compute_dsr(report.overall.n_b, report.overall.n_d);

  double cos_sum = 0.0, change_sum = 0.0;
  std::size_t ok = 0;
  for (const auto& rec : benign_records) {
    if (rec.error) {
      ++report.failures;
      continue;
    }
    ++ok;
    cos_sum += rec.feature_cosine;
    change_sum += rec.embedding_rel_change;
    report.benign_flagged_undefended += rec.undefended_unsafe ? 1 : 0;
    report.benign_flagged_defended += rec.defended_unsafe ? 1 : 0;
  }
  if (ok > 0) {
    report.benign_cosine = cos_sum / static_cast<double>(ok);
    report.benign_rel_change = change_sum / static_cast<double>(ok);
  }
  report.records = std::move(unsafe_records);
  report.records.insert(report.records.end(), benign_records.begin(), benign_records.end());
  return report;
}

const char* sweep_param_name(SweepParam p) {
  return p == SweepParam::kLambda ? "lambda" : "epsilon_f";
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "lambda") return SweepParam::kLambda;
  if (name == "epsilon_f") return SweepParam::kEpsilonF;
  fail(ErrorKind::kConfig, "unknown sweep parameter '" + name + "'");
}

std::vector<SweepRow> run_sweep(const BenchmarkHarness& harness, SweepParam param,
                                const std::vector<double>& values,
                                const TextualConfig& textual, const VisualConfig& visual,
                                const AblationFlags& flags) {
  require(!values.empty(), ErrorKind::kConfig, "sweep grid is empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    require(values[i - 1] < values[i], ErrorKind::kConfig,
            "sweep values must be sorted ascending");
  }
  std::vector<SweepRow> rows;
  for (double v : values) {
    TextualConfig cfg = textual;
    (param == SweepParam::kLambda ? cfg.lambda : cfg.epsilon_f) = v;
    rows.push_back({v, harness.run(flags, cfg, visual)});
  }
  return rows;
}

std::string sweep_to_csv(SweepParam param, const std::vector<SweepRow>& rows,
                         const std::vector<std::string>& categories) {
  std::string out = "param,value,dsr_overall";
  for (const auto& c : categories) out += ",dsr_" + c;
  out += ",benign_cosine,benign_rel_change\n";
  for (const auto& row : rows) {
    out += sweep_param_name(param);
    out += "," + format_number(row.value) + "," + csv_dsr(row.report.overall.dsr);
    for (const auto& s : row.report.per_category) out += "," + csv_dsr(s.dsr);
    out += "," + format_number(row.report.benign_cosine) + "," +
           format_number(row.report.benign_rel_change) + "\n";
  }
  return out;
}

std::string report_summary_csv(const DefenseReport& report) {
  std::string out = "category,prompts,n_b,n_d,dsr\n";
  auto line = [&](const CategoryStats& s) {
    out += s.category + "," + std::to_string(s.prompts) + "," + std::to_string(s.n_b) + "," +
           std::to_string(s.n_d) + "," + csv_dsr(s.dsr) + "\n";
  };
  for (const auto& s : report.per_category) line(s);
  line(report.overall);
  return out;
}

std::string report_records_csv(const DefenseReport& report) {
  std::string out =
      "kind,index,category,undefended_unsafe,defended_unsafe,undefended_probability,"
      "defended_probability,embedding_rel_change,feature_cosine,cap_factor,error\n";
  for (const auto& r : report.records) {
    out += r.kind + "," + std::to_string(r.index) + "," + r.category.value_or("") + "," +
           (r.undefended_unsafe ? "1" : "0") + "," + (r.defended_unsafe ? "1" : "0") + "," +
           format_number(r.undefended_probability) + "," +
           format_number(r.defended_probability) + "," +
           format_number(r.embedding_rel_change) + "," + format_number(r.feature_cosine) +
           "," + format_number(r.cap_factor) + "," + (r.error ? "\"" + *r.error + "\"" : "") +
           "\n";
  }
  return out;
}

std::string ablation_csv(const std::vector<DefenseReport>& arms) {
  std::string out = "arm,textual,visual,n_b,n_d,dsr_overall,benign_cosine,benign_rel_change\n";
  for (const auto& r : arms) {
    out += r.flags.label() + "," + (r.flags.textual ? "1" : "0") + "," +
           (r.flags.visual ? "1" : "0") + "," + std::to_string(r.overall.n_b) + "," +
           std::to_string(r.overall.n_d) + "," + csv_dsr(r.overall.dsr) + "," +
           format_number(r.benign_cosine) + "," + format_number(r.benign_rel_change) + "\n";
  }
  return out;
}

}  // namespace dualguard
