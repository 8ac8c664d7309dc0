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

#include "dualguard/dualguard.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "commands.hpp"
#include "error.hpp"
#include "tensor.hpp"

struct dg_config {
  nlohmann::json raw;  // overrides apply here; parsed on use
  std::filesystem::path base_dir;
};
struct dg_tensor {
  dualguard::Tensor t;
};
struct dg_bank {
  dualguard::CategoryDirectionBank bank;
};
struct dg_steering {
  dualguard::VisualSteeringSet set;
};

namespace {

thread_local std::string g_last_error;

dg_status to_status(dualguard::ErrorKind kind) {
  switch (kind) {
    case dualguard::ErrorKind::kConfig: return DG_ERR_CONFIG;
    case dualguard::ErrorKind::kData: return DG_ERR_DATA;
    case dualguard::ErrorKind::kNumeric: return DG_ERR_NUMERIC;
    case dualguard::ErrorKind::kInternal: break;
  }
  return DG_ERR_INTERNAL;
}

template <typename F>
dg_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return DG_OK;
  } catch (const dualguard::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown exception";
  }
  return DG_ERR_INTERNAL;
}

dg_status bad_argument(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return DG_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

dualguard::RunConfig parse(const dg_config* cfg) {
  return dualguard::config_from_json(cfg->raw, cfg->base_dir);
}

template <typename F>
dg_status run_command(const dg_config* cfg, char** summary_out, F&& command) {
  if (cfg == nullptr) return bad_argument("config is null");
  return guarded([&] {
    const auto summary = command(parse(cfg));
    if (summary_out != nullptr) *summary_out = dup_string(summary.dump());
  });
}

}  // namespace

extern "C" {

const char* dg_version(void) { return "1.0.0"; }
const char* dg_last_error(void) { return g_last_error.c_str(); }
void dg_string_free(char* s) { delete[] s; }

dg_status dg_config_load(const char* path, dg_config** out) {
  if (out == nullptr) return bad_argument("out is null");
  *out = nullptr;
  return guarded([&] {
    auto cfg = std::make_unique<dg_config>();
    if (path != nullptr) {
      cfg->raw = dualguard::load_config_json(path);
      cfg->base_dir = std::filesystem::path(path).parent_path();
    } else {
      cfg->raw = dualguard::config_to_json(dualguard::RunConfig{});
      cfg->base_dir = std::filesystem::current_path();
    }
    dualguard::config_from_json(cfg->raw, cfg->base_dir);  // reject bad keys early
    *out = cfg.release();
  });
}

dg_status dg_config_set(dg_config* cfg, const char* assignment) {
  if (cfg == nullptr || assignment == nullptr) return bad_argument("null config or assignment");
  return guarded([&] {
    auto raw = cfg->raw;
    dualguard::apply_override(raw, assignment);
    dualguard::config_from_json(raw, cfg->base_dir);
    cfg->raw = std::move(raw);
  });
}

dg_status dg_config_set_seed(dg_config* cfg, uint64_t seed) {
  if (cfg == nullptr) return bad_argument("config is null");
  return guarded([&] { cfg->raw["seed"] = seed; });
}

dg_status dg_config_set_out_dir(dg_config* cfg, const char* dir) {
  if (cfg == nullptr || dir == nullptr) return bad_argument("null config or dir");
  return guarded([&] {
    // Relative to the working directory, like any other command-line path.
    cfg->raw["paths"]["out_dir"] = std::filesystem::absolute(dir).lexically_normal().string();
  });
}

dg_status dg_config_validate(const dg_config* cfg) {
  if (cfg == nullptr) return bad_argument("config is null");
  return guarded([&] { dualguard::validate_config(parse(cfg), true); });
}

dg_status dg_config_to_json(const dg_config* cfg, char** json_out) {
  if (cfg == nullptr || json_out == nullptr) return bad_argument("null config or out");
  return guarded([&] { *json_out = dup_string(dualguard::config_to_json(parse(cfg)).dump(2)); });
}

void dg_config_free(dg_config* cfg) { delete cfg; }

dg_status dg_cmd_validate_config(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out,
                     [](const auto& c) { return dualguard::cmd_validate_config(c); });
}
dg_status dg_cmd_gen_usp(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out, [](const auto& c) { return dualguard::cmd_gen_usp(c); });
}
dg_status dg_cmd_synth_embed(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out,
                     [](const auto& c) { return dualguard::cmd_synth_embed(c); });
}
dg_status dg_cmd_train_directions(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out,
                     [](const auto& c) { return dualguard::cmd_train_directions(c); });
}
dg_status dg_cmd_train_visual_steering(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out,
                     [](const auto& c) { return dualguard::cmd_train_visual_steering(c); });
}
dg_status dg_cmd_intervene(const dg_config* cfg, const char* manifest_path, char** summary_out) {
  if (manifest_path == nullptr) return bad_argument("manifest path is null");
  return run_command(cfg, summary_out, [&](const auto& c) {
    return dualguard::cmd_intervene(c, std::filesystem::absolute(manifest_path));
  });
}
dg_status dg_cmd_run(const dg_config* cfg, char** summary_out) {
  return run_command(cfg, summary_out, [](const auto& c) { return dualguard::cmd_run(c); });
}
dg_status dg_cmd_sweep(const dg_config* cfg, const char* param, char** summary_out) {
  const std::string p = param == nullptr ? "" : param;
  return run_command(cfg, summary_out,
                     [&](const auto& c) { return dualguard::cmd_sweep(c, p); });
}

dg_status dg_tensor_create(const size_t* dims, size_t ndim, const float* data, dg_tensor** out) {
  if (out == nullptr || dims == nullptr || data == nullptr) return bad_argument("null pointer");
  *out = nullptr;
  return guarded([&] {
    dualguard::Shape shape(dims, dims + ndim);
    dualguard::validate_shape(shape);
    const std::size_t n = dualguard::shape_element_count(shape);
    auto t = std::make_unique<dg_tensor>();
    t->t = dualguard::Tensor(std::move(shape), std::vector<float>(data, data + n));
    dualguard::require(t->t.all_finite(), dualguard::ErrorKind::kData,
                       "tensor contains NaN or Inf");
    *out = t.release();
  });
}

dg_status dg_tensor_read(const char* path, dg_tensor** out) {
  if (out == nullptr || path == nullptr) return bad_argument("null pointer");
  *out = nullptr;
  return guarded([&] { *out = new dg_tensor{dualguard::read_tensor(path)}; });
}

dg_status dg_tensor_write(const dg_tensor* t, const char* path) {
  if (t == nullptr || path == nullptr) return bad_argument("null pointer");
  return guarded([&] { dualguard::write_tensor(t->t, path); });
}

size_t dg_tensor_ndim(const dg_tensor* t) { return t == nullptr ? 0 : t->t.ndim(); }
size_t dg_tensor_dim(const dg_tensor* t, size_t axis) {
  return t == nullptr || axis >= t->t.ndim() ? 0 : t->t.shape()[axis];
}
size_t dg_tensor_size(const dg_tensor* t) { return t == nullptr ? 0 : t->t.size(); }
const float* dg_tensor_data(const dg_tensor* t) {
  return t == nullptr ? nullptr : t->t.data().data();
}
double dg_tensor_frobenius(const dg_tensor* t) {
  return t == nullptr ? 0.0 : dualguard::frobenius_norm(t->t);
}
void dg_tensor_free(dg_tensor* t) { delete t; }

dg_status dg_bank_load(const char* dir, dg_bank** out) {
  if (out == nullptr || dir == nullptr) return bad_argument("null pointer");
  *out = nullptr;
  return guarded([&] { *out = new dg_bank{dualguard::load_bank(dir)}; });
}
size_t dg_bank_categories(const dg_bank* bank) { return bank == nullptr ? 0 : bank->bank.size(); }
size_t dg_bank_dim(const dg_bank* bank) { return bank == nullptr ? 0 : bank->bank.dim(); }

dg_status dg_bank_purify(const dg_bank* bank, const dg_tensor* embedding, double lambda,
                         double epsilon_f, dg_tensor** out, char** trace_out) {
  if (bank == nullptr || embedding == nullptr || out == nullptr) return bad_argument("null pointer");
  *out = nullptr;
  return guarded([&] {
    dualguard::TextualConfig cfg;
    cfg.lambda = lambda;
    cfg.epsilon_f = epsilon_f;
    cfg.validate();
    auto result = dualguard::purify(embedding->t, bank->bank, cfg);
    if (trace_out != nullptr) *trace_out = dup_string(result.trace.to_json().dump());
    *out = new dg_tensor{std::move(result.output)};
  });
}
void dg_bank_free(dg_bank* bank) { delete bank; }

dg_status dg_steering_load(const char* dir, dg_steering** out) {
  if (out == nullptr || dir == nullptr) return bad_argument("null pointer");
  *out = nullptr;
  return guarded([&] { *out = new dg_steering{dualguard::load_visual_steering(dir)}; });
}

dg_status dg_steering_suppress(const dg_steering* steering, int step, int layer,
                               const dg_tensor* features, double beta, dg_tensor** out) {
  if (steering == nullptr || features == nullptr || out == nullptr) {
    return bad_argument("null pointer");
  }
  *out = nullptr;
  return guarded([&] {
    dualguard::VisualConfig cfg;
    cfg.beta = beta;
    cfg.validate();
    *out = new dg_tensor{
        dualguard::suppress_values(features->t, steering->set, {step, layer}, cfg)};
  });
}
void dg_steering_free(dg_steering* steering) { delete steering; }

dg_status dg_compute_dsr(size_t n_b, size_t n_d, double* dsr_out) {
  if (dsr_out == nullptr) return bad_argument("dsr_out is null");
  return guarded([&] { *dsr_out = dualguard::compute_dsr(n_b, n_d); });
}

}  // extern "C"
