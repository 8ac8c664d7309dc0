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

#ifndef DUALGUARD_COMMANDS_HPP_
#define DUALGUARD_COMMANDS_HPP_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace dualguard {

// Each command validates the config before writing anything and returns a
// JSON summary. Failures throw dualguard::Error; its kind is the exit code.

nlohmann::json cmd_validate_config(const RunConfig& cfg);
// <out>/usp/usp_text.jsonl (minimal substitution) and usp_visual.jsonl
// (concept appending).
nlohmann::json cmd_gen_usp(const RunConfig& cfg);
// <out>/embeddings/{text,visual,benign}/ .dtvt tensors plus manifest.json.
nlohmann::json cmd_synth_embed(const RunConfig& cfg);
// Reads the text-side manifest, writes the bank to <out>/bank. A bank with no
// category directions is still written, then a numeric error is raised.
nlohmann::json cmd_train_directions(const RunConfig& cfg);
// From exported cross-attention features when paths.visual_features_manifest
// is set, otherwise by running the toy denoiser on the visual-side manifest.
nlohmann::json cmd_train_visual_steering(const RunConfig& cfg);
// Purifies every prompt embedding of `manifest` into <out>/intervened.
nlohmann::json cmd_intervene(const RunConfig& cfg, const std::filesystem::path& manifest);
// <out>/report/: report.json, summary.csv, records.csv, ablation.csv and the
// run_meta.json timestamp sidecar.
nlohmann::json cmd_run(const RunConfig& cfg);
// <out>/sweep/sweep_<param>.csv; `param` empty runs both grids.
nlohmann::json cmd_sweep(const RunConfig& cfg, const std::string& param);

}  // namespace dualguard

#endif  // DUALGUARD_COMMANDS_HPP_
