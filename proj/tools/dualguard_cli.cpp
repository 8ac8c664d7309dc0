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

// Command-line front end. Talks to the engine only through the C API.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dualguard/dualguard.h"

namespace {

const char* status_name(dg_status s) {
  switch (s) {
    case DG_OK: return "ok";
    case DG_ERR_CONFIG: return "config";
    case DG_ERR_DATA: return "data";
    case DG_ERR_NUMERIC: return "numeric";
    case DG_ERR_ARGUMENT:
    case DG_ERR_INTERNAL: break;
  }
  return "internal";
}

// Exit codes: 0 ok, 1 internal, 2 config, 3 data, 4 numeric.
int exit_code(dg_status s) { return s == DG_ERR_ARGUMENT ? 1 : static_cast<int>(s); }

int report_failure(const std::string& command, dg_status s) {
  const nlohmann::json record{{"error",
                               {{"command", command},
                                {"kind", status_name(s)},
                                {"exit_code", exit_code(s)},
                                {"message", dg_last_error()}}}};
  std::fprintf(stderr, "%s\n", record.dump().c_str());
  return exit_code(s);
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  std::string manifest;
  std::string param;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dualguard: textual purification and visual suppression for text-to-image models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dg_version()));

  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", opt.config, "JSON config file (defaults if omitted)");
    sub->add_option("--seed", opt.seed, "Base seed, overrides the config");
    sub->add_option("-o,--out", opt.out, "Output directory, overrides paths.out_dir");
    sub->add_option("--set", opt.overrides, "Config override key.path=value (repeatable)")
        ->allow_extra_args(false);
  };

  struct Entry {
    const char* name;
    const char* help;
  };
  const std::vector<Entry> commands{
      {"validate-config", "Check a config and print the resolved form"},
      {"gen-usp", "Build text and visual unsafe/safe prompt pairs from concepts"},
      {"synth-embed", "Write synthetic paired prompt embeddings with manifests"},
      {"train-directions", "Train category directions and steering vectors"},
      {"train-visual-steering", "Compute per-step, per-layer visual steering vectors"},
      {"intervene", "Purify every prompt embedding listed in a manifest"},
      {"run", "Run the benchmark and write the defense report"},
      {"sweep", "Sweep lambda and/or epsilon_f and write CSV curves"},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (std::string(c.name) == "intervene") {
      sub->add_option("-m,--manifest", opt.manifest, "Manifest of embeddings to purify")
          ->required();
    }
    if (std::string(c.name) == "sweep") {
      sub->add_option("--param", opt.param, "lambda or epsilon_f (default: both)")
          ->check(CLI::IsMember({"lambda", "epsilon_f"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  dg_config* cfg = nullptr;
  dg_status s = dg_config_load(opt.config.empty() ? nullptr : opt.config.c_str(), &cfg);
  if (s != DG_OK) return report_failure(command, s);
  for (const auto& o : opt.overrides) {
    if (s == DG_OK) s = dg_config_set(cfg, o.c_str());
  }
  if (s == DG_OK && opt.seed) s = dg_config_set_seed(cfg, *opt.seed);
  if (s == DG_OK && !opt.out.empty()) s = dg_config_set_out_dir(cfg, opt.out.c_str());

  char* summary = nullptr;
  if (s == DG_OK) {
    if (command == "validate-config") s = dg_cmd_validate_config(cfg, &summary);
    else if (command == "gen-usp") s = dg_cmd_gen_usp(cfg, &summary);
    else if (command == "synth-embed") s = dg_cmd_synth_embed(cfg, &summary);
    else if (command == "train-directions") s = dg_cmd_train_directions(cfg, &summary);
    else if (command == "train-visual-steering") s = dg_cmd_train_visual_steering(cfg, &summary);
    else if (command == "intervene") s = dg_cmd_intervene(cfg, opt.manifest.c_str(), &summary);
    else if (command == "run") s = dg_cmd_run(cfg, &summary);
    else s = dg_cmd_sweep(cfg, opt.param.empty() ? nullptr : opt.param.c_str(), &summary);
  }
  dg_config_free(cfg);
  if (s != DG_OK) return report_failure(command, s);

  std::printf("%s\n", nlohmann::json::parse(summary).dump(2).c_str());
  dg_string_free(summary);
  return 0;
}
