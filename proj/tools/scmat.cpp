// Copyright 2026 The scmat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "scmat/cli.hpp"

int main(int argc, char** argv) {
  scmat::CliConfig config;
  CLI::App app{"Self-collision matrix generation, benchmarking and refinement"};
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--robot-dir,-d", config.robot_dir, "Robot asset directory")
        ->capture_default_str();
  };
  const auto add_sampling = [&](CLI::App* cmd) {
    cmd->add_option("--samples", config.samples, "Sampled configurations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", config.threads, "Worker threads (0 = all cores)")
        ->capture_default_str();
    cmd->add_option("--always-fraction", config.thresholds.always_fraction,
                    "Collision fraction at or above which a pair is always in collision")
        ->capture_default_str();
    cmd->add_option("--never-margin", config.thresholds.never_margin,
                    "Minimum observed distance (m) for a never-in-collision skip")
        ->capture_default_str();
  };
  const auto add_urdf = [&](CLI::App* cmd) {
    cmd->add_option("--urdf", config.urdf, "Source URDF file");
    cmd->add_option("--mesh-root", config.mesh_root,
                    "Directory that relative and package:// mesh paths resolve against");
  };

  auto* preprocess = app.add_subcommand("preprocess", "Parse the URDF and build link shapes");
  add_common(preprocess);
  add_urdf(preprocess);

  auto* infer = app.add_subcommand("infer", "Sample configurations and infer skip matrices");
  add_common(infer);
  add_sampling(infer);

  auto* refine = app.add_subcommand("refine", "Serve the interactive refinement API");
  add_common(refine);
  add_urdf(refine);
  add_sampling(refine);
  refine->add_option("--port", config.port, "TCP port")->capture_default_str()->check(
      CLI::Range(0, 65535));
  refine->add_option("--host", config.host, "Listen address")->capture_default_str();
  refine->add_option("--viewer-dir", config.viewer_dir, "Static viewer bundle served at /");

  auto* bench = app.add_subcommand("bench", "Measure query-time ratios and matrix accuracy");
  add_common(bench);
  bench->add_option("--seed", config.seed, "Random seed")->capture_default_str();
  bench->add_option("--threads", config.threads, "Oracle worker threads")->capture_default_str();
  bench->add_option("--configs", config.bench_configs, "Configurations per timed batch")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench->add_option("--repeats", config.bench_repeats, "Timed batches")->capture_default_str();
  bench->add_option("--oracle-samples", config.oracle_samples, "Oracle configurations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* export_cmd = app.add_subcommand("export", "Rewrite matrix files from canonical JSON");
  add_common(export_cmd);
  export_cmd->add_option("--format", config.format, "json, yaml or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "yaml", "both"}));

  auto* import_cmd =
      app.add_subcommand("import-moveit", "Import MoveIt SRDF disabled pairs (hull_link)");
  add_common(import_cmd);
  import_cmd->add_option("--srdf", config.srdf, "MoveIt SRDF file")->required();

  CLI11_PARSE(app, argc, argv);

  if (*preprocess) return scmat::CmdPreprocess(config, std::cout, std::cerr);
  if (*infer) return scmat::CmdInfer(config, std::cout, std::cerr);
  if (*refine) return scmat::CmdRefine(config, std::cout, std::cerr);
  if (*bench) return scmat::CmdBench(config, std::cout, std::cerr);
  if (*export_cmd) return scmat::CmdExport(config, std::cout, std::cerr);
  if (*import_cmd) return scmat::CmdImportMoveit(config, std::cout, std::cerr);
  return 1;
}
