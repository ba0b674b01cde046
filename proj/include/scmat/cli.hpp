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

// Pipeline commands behind the scmat executable. Each returns a process exit
// status; results go to `out`, diagnostics to `err`.

#ifndef SCMAT_CLI_HPP_
#define SCMAT_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmat/asset_dir.hpp"
#include "scmat/bench.hpp"
#include "scmat/matrix.hpp"
#include "scmat/sampling.hpp"
#include "scmat/service.hpp"
#include "scmat/shapes.hpp"

namespace scmat {

struct CliConfig {
  std::filesystem::path robot_dir = ".";
  std::filesystem::path urdf;       // preprocess input
  std::filesystem::path mesh_root;  // defaults to the URDF's directory
  std::size_t samples = kDefaultSamples;
  std::uint64_t seed = 0;
  InferenceThresholds thresholds;
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string format = "both";
  unsigned threads = 0;  // 0 = hardware concurrency
  std::filesystem::path srdf;
  std::filesystem::path viewer_dir;
  std::size_t bench_configs = 2000;
  std::size_t bench_repeats = 5;
  std::size_t oracle_samples = 100000;
  // Called by refine once the port is bound, before serving starts.
  std::function<void(Service&)> on_bound;

  void Validate() const {
    if (samples < 1) throw Error("--samples must be >= 1");
    if (port < 0 || port > 65535) throw Error("--port must be in 0..65535");
    thresholds.Validate();
  }
};

namespace detail {

inline std::vector<MatrixFormat> FormatsFromName(const std::string& name) {
  if (name == "both") return {MatrixFormat::kJson, MatrixFormat::kYaml};
  if (const auto f = ParseMatrixFormat(name)) return {*f};
  throw Error("--format must be json, yaml or both (got '" + name + "')");
}

template <typename Fn>
int Guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace detail

// Parses the URDF, builds every link's shapes and writes model/ and shapes/.
inline int CmdPreprocess(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    config.Validate();
    const AssetDir dir(config.robot_dir);
    RobotModel model;
    std::string urdf_text;
    std::filesystem::path mesh_root = config.mesh_root;
    if (!config.urdf.empty()) {
      urdf_text = ReadTextFile(config.urdf);
      if (mesh_root.empty()) mesh_root = config.urdf.parent_path();
      if (mesh_root.empty()) mesh_root = ".";
      model = ParseUrdf(urdf_text, std::filesystem::absolute(mesh_root).string());
    } else if (dir.HasModel()) {
      model = dir.LoadModel();
    } else {
      throw Error("--urdf is required (no model in " + config.robot_dir.string() + ")");
    }
    Diagnostics diag;
    const auto shapes = BuildRobotShapes(model, {}, &diag);
    for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
    if (!urdf_text.empty()) dir.SaveModel(urdf_text, model, mesh_root);
    dir.SaveShapes(shapes);
    std::size_t parts = 0;
    for (const auto& s : shapes) parts += s.NumParts();
    out << "preprocessed " << shapes.size() << " links (" << parts
        << " convex parts) into " << dir.ShapesDir().string() << "\n";
    return 0;
  });
}

// Samples configurations, writes stats/ and both matrix formats for all six
// types. User-marked and imported skips of existing matrices are kept.
inline int CmdInfer(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    config.Validate();
    const AssetDir dir(config.robot_dir);
    const RobotModel model = dir.LoadModel();
    const auto shapes = dir.LoadShapes(model);
    const auto stats = RunSampling(model, shapes, {config.samples, config.seed, config.threads});
    for (const auto type : kAllShapeTypes) {
      const StatsTable& table = stats.at(type);
      const auto index_map = ShapeIndexSpace(shapes, type);
      std::optional<SkipMatrix> previous;
      if (std::filesystem::exists(dir.MatrixPath(type, MatrixFormat::kJson))) {
        try {
          SkipMatrix m = dir.LoadMatrix(type);
          if (m.shape_index_map == index_map) {
            previous = std::move(m);
          } else {
            err << "warning: existing " << ToString(type)
                << " matrix has a different index space; user edits dropped\n";
          }
        } catch (const Error& e) {
          err << "warning: ignoring unreadable " << ToString(type) << " matrix: " << e.what()
              << "\n";
        }
      }
      const SkipMatrix m =
          InferSkips(table, model, index_map, config.thresholds, previous ? &*previous : nullptr);
      dir.SaveStats(table);
      dir.SaveMatrix(m, kBothFormats);
      const auto counts = m.CountsByReason();
      out << std::left << std::setw(14) << ToString(type) << " shapes " << std::setw(4)
          << m.num_shapes << " pairs " << std::setw(6) << m.NumCandidatePairs() << " skipped "
          << std::setw(6) << m.skips.size() << " (adjacent "
          << counts.at(SkipReason::kAdjacent) << ", never "
          << counts.at(SkipReason::kNeverInCollision) << ", always "
          << counts.at(SkipReason::kAlwaysInCollision) << ")\n";
    }
    out << "sampled " << config.samples << " configurations, seed " << config.seed << "\n";
    return 0;
  });
}

// Serves the refinement API until interrupted. Missing shapes or matrices
// are produced first.
inline int CmdRefine(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    config.Validate();
    const AssetDir dir(config.robot_dir);
    if (!dir.HasModel() || !std::filesystem::exists(dir.ShapesDir())) {
      if (const int rc = CmdPreprocess(config, out, err); rc != 0) return rc;
    }
    if (!dir.HasAllMatrices() || !dir.HasAllStats()) {
      out << "no matrices found, running inference first\n";
      if (const int rc = CmdInfer(config, out, err); rc != 0) return rc;
    }
    Service service({config.seed, config.viewer_dir});
    service.Load(config.robot_dir);
    if (!service.Bind(config.host, config.port)) {
      err << "error: cannot listen on " << config.host << ":" << config.port
          << " (port already in use?)\n";
      return 1;
    }
    out << "viewer at http://" << config.host << ":" << service.port() << "/\n" << std::flush;
    if (config.on_bound) config.on_bound(service);
    return service.Listen() ? 0 : 1;
  });
}

// Speed ratios for all six types in both modes plus accuracy against an
// oracle drawn with a different seed. Writes bench/report.json.
inline int CmdBench(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    config.Validate();
    const AssetDir dir(config.robot_dir);
    const RobotModel model = dir.LoadModel();
    const auto shapes = dir.LoadShapes(model);
    std::vector<BenchReport> ratios;
    std::vector<AccuracyReport> accuracy;
    const std::uint64_t oracle_seed = config.seed + 1;
    const CollisionOracle oracle =
        RunCollisionOracle(model, shapes, config.oracle_samples, oracle_seed, config.threads);
    for (const auto type : kAllShapeTypes) {
      const SkipMatrix m = dir.LoadMatrix(type);
      for (const auto mode : {QueryMode::kCollision, QueryMode::kProximity}) {
        ratios.push_back(BenchRatio(model, shapes, m, mode, config.bench_configs, config.seed,
                                    config.bench_repeats));
      }
      accuracy.push_back(ClassifyAccuracy(m, model, oracle));
    }
    nlohmann::ordered_json report;
    report["format_version"] = 1;
    report["robot_name"] = model.name;
    report["seed"] = config.seed;
    report["oracle"] = {{"samples", config.oracle_samples}, {"seed", oracle_seed}};
    report["ratios"] = nlohmann::ordered_json::array();
    for (const auto& r : ratios) report["ratios"].push_back(ToJson(r));
    report["accuracy"] = nlohmann::ordered_json::array();
    for (const auto& a : accuracy) report["accuracy"].push_back(ToJson(a));
    WriteTextFile(dir.BenchReportPath(), report.dump(2) + "\n");
    out << report.dump(2) << "\n\n";
    PrintBenchTable(out, ratios, accuracy);
    out << "report written to " << dir.BenchReportPath().string() << "\n";
    return 0;
  });
}

// Rewrites matrix files from the canonical JSON.
inline int CmdExport(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    const auto formats = detail::FormatsFromName(config.format);
    const AssetDir dir(config.robot_dir);
    for (const auto type : kAllShapeTypes) {
      for (const auto& p : dir.SaveMatrix(dir.LoadMatrix(type), formats)) {
        out << p.string() << "\n";
      }
    }
    return 0;
  });
}

// Merges an SRDF's disabled pairs into the hull_link matrix as imported
// skips, replacing whatever entry those pairs had.
inline int CmdImportMoveit(const CliConfig& config, std::ostream& out, std::ostream& err) {
  return detail::Guarded(err, [&] {
    if (config.srdf.empty()) throw Error("--srdf is required");
    const AssetDir dir(config.robot_dir);
    const RobotModel model = dir.LoadModel();
    const SrdfImport imported = ImportMoveItSrdf(ReadTextFile(config.srdf), model);
    for (const auto& w : imported.warnings) err << "warning: " << w << "\n";
    SkipMatrix m = imported.matrix;
    if (std::filesystem::exists(dir.MatrixPath(ShapeType::kHullLink, MatrixFormat::kJson))) {
      SkipMatrix existing = dir.LoadMatrix(ShapeType::kHullLink);
      if (existing.shape_index_map != m.shape_index_map) {
        throw Error("hull_link matrix index space differs from the model's links");
      }
      std::erase_if(existing.skips, [&](const SkipEntry& e) { return m.IsSkipped(e.i, e.j); });
      existing.skips.insert(existing.skips.end(), m.skips.begin(), m.skips.end());
      existing.Normalize();
      m = std::move(existing);
    }
    dir.SaveMatrix(m, kBothFormats);
    out << "imported " << imported.imported << " pairs into the hull_link matrix\n";
    return 0;
  });
}

}  // namespace scmat

#endif  // SCMAT_CLI_HPP_
