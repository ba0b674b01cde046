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

// Robot asset directory:
//
//   model/robot.urdf          copy of the source URDF
//   model/model.json          robot name and mesh root used for parsing
//   shapes/<link>.json        all six representations of one link
//   stats/<shape_type>.json   sampling statistics
//   matrices/<shape_type>.json, matrices/<shape_type>.yaml
//   bench/report.json

#ifndef SCMAT_ASSET_DIR_HPP_
#define SCMAT_ASSET_DIR_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmat/matrix.hpp"
#include "scmat/model.hpp"
#include "scmat/sampling.hpp"
#include "scmat/shapes.hpp"
#include "scmat/stats.hpp"

namespace scmat {

class AssetError : public Error {
 public:
  using Error::Error;
};

inline std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AssetError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a temporary file and renames it into place.
inline void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw AssetError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw AssetError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class AssetDir {
 public:
  explicit AssetDir(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path UrdfPath() const { return root_ / "model" / "robot.urdf"; }
  std::filesystem::path ModelInfoPath() const { return root_ / "model" / "model.json"; }
  std::filesystem::path ShapesDir() const { return root_ / "shapes"; }
  std::filesystem::path ShapesPath(const std::string& link) const {
    return ShapesDir() / (link + ".json");
  }
  std::filesystem::path StatsPath(ShapeType type) const {
    return root_ / "stats" / (std::string(ToString(type)) + ".json");
  }
  std::filesystem::path MatrixPath(ShapeType type, MatrixFormat format) const {
    return root_ / "matrices" /
           (std::string(ToString(type)) + "." + std::string(Extension(format)));
  }
  std::filesystem::path BenchReportPath() const { return root_ / "bench" / "report.json"; }

  bool HasModel() const { return std::filesystem::exists(UrdfPath()); }
  bool HasAllStats() const {
    for (const auto t : kAllShapeTypes) {
      if (!std::filesystem::exists(StatsPath(t))) return false;
    }
    return true;
  }
  bool HasAllMatrices() const {
    for (const auto t : kAllShapeTypes) {
      if (!std::filesystem::exists(MatrixPath(t, MatrixFormat::kJson))) return false;
    }
    return true;
  }

  // Copies the URDF text and records the mesh root it was parsed against.
  void SaveModel(const std::string& urdf_text, const RobotModel& model,
                 const std::filesystem::path& mesh_root) const {
    WriteTextFile(UrdfPath(), urdf_text);
    nlohmann::ordered_json info;
    info["format_version"] = 1;
    info["robot_name"] = model.name;
    info["mesh_root"] = std::filesystem::absolute(mesh_root).lexically_normal().string();
    info["dof"] = model.dof;
    WriteTextFile(ModelInfoPath(), info.dump(2) + "\n");
  }

  RobotModel LoadModel() const {
    if (!HasModel()) throw AssetError("no model in " + root_.string() + " (run preprocess)");
    std::string mesh_root;
    if (std::filesystem::exists(ModelInfoPath())) {
      try {
        mesh_root = nlohmann::json::parse(ReadTextFile(ModelInfoPath()))
                        .at("mesh_root")
                        .get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw AssetError("malformed " + ModelInfoPath().string() + ": " + e.what());
      }
    }
    return ParseUrdf(ReadTextFile(UrdfPath()), mesh_root);
  }

  // Replaces the whole shapes/ directory.
  void SaveShapes(const std::vector<LinkShapes>& shapes) const {
    std::filesystem::remove_all(ShapesDir());
    for (const auto& s : shapes) {
      WriteTextFile(ShapesPath(s.link_name), LinkShapesToJson(s).dump(1) + "\n");
    }
  }

  // One entry per link with geometry, in link order.
  std::vector<LinkShapes> LoadShapes(const RobotModel& model) const {
    std::vector<LinkShapes> out;
    for (std::size_t i = 0; i < model.links.size(); ++i) {
      const Link& link = model.links[i];
      if (!link.HasGeometry()) continue;
      const auto path = ShapesPath(link.name);
      if (!std::filesystem::exists(path)) {
        throw AssetError("link '" + link.name + "': missing " + path.string() +
                         " (run preprocess)");
      }
      nlohmann::ordered_json j;
      try {
        j = nlohmann::ordered_json::parse(ReadTextFile(path));
      } catch (const nlohmann::json::parse_error& e) {
        throw AssetError("link '" + link.name + "': " + e.what());
      }
      LinkShapes s = LinkShapesFromJson(j);
      if (s.link_name != link.name) {
        throw AssetError("shapes file " + path.string() + " names link '" + s.link_name + "'");
      }
      s.link_index = i;
      out.push_back(std::move(s));
    }
    return out;
  }

  void SaveStats(const StatsTable& stats) const {
    WriteTextFile(StatsPath(stats.shape_type), StatsTableToJson(stats).dump(1) + "\n");
  }

  StatsTable LoadStats(ShapeType type) const {
    const auto path = StatsPath(type);
    try {
      StatsTable s = StatsTableFromJson(nlohmann::ordered_json::parse(ReadTextFile(path)));
      if (s.shape_type != type) throw AssetError(path.string() + " holds another shape type");
      return s;
    } catch (const nlohmann::json::parse_error& e) {
      throw AssetError(path.string() + ": " + e.what());
    }
  }

  std::vector<std::filesystem::path> SaveMatrix(const SkipMatrix& m,
                                                std::span<const MatrixFormat> formats) const {
    std::vector<std::filesystem::path> written;
    for (const auto f : formats) {
      const auto path = MatrixPath(m.shape_type, f);
      WriteTextFile(path, ExportMatrix(m, f));
      written.push_back(path);
    }
    return written;
  }

  // JSON is the source of truth.
  SkipMatrix LoadMatrix(ShapeType type) const {
    const auto path = MatrixPath(type, MatrixFormat::kJson);
    SkipMatrix m = ImportMatrix(ReadTextFile(path), MatrixFormat::kJson);
    if (m.shape_type != type) throw AssetError(path.string() + " holds another shape type");
    return m;
  }

 private:
  std::filesystem::path root_;
};

inline constexpr std::array<MatrixFormat, 2> kBothFormats = {MatrixFormat::kJson,
                                                             MatrixFormat::kYaml};

}  // namespace scmat

#endif  // SCMAT_ASSET_DIR_HPP_
