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

// Self-collision matrices: which shape pairs may be skipped, and why.
//
// Canonical JSON layout (compact, fixed key order, skips sorted by (i, j)):
//
//   {"format_version":1,"robot_name":"r","shape_type":"hull_link",
//    "num_shapes":2,"shape_index_map":[{"index":0,"link_name":"a","part":null},
//    {"index":1,"link_name":"b","part":null}],
//    "skips":[{"i":0,"j":1,"reason":"adjacent"}]}
//
// Imported entries additionally carry "annotation" with the source reason.
// The YAML form mirrors the same keys one to one.

#ifndef SCMAT_MATRIX_HPP_
#define SCMAT_MATRIX_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "scmat/model.hpp"
#include "scmat/stats.hpp"
#include "scmat/types.hpp"

namespace scmat {

class MatrixError : public Error {
 public:
  using Error::Error;
};

enum class SkipReason {
  kNeverInCollision,
  kAlwaysInCollision,
  kAdjacent,
  kUserMarked,
  kImported,
};

inline constexpr std::array<SkipReason, 5> kAllSkipReasons = {
    SkipReason::kNeverInCollision, SkipReason::kAlwaysInCollision,
    SkipReason::kAdjacent, SkipReason::kUserMarked, SkipReason::kImported};

inline constexpr std::string_view ToString(SkipReason reason) {
  switch (reason) {
    case SkipReason::kNeverInCollision:
      return "never_in_collision";
    case SkipReason::kAlwaysInCollision:
      return "always_in_collision";
    case SkipReason::kAdjacent:
      return "adjacent";
    case SkipReason::kUserMarked:
      return "user_marked";
    case SkipReason::kImported:
      return "imported";
  }
  return "";
}

inline std::optional<SkipReason> ParseSkipReason(std::string_view name) {
  for (const auto r : kAllSkipReasons) {
    if (ToString(r) == name) return r;
  }
  return std::nullopt;
}

struct SkipEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  SkipReason reason = SkipReason::kUserMarked;
  std::optional<std::string> annotation;

  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

struct SkipMatrix {
  int format_version = 1;
  std::string robot_name;
  ShapeType shape_type = ShapeType::kHullLink;
  std::size_t num_shapes = 0;
  std::vector<ShapeIndexEntry> shape_index_map;
  std::vector<SkipEntry> skips;  // sorted by (i, j), i < j

  friend bool operator==(const SkipMatrix&, const SkipMatrix&) = default;

  const SkipEntry* Find(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const auto it = std::lower_bound(
        skips.begin(), skips.end(), std::make_pair(i, j),
        [](const SkipEntry& e, const std::pair<std::size_t, std::size_t>& key) {
          return std::make_pair(e.i, e.j) < key;
        });
    if (it == skips.end() || it->i != i || it->j != j) return nullptr;
    return &*it;
  }

  bool IsSkipped(std::size_t i, std::size_t j) const { return Find(i, j) != nullptr; }

  // Shapes on the same link are never checked and never stored.
  bool SameLink(std::size_t i, std::size_t j) const {
    return shape_index_map.at(i).link_name == shape_index_map.at(j).link_name;
  }

  std::map<SkipReason, std::size_t> CountsByReason() const {
    std::map<SkipReason, std::size_t> counts;
    for (const auto r : kAllSkipReasons) counts[r] = 0;
    for (const auto& e : skips) ++counts[e.reason];
    return counts;
  }

  // Pairs of distinct links, i.e. the pairs a matrix can talk about.
  std::size_t NumCandidatePairs() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < num_shapes; ++i) {
      for (std::size_t j = i + 1; j < num_shapes; ++j) {
        if (!SameLink(i, j)) ++n;
      }
    }
    return n;
  }

  void Normalize() {
    std::sort(skips.begin(), skips.end(), [](const SkipEntry& a, const SkipEntry& b) {
      return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
    });
  }
};

inline SkipMatrix EmptyMatrix(std::string robot_name, ShapeType type,
                              std::vector<ShapeIndexEntry> index_map) {
  SkipMatrix m;
  m.robot_name = std::move(robot_name);
  m.shape_type = type;
  m.num_shapes = index_map.size();
  m.shape_index_map = std::move(index_map);
  return m;
}

// Link-level index space derived from the model alone: every link with
// geometry, in link order.
inline std::vector<ShapeIndexEntry> LinkLevelIndexSpace(const RobotModel& model) {
  std::vector<ShapeIndexEntry> out;
  for (const auto& link : model.links) {
    if (link.HasGeometry()) out.push_back({out.size(), link.name, std::nullopt});
  }
  return out;
}

struct InferenceThresholds {
  double always_fraction = 0.99;
  double never_margin = 0.0;  // m

  void Validate() const {
    if (!(always_fraction > 0.0 && always_fraction <= 1.0)) {
      throw MatrixError("always_fraction must lie in (0, 1]");
    }
    if (!(never_margin >= 0.0)) throw MatrixError("never_margin must be >= 0");
  }
};

// Classifies every pair of `stats`. Reason precedence: adjacent, then
// always_in_collision (fraction >= always_fraction), then never_in_collision
// (no collision and d_min >= never_margin). User-marked and imported entries
// of `previous` are carried over unchanged.
inline SkipMatrix InferSkips(const StatsTable& stats, const RobotModel& model,
                             const std::vector<ShapeIndexEntry>& index_map,
                             const InferenceThresholds& thresholds,
                             const SkipMatrix* previous = nullptr) {
  thresholds.Validate();
  if (index_map.size() != stats.num_shapes) {
    throw MatrixError("stats cover " + std::to_string(stats.num_shapes) +
                      " shapes but the index space has " +
                      std::to_string(index_map.size()));
  }
  std::vector<std::size_t> owner(index_map.size());
  for (std::size_t k = 0; k < index_map.size(); ++k) {
    const auto link = model.FindLink(index_map[k].link_name);
    if (!link) {
      throw MatrixError("shape " + std::to_string(k) + " names unknown link '" +
                        index_map[k].link_name + "'");
    }
    owner[k] = *link;
  }
  if (previous != nullptr && (previous->shape_type != stats.shape_type ||
                              previous->num_shapes != stats.num_shapes)) {
    throw MatrixError("previous matrix has a different shape index space");
  }
  const auto adjacent = AdjacentLinkPairs(model);

  SkipMatrix m = EmptyMatrix(stats.robot_name.empty() ? model.name : stats.robot_name,
                             stats.shape_type, index_map);
  for (std::size_t i = 0; i < m.num_shapes; ++i) {
    for (std::size_t j = i + 1; j < m.num_shapes; ++j) {
      if (owner[i] == owner[j]) continue;
      if (previous != nullptr) {
        const SkipEntry* kept = previous->Find(i, j);
        if (kept != nullptr && (kept->reason == SkipReason::kUserMarked ||
                                kept->reason == SkipReason::kImported)) {
          m.skips.push_back(*kept);
          continue;
        }
      }
      const LinkPair links{std::min(owner[i], owner[j]), std::max(owner[i], owner[j])};
      if (adjacent.contains(links)) {
        m.skips.push_back({i, j, SkipReason::kAdjacent, std::nullopt});
        continue;
      }
      const PairStats* s = stats.Find(i, j);
      if (s == nullptr || s->samples == 0) continue;
      if (s->collision_fraction() >= thresholds.always_fraction) {
        m.skips.push_back({i, j, SkipReason::kAlwaysInCollision, std::nullopt});
      } else if (s->collisions == 0 && s->d_min >= thresholds.never_margin) {
        m.skips.push_back({i, j, SkipReason::kNeverInCollision, std::nullopt});
      }
    }
  }
  return m;
}

// Marks (on) or clears (off) pair {i, j}. Marking keeps an existing reason;
// clearing removes the entry whatever its reason.
inline SkipMatrix SetSkip(const SkipMatrix& matrix, std::size_t i, std::size_t j,
                          bool on) {
  if (i >= matrix.num_shapes || j >= matrix.num_shapes) {
    throw MatrixError("shape index out of range");
  }
  if (i == j) throw MatrixError("degenerate pair (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
  if (matrix.SameLink(i, j)) {
    throw MatrixError("shapes " + std::to_string(i) + " and " + std::to_string(j) +
                      " belong to the same link");
  }
  if (i > j) std::swap(i, j);
  SkipMatrix out = matrix;
  const bool present = out.IsSkipped(i, j);
  if (on && !present) {
    out.skips.push_back({i, j, SkipReason::kUserMarked, std::nullopt});
    out.Normalize();
  } else if (!on && present) {
    std::erase_if(out.skips, [&](const SkipEntry& e) { return e.i == i && e.j == j; });
  }
  return out;
}

enum class BulkMode { kRaw, kNormalized };

inline std::optional<BulkMode> ParseBulkMode(std::string_view name) {
  if (name == "raw") return BulkMode::kRaw;
  if (name == "normalized") return BulkMode::kNormalized;
  return std::nullopt;
}

// Skips every active pair whose raw distance (or d / d_mean) is strictly
// below `threshold`. Pairs without a normalized distance are left alone in
// normalized mode.
inline SkipMatrix ApplyBulkRule(const SkipMatrix& matrix,
                                std::span<const PairDistance> live, BulkMode mode,
                                double threshold) {
  if (!(threshold >= 0.0)) throw MatrixError("bulk threshold must be >= 0");
  SkipMatrix out = matrix;
  for (const auto& pd : live) {
    if (pd.i >= matrix.num_shapes || pd.j >= matrix.num_shapes || pd.i == pd.j) {
      throw MatrixError("live pair outside the matrix index space");
    }
    if (matrix.IsSkipped(pd.i, pd.j) || matrix.SameLink(pd.i, pd.j)) continue;
    double value = pd.d;
    if (mode == BulkMode::kNormalized) {
      if (!pd.d_normalized) continue;
      value = *pd.d_normalized;
    }
    if (value < threshold) {
      out.skips.push_back({std::min(pd.i, pd.j), std::max(pd.i, pd.j),
                           SkipReason::kUserMarked, std::nullopt});
    }
  }
  out.Normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Serialization.

enum class MatrixFormat { kJson, kYaml };

inline std::optional<MatrixFormat> ParseMatrixFormat(std::string_view name) {
  if (name == "json") return MatrixFormat::kJson;
  if (name == "yaml") return MatrixFormat::kYaml;
  return std::nullopt;
}

inline std::string_view Extension(MatrixFormat format) {
  return format == MatrixFormat::kJson ? "json" : "yaml";
}

inline nlohmann::ordered_json MatrixToJson(const SkipMatrix& m) {
  nlohmann::ordered_json out;
  out["format_version"] = m.format_version;
  out["robot_name"] = m.robot_name;
  out["shape_type"] = std::string(ToString(m.shape_type));
  out["num_shapes"] = m.num_shapes;
  out["shape_index_map"] = nlohmann::ordered_json::array();
  for (const auto& e : m.shape_index_map) {
    nlohmann::ordered_json row;
    row["index"] = e.index;
    row["link_name"] = e.link_name;
    row["part"] = e.part ? nlohmann::ordered_json(*e.part) : nlohmann::ordered_json();
    out["shape_index_map"].push_back(std::move(row));
  }
  out["skips"] = nlohmann::ordered_json::array();
  for (const auto& s : m.skips) {
    nlohmann::ordered_json row;
    row["i"] = s.i;
    row["j"] = s.j;
    row["reason"] = std::string(ToString(s.reason));
    if (s.annotation) row["annotation"] = *s.annotation;
    out["skips"].push_back(std::move(row));
  }
  return out;
}

namespace detail {

inline std::string QuoteString(const std::string& s) {
  return nlohmann::json(s).dump();
}

inline std::string MatrixToYaml(const SkipMatrix& m) {
  std::ostringstream out;
  out << "format_version: " << m.format_version << "\n";
  out << "robot_name: " << QuoteString(m.robot_name) << "\n";
  out << "shape_type: " << QuoteString(std::string(ToString(m.shape_type))) << "\n";
  out << "num_shapes: " << m.num_shapes << "\n";
  if (m.shape_index_map.empty()) {
    out << "shape_index_map: []\n";
  } else {
    out << "shape_index_map:\n";
    for (const auto& e : m.shape_index_map) {
      out << "  - index: " << e.index << "\n";
      out << "    link_name: " << QuoteString(e.link_name) << "\n";
      out << "    part: " << (e.part ? std::to_string(*e.part) : "null") << "\n";
    }
  }
  if (m.skips.empty()) {
    out << "skips: []\n";
  } else {
    out << "skips:\n";
    for (const auto& s : m.skips) {
      out << "  - i: " << s.i << "\n";
      out << "    j: " << s.j << "\n";
      out << "    reason: " << QuoteString(std::string(ToString(s.reason))) << "\n";
      if (s.annotation) out << "    annotation: " << QuoteString(*s.annotation) << "\n";
    }
  }
  return out.str();
}

// Quoted scalars stay strings; plain scalars are typed the YAML 1.2 core way.
inline nlohmann::ordered_json YamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto out = nlohmann::ordered_json::array();
      for (const auto& child : node) out.push_back(YamlToJson(child));
      return out;
    }
    case YAML::NodeType::Map: {
      auto out = nlohmann::ordered_json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = YamlToJson(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar: {
      const std::string text = node.Scalar();
      if (node.Tag() == "!") return text;
      if (text == "null" || text == "~" || text.empty()) return nullptr;
      if (text == "true") return true;
      if (text == "false") return false;
      try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
      } catch (const std::exception&) {
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
      } catch (const std::exception&) {
      }
      return text;
    }
  }
  return nullptr;
}

inline std::size_t RequireIndex(const nlohmann::ordered_json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw MatrixError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace detail

// Validates and converts a parsed document. Rejects unknown versions,
// indices outside the declared range, i == j, duplicates and same-link pairs.
inline SkipMatrix MatrixFromJson(const nlohmann::ordered_json& j) {
  SkipMatrix m;
  try {
    if (!j.is_object()) throw MatrixError("matrix document must be an object");
    const auto& version = j.at("format_version");
    if (!version.is_number_integer() || version.get<int>() != 1) {
      throw MatrixError("unknown format_version " + version.dump());
    }
    m.format_version = 1;
    m.robot_name = j.at("robot_name").get<std::string>();
    const auto type = ParseShapeType(j.at("shape_type").get<std::string>());
    if (!type) throw MatrixError("unknown shape_type " + j.at("shape_type").dump());
    m.shape_type = *type;
    m.num_shapes = detail::RequireIndex(j, "num_shapes");
    const auto& index_map = j.at("shape_index_map");
    if (!index_map.is_array() || index_map.size() != m.num_shapes) {
      throw MatrixError("shape_index_map must list exactly num_shapes entries");
    }
    for (const auto& row : index_map) {
      ShapeIndexEntry e;
      e.index = detail::RequireIndex(row, "index");
      if (e.index != m.shape_index_map.size()) {
        throw MatrixError("shape_index_map indices must be dense and ordered");
      }
      e.link_name = row.at("link_name").get<std::string>();
      if (!row.at("part").is_null()) e.part = detail::RequireIndex(row, "part");
      if (IsDecompositionLevel(m.shape_type) != e.part.has_value()) {
        throw MatrixError("shape " + std::to_string(e.index) +
                          ": part must be set exactly for decomposition-level types");
      }
      m.shape_index_map.push_back(std::move(e));
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& row : j.at("skips")) {
      SkipEntry s;
      s.i = detail::RequireIndex(row, "i");
      s.j = detail::RequireIndex(row, "j");
      if (s.i >= m.num_shapes || s.j >= m.num_shapes) {
        throw MatrixError("skip (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                          ") index out of declared range " +
                          std::to_string(m.num_shapes));
      }
      if (s.i == s.j) {
        throw MatrixError("degenerate pair (" + std::to_string(s.i) + "," +
                          std::to_string(s.j) + ")");
      }
      if (s.i > s.j) std::swap(s.i, s.j);
      if (m.SameLink(s.i, s.j)) {
        throw MatrixError("skip (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                          ") pairs shapes of the same link");
      }
      if (!seen.emplace(s.i, s.j).second) {
        throw MatrixError("duplicate entry (" + std::to_string(s.i) + "," +
                          std::to_string(s.j) + ")");
      }
      const auto reason = ParseSkipReason(row.at("reason").get<std::string>());
      if (!reason) throw MatrixError("unknown skip reason " + row.at("reason").dump());
      s.reason = *reason;
      if (row.contains("annotation")) s.annotation = row["annotation"].get<std::string>();
      m.skips.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MatrixError(std::string("malformed matrix: ") + e.what());
  }
  m.Normalize();
  return m;
}

inline std::string ExportMatrix(const SkipMatrix& m, MatrixFormat format) {
  if (format == MatrixFormat::kJson) return MatrixToJson(m).dump();
  return detail::MatrixToYaml(m);
}

inline SkipMatrix ImportMatrix(std::string_view bytes, MatrixFormat format) {
  nlohmann::ordered_json doc;
  if (format == MatrixFormat::kJson) {
    try {
      doc = nlohmann::ordered_json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
      throw MatrixError(std::string("malformed JSON: ") + e.what());
    }
  } else {
    try {
      doc = detail::YamlToJson(YAML::Load(std::string(bytes)));
    } catch (const YAML::Exception& e) {
      throw MatrixError(std::string("malformed YAML: ") + e.what());
    }
  }
  return MatrixFromJson(doc);
}

// ---------------------------------------------------------------------------
// MoveIt SRDF import.

struct SrdfImport {
  SkipMatrix matrix;
  std::vector<std::string> warnings;
  std::size_t imported = 0;
};

// Converts the <disable_collisions> entries of an SRDF into a hull_link
// matrix. Entries naming unknown links (or links without geometry) are
// dropped with a warning. Throws MatrixError on malformed XML.
inline SrdfImport ImportMoveItSrdf(const std::string& srdf_xml, const RobotModel& model) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in(srdf_xml);
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw MatrixError(std::string("malformed SRDF XML: ") + e.what());
  }
  SrdfImport out;
  out.matrix = EmptyMatrix(model.name, ShapeType::kHullLink, LinkLevelIndexSpace(model));
  std::map<std::string, std::size_t> slot;
  for (const auto& e : out.matrix.shape_index_map) slot[e.link_name] = e.index;

  const auto robot = doc.get_child_optional("robot");
  if (!robot) return out;
  for (const auto& [tag, node] : *robot) {
    if (tag != "disable_collisions") continue;
    const auto a = node.get<std::string>("<xmlattr>.link1", "");
    const auto b = node.get<std::string>("<xmlattr>.link2", "");
    const auto reason = node.get<std::string>("<xmlattr>.reason", "");
    const auto ia = slot.find(a);
    const auto ib = slot.find(b);
    if (ia == slot.end() || ib == slot.end()) {
      const std::string& missing = ia == slot.end() ? a : b;
      out.warnings.push_back("disable_collisions (" + a + ", " + b + "): link '" +
                             missing + "' is unknown or has no geometry; skipped");
      continue;
    }
    if (ia->second == ib->second) {
      out.warnings.push_back("disable_collisions (" + a + ", " + b +
                             "): same link; skipped");
      continue;
    }
    const std::size_t i = std::min(ia->second, ib->second);
    const std::size_t j = std::max(ia->second, ib->second);
    if (out.matrix.IsSkipped(i, j)) {
      out.warnings.push_back("disable_collisions (" + a + ", " + b + "): duplicate");
      continue;
    }
    out.matrix.skips.push_back({i, j, SkipReason::kImported, reason});
    out.matrix.Normalize();
    ++out.imported;
  }
  return out;
}

}  // namespace scmat

#endif  // SCMAT_MATRIX_HPP_
