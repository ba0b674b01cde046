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

// Per-pair distance statistics over sampled configurations.

#ifndef SCMAT_STATS_HPP_
#define SCMAT_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "json.hpp"
#include "scmat/types.hpp"

namespace scmat {

class StatsError : public Error {
 public:
  using Error::Error;
};

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void Merge(const CompensatedSum& other) {
    Add(other.sum_);
    Add(other.comp_);
  }

  double Value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct PairStats {
  std::size_t i = 0;
  std::size_t j = 0;
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -std::numeric_limits<double>::infinity();
  CompensatedSum d_sum;
  std::uint64_t collisions = 0;
  std::uint64_t samples = 0;

  // Set when loaded from disk, where only the mean is stored.
  std::optional<double> stored_mean;

  double d_mean() const {
    if (stored_mean) return *stored_mean;
    return samples == 0 ? 0.0 : d_sum.Value() / static_cast<double>(samples);
  }

  double collision_fraction() const {
    return samples == 0 ? 0.0
                        : static_cast<double>(collisions) / static_cast<double>(samples);
  }

  void Add(double d) {
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
    d_sum.Add(d);
    if (d == 0.0) ++collisions;
    ++samples;
  }

  void Merge(const PairStats& other) {
    d_min = std::min(d_min, other.d_min);
    d_max = std::max(d_max, other.d_max);
    d_sum.Merge(other.d_sum);
    collisions += other.collisions;
    samples += other.samples;
  }
};

struct StatsTable {
  ShapeType shape_type = ShapeType::kHullLink;
  std::string robot_name;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::size_t num_shapes = 0;
  std::map<std::pair<std::size_t, std::size_t>, PairStats> entries;

  const PairStats* Find(std::size_t i, std::size_t j) const {
    const auto it = entries.find({std::min(i, j), std::max(i, j)});
    return it == entries.end() ? nullptr : &it->second;
  }
};

// Folds one sample's pair distances (computed without skips) into `stats`.
inline void Accumulate(StatsTable& stats, ShapeType shape_type, std::size_t num_shapes,
                       std::span<const PairDistance> pair_distances) {
  if (shape_type != stats.shape_type) {
    throw StatsError("shape type mismatch: table is " +
                     std::string(ToString(stats.shape_type)) + ", sample is " +
                     std::string(ToString(shape_type)));
  }
  if (num_shapes != stats.num_shapes) {
    throw StatsError("shape count mismatch: table has " +
                     std::to_string(stats.num_shapes) + ", sample has " +
                     std::to_string(num_shapes));
  }
  for (const auto& pd : pair_distances) {
    if (!(pd.i < pd.j && pd.j < stats.num_shapes)) {
      throw StatsError("pair (" + std::to_string(pd.i) + "," + std::to_string(pd.j) +
                       ") outside the shape index space");
    }
    auto [it, inserted] = stats.entries.try_emplace({pd.i, pd.j});
    if (inserted) {
      it->second.i = pd.i;
      it->second.j = pd.j;
    }
    it->second.Add(pd.d);
  }
  ++stats.samples;
}

// Combines tables built from disjoint sample sets.
inline void MergeInto(StatsTable& into, const StatsTable& other) {
  if (into.shape_type != other.shape_type || into.num_shapes != other.num_shapes) {
    throw StatsError("cannot merge stats over different shape index spaces");
  }
  for (const auto& [key, entry] : other.entries) {
    auto [it, inserted] = into.entries.try_emplace(key, entry);
    if (!inserted) it->second.Merge(entry);
  }
  into.samples += other.samples;
}

inline nlohmann::ordered_json StatsTableToJson(const StatsTable& stats) {
  nlohmann::ordered_json out;
  out["format_version"] = 1;
  out["robot_name"] = stats.robot_name;
  out["shape_type"] = std::string(ToString(stats.shape_type));
  out["seed"] = stats.seed;
  out["samples"] = stats.samples;
  out["num_shapes"] = stats.num_shapes;
  out["entries"] = nlohmann::ordered_json::array();
  for (const auto& [key, e] : stats.entries) {
    nlohmann::ordered_json row;
    row["i"] = e.i;
    row["j"] = e.j;
    row["d_min"] = e.d_min;
    row["d_max"] = e.d_max;
    row["d_mean"] = e.d_mean();
    row["collision_fraction"] = e.collision_fraction();
    row["collisions"] = e.collisions;
    row["samples"] = e.samples;
    out["entries"].push_back(std::move(row));
  }
  return out;
}

inline StatsTable StatsTableFromJson(const nlohmann::ordered_json& j) {
  StatsTable stats;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw StatsError("unsupported stats format_version");
    }
    stats.robot_name = j.at("robot_name").get<std::string>();
    const auto type = ParseShapeType(j.at("shape_type").get<std::string>());
    if (!type) throw StatsError("unknown shape_type in stats file");
    stats.shape_type = *type;
    stats.seed = j.at("seed").get<std::uint64_t>();
    stats.samples = j.at("samples").get<std::uint64_t>();
    stats.num_shapes = j.at("num_shapes").get<std::size_t>();
    for (const auto& row : j.at("entries")) {
      PairStats e;
      e.i = row.at("i").get<std::size_t>();
      e.j = row.at("j").get<std::size_t>();
      if (!(e.i < e.j && e.j < stats.num_shapes)) {
        throw StatsError("stats entry outside the shape index space");
      }
      e.d_min = row.at("d_min").get<double>();
      e.d_max = row.at("d_max").get<double>();
      e.stored_mean = row.at("d_mean").get<double>();
      e.collisions = row.at("collisions").get<std::uint64_t>();
      e.samples = row.at("samples").get<std::uint64_t>();
      if (!stats.entries.emplace(std::make_pair(e.i, e.j), e).second) {
        throw StatsError("duplicate stats entry");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw StatsError(std::string("malformed stats file: ") + e.what());
  }
  return stats;
}

}  // namespace scmat

#endif  // SCMAT_STATS_HPP_
