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

#ifndef SCMAT_TYPES_HPP_
#define SCMAT_TYPES_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "scmat/math.hpp"

namespace scmat {

enum class ShapeType {
  kSphereLink,
  kObbLink,
  kHullLink,
  kSphereDecomp,
  kObbDecomp,
  kHullDecomp,
};

inline constexpr std::array<ShapeType, 6> kAllShapeTypes = {
    ShapeType::kSphereLink,   ShapeType::kObbLink,   ShapeType::kHullLink,
    ShapeType::kSphereDecomp, ShapeType::kObbDecomp, ShapeType::kHullDecomp,
};

// Names used in every file format and in the HTTP API.
inline constexpr std::string_view ToString(ShapeType type) {
  switch (type) {
    case ShapeType::kSphereLink:
      return "sphere_link";
    case ShapeType::kObbLink:
      return "obb_link";
    case ShapeType::kHullLink:
      return "hull_link";
    case ShapeType::kSphereDecomp:
      return "sphere_decomp";
    case ShapeType::kObbDecomp:
      return "obb_decomp";
    case ShapeType::kHullDecomp:
      return "hull_decomp";
  }
  return "";
}

inline std::optional<ShapeType> ParseShapeType(std::string_view name) {
  for (const auto t : kAllShapeTypes) {
    if (ToString(t) == name) return t;
  }
  return std::nullopt;
}

inline constexpr bool IsDecompositionLevel(ShapeType type) {
  return type == ShapeType::kSphereDecomp || type == ShapeType::kObbDecomp ||
         type == ShapeType::kHullDecomp;
}

// One slot of a shape index space. Slots are ordered by (link_index, part).
struct ShapeIndexEntry {
  std::size_t index = 0;
  std::string link_name;
  std::optional<std::size_t> part;

  friend bool operator==(const ShapeIndexEntry&, const ShapeIndexEntry&) = default;
};

// Live distance between shapes i < j at one configuration.
struct PairDistance {
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  std::optional<double> d_normalized;
  bool skipped = false;
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
};

enum class QueryMode { kCollision, kProximity };

}  // namespace scmat

#endif  // SCMAT_TYPES_HPP_
