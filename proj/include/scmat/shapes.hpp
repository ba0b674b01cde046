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

// The six per-link shape representations and their on-disk form.

#ifndef SCMAT_SHAPES_HPP_
#define SCMAT_SHAPES_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmat/bounding.hpp"
#include "scmat/decomposition.hpp"
#include "scmat/hull.hpp"
#include "scmat/mesh.hpp"
#include "scmat/model.hpp"
#include "scmat/types.hpp"

namespace scmat {

struct LinkShapes {
  std::size_t link_index = 0;
  std::string link_name;
  ConvexPolytope hull;
  std::vector<ConvexPolytope> decomposition;
  Sphere sphere_link;
  Obb obb_link;
  std::vector<Sphere> spheres_decomp;
  std::vector<Obb> obbs_decomp;

  std::size_t NumParts() const { return decomposition.size(); }
};

// All six representations of one link's mesh (vertices in the link frame).
// Bounding volumes are fit to hull vertices, which bound the same region as
// the full vertex set.
inline LinkShapes BuildLinkRepresentations(const TriangleMesh& mesh,
                                           std::size_t link_index,
                                           const DecompositionParams& params = {},
                                           Diagnostics* diag = nullptr) {
  if (mesh.vertices.empty()) throw GeometryError("cannot build shapes from an empty mesh");
  LinkShapes out;
  out.link_index = link_index;
  out.hull = ConvexHull(mesh.vertices, diag);
  out.decomposition = ConvexDecomposition(mesh, params, diag);
  out.sphere_link = BoundingSphere(out.hull.vertices);
  out.obb_link = OrientedBoundingBox(out.hull.vertices);
  for (const auto& part : out.decomposition) {
    out.spheres_decomp.push_back(BoundingSphere(part.vertices));
    out.obbs_decomp.push_back(OrientedBoundingBox(part.vertices));
  }
  return out;
}

// Loads every link's geometry and builds its shapes. Links without geometry
// get no entry. Result is ordered by link index.
inline std::vector<LinkShapes> BuildRobotShapes(const RobotModel& model,
                                                const DecompositionParams& params = {},
                                                Diagnostics* diag = nullptr) {
  std::vector<LinkShapes> out;
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const Link& link = model.links[i];
    if (!link.HasGeometry()) continue;
    Diagnostics local;
    const TriangleMesh mesh = LoadLinkMesh(link, &local);
    LinkShapes shapes = BuildLinkRepresentations(mesh, i, params, &local);
    shapes.link_name = link.name;
    if (diag != nullptr) {
      for (auto& w : local.warnings) diag->Warn("link '" + link.name + "': " + w);
    }
    out.push_back(std::move(shapes));
  }
  return out;
}

// Shape index space of `type`: one slot per link (link-level types) or per
// decomposition part (decomposition-level types), ordered by (link, part).
inline std::vector<ShapeIndexEntry> ShapeIndexSpace(
    const std::vector<LinkShapes>& shapes, ShapeType type) {
  std::vector<ShapeIndexEntry> out;
  for (const auto& link : shapes) {
    if (IsDecompositionLevel(type)) {
      for (std::size_t p = 0; p < link.NumParts(); ++p) {
        out.push_back({out.size(), link.link_name, p});
      }
    } else {
      out.push_back({out.size(), link.link_name, std::nullopt});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON form, one file per link under shapes/.

namespace detail {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson ToJson(const Vec3& v) { return OrderedJson::array({v.x(), v.y(), v.z()}); }

inline Vec3 Vec3FromJson(const nlohmann::ordered_json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline OrderedJson ToJson(const ConvexPolytope& p) {
  OrderedJson vertices = OrderedJson::array();
  for (const auto& v : p.vertices) vertices.push_back(ToJson(v));
  OrderedJson faces = OrderedJson::array();
  for (const auto& f : p.faces) faces.push_back(f);
  OrderedJson out;
  out["vertices"] = std::move(vertices);
  out["faces"] = std::move(faces);
  return out;
}

inline ConvexPolytope PolytopeFromJson(const OrderedJson& j) {
  ConvexPolytope p;
  for (const auto& v : j.at("vertices")) p.vertices.push_back(Vec3FromJson(v));
  for (const auto& f : j.at("faces")) {
    auto face = f.get<std::vector<std::uint32_t>>();
    for (const auto idx : face) {
      if (idx >= p.vertices.size()) throw Error("polytope face index out of range");
    }
    p.faces.push_back(std::move(face));
  }
  return p;
}

inline OrderedJson ToJson(const Sphere& s) {
  OrderedJson out;
  out["center"] = ToJson(s.center);
  out["radius"] = s.radius;
  return out;
}

inline Sphere SphereFromJson(const OrderedJson& j) {
  return {Vec3FromJson(j.at("center")), j.at("radius").get<double>()};
}

// Axes are stored as three column vectors.
inline OrderedJson ToJson(const Obb& b) {
  OrderedJson out;
  out["center"] = ToJson(b.center);
  out["axes"] = OrderedJson::array(
      {ToJson(b.axes.col(0)), ToJson(b.axes.col(1)), ToJson(b.axes.col(2))});
  out["half_extents"] = ToJson(b.half_extents);
  return out;
}

inline Obb ObbFromJson(const OrderedJson& j) {
  Obb b;
  b.center = Vec3FromJson(j.at("center"));
  const auto& axes = j.at("axes");
  if (!axes.is_array() || axes.size() != 3) throw Error("OBB needs three axes");
  for (int k = 0; k < 3; ++k) b.axes.col(k) = Vec3FromJson(axes[k]);
  b.half_extents = Vec3FromJson(j.at("half_extents"));
  return b;
}

}  // namespace detail

inline nlohmann::ordered_json LinkShapesToJson(const LinkShapes& s) {
  using detail::OrderedJson;
  using detail::ToJson;
  OrderedJson out;
  out["format_version"] = 1;
  out["link_index"] = s.link_index;
  out["link_name"] = s.link_name;
  out["hull"] = ToJson(s.hull);
  out["decomposition"] = OrderedJson::array();
  for (const auto& p : s.decomposition) out["decomposition"].push_back(ToJson(p));
  out["sphere_link"] = ToJson(s.sphere_link);
  out["obb_link"] = ToJson(s.obb_link);
  out["spheres_decomp"] = OrderedJson::array();
  for (const auto& p : s.spheres_decomp) out["spheres_decomp"].push_back(ToJson(p));
  out["obbs_decomp"] = OrderedJson::array();
  for (const auto& p : s.obbs_decomp) out["obbs_decomp"].push_back(ToJson(p));
  return out;
}

inline LinkShapes LinkShapesFromJson(const nlohmann::ordered_json& j) {
  LinkShapes s;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw GeometryError("unsupported shapes format_version");
    }
    s.link_index = j.at("link_index").get<std::size_t>();
    s.link_name = j.at("link_name").get<std::string>();
    s.hull = detail::PolytopeFromJson(j.at("hull"));
    for (const auto& p : j.at("decomposition")) {
      s.decomposition.push_back(detail::PolytopeFromJson(p));
    }
    s.sphere_link = detail::SphereFromJson(j.at("sphere_link"));
    s.obb_link = detail::ObbFromJson(j.at("obb_link"));
    for (const auto& p : j.at("spheres_decomp")) {
      s.spheres_decomp.push_back(detail::SphereFromJson(p));
    }
    for (const auto& p : j.at("obbs_decomp")) {
      s.obbs_decomp.push_back(detail::ObbFromJson(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("malformed shapes file: ") + e.what());
  }
  if (s.decomposition.empty() || s.spheres_decomp.size() != s.decomposition.size() ||
      s.obbs_decomp.size() != s.decomposition.size()) {
    throw GeometryError("shapes file for '" + s.link_name +
                        "' has inconsistent decomposition lengths");
  }
  return s;
}

}  // namespace scmat

#endif  // SCMAT_SHAPES_HPP_
