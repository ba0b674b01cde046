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

// Distance and intersection between posed shapes, and skip-filtered queries
// over every shape pair of a robot state.

#ifndef SCMAT_PROXIMITY_HPP_
#define SCMAT_PROXIMITY_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "scmat/bounding.hpp"
#include "scmat/gjk.hpp"
#include "scmat/hull.hpp"
#include "scmat/matrix.hpp"
#include "scmat/model.hpp"
#include "scmat/shapes.hpp"
#include "scmat/stats.hpp"
#include "scmat/types.hpp"

namespace scmat {

class ProximityError : public Error {
 public:
  using Error::Error;
};

// Geometry is expressed in the owner link's frame. Polytopes are borrowed:
// the LinkShapes they come from must outlive the PosedShape.
using ShapeGeometry = std::variant<Sphere, Obb, const ConvexPolytope*>;

struct PosedShape {
  ShapeGeometry geometry;
  RigidTransform pose;  // link frame -> world
  std::size_t owner_link = 0;
  std::optional<std::size_t> owner_part;
};

struct PosedShapes {
  ShapeType type = ShapeType::kHullLink;
  std::vector<PosedShape> shapes;
};

struct DistanceResult {
  double distance = 0.0;
  bool intersecting = false;
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
  bool degraded = false;
};

namespace detail {

// A shape as a convex core plus a spherical margin.
struct CoreShape {
  enum class Kind { kPoint, kBox, kPolytope } kind = Kind::kPoint;
  Vec3 point = Vec3::Zero();
  WorldBox box{Vec3::Zero(), Mat3::Identity(), Vec3::Zero()};
  const ConvexPolytope* polytope = nullptr;
  const RigidTransform* pose = nullptr;
  double margin = 0.0;

  Vec3 Support(const Vec3& d) const {
    switch (kind) {
      case Kind::kPoint:
        return point;
      case Kind::kBox:
        return box.Support(d);
      case Kind::kPolytope: {
        const Vec3 local = pose->rotation.transpose() * d;
        const auto& verts = polytope->vertices;
        std::size_t best = 0;
        double best_dot = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < verts.size(); ++k) {
          const double dot = verts[k].dot(local);
          if (dot > best_dot) {
            best_dot = dot;
            best = k;
          }
        }
        return pose->Apply(verts[best]);
      }
    }
    return point;
  }

  Vec3 Center() const {
    switch (kind) {
      case Kind::kPoint:
        return point;
      case Kind::kBox:
        return box.center;
      case Kind::kPolytope:
        return pose->Apply(polytope->vertices.front());
    }
    return point;
  }
};

inline CoreShape MakeCore(const PosedShape& s) {
  CoreShape core;
  core.pose = &s.pose;
  if (const auto* sphere = std::get_if<Sphere>(&s.geometry)) {
    core.kind = CoreShape::Kind::kPoint;
    core.point = s.pose.Apply(sphere->center);
    core.margin = sphere->radius;
  } else if (const auto* obb = std::get_if<Obb>(&s.geometry)) {
    core.kind = CoreShape::Kind::kBox;
    core.box = {s.pose.Apply(obb->center), s.pose.rotation * obb->axes, obb->half_extents};
  } else {
    const ConvexPolytope* poly = std::get<const ConvexPolytope*>(s.geometry);
    if (poly == nullptr || poly->vertices.empty()) {
      throw ProximityError("posed polytope has no vertices");
    }
    core.kind = CoreShape::Kind::kPolytope;
    core.polytope = poly;
  }
  return core;
}

// Cores at distance `gap` >= 0 with closest points pa, pb and margins ma, mb.
inline DistanceResult InflateResult(const Vec3& pa, const Vec3& pb, double gap, double ma,
                                    double mb) {
  DistanceResult out;
  Vec3 n = pb - pa;
  const double len = n.norm();
  n = len > 0.0 ? Vec3(n / len) : Vec3(Vec3::UnitX());
  const double d = gap - ma - mb;
  if (d > 0.0) {
    out.distance = d;
    out.point_a = pa + ma * n;
    out.point_b = pb - mb * n;
    return out;
  }
  // A point inside both inflated cores along the segment.
  const double lo = std::max(-ma, gap - mb);
  const double hi = std::min(ma, gap + mb);
  const double t = std::clamp(0.5 * (gap + ma - mb), lo, hi);
  out.intersecting = true;
  out.point_a = out.point_b = pa + t * n;
  return out;
}

}  // namespace detail

// Sphere pairs are solved in closed form; every other pair runs GJK on the
// cores (sphere centers, boxes, hull vertices) and subtracts the margins.
// Penetrating pairs report distance 0 and a common point.
inline DistanceResult Distance(const PosedShape& a, const PosedShape& b) {
  const detail::CoreShape ca = detail::MakeCore(a);
  const detail::CoreShape cb = detail::MakeCore(b);
  if (ca.kind == detail::CoreShape::Kind::kPoint &&
      cb.kind == detail::CoreShape::Kind::kPoint) {
    return detail::InflateResult(ca.point, cb.point, (cb.point - ca.point).norm(),
                                 ca.margin, cb.margin);
  }
  const GjkResult g = GjkDistance([&](const Vec3& d) { return ca.Support(d); },
                                  [&](const Vec3& d) { return cb.Support(d); },
                                  cb.Center() - ca.Center());
  DistanceResult out;
  if (g.intersecting) {
    out.intersecting = true;
    out.point_a = out.point_b = g.point_a;
  } else {
    out = detail::InflateResult(g.point_a, g.point_b, g.distance, ca.margin, cb.margin);
  }
  out.degraded = g.degraded;
  return out;
}

// Boxes use the separating-axis test; everything else defers to Distance.
inline bool Intersects(const PosedShape& a, const PosedShape& b) {
  const auto* box_a = std::get_if<Obb>(&a.geometry);
  const auto* box_b = std::get_if<Obb>(&b.geometry);
  if (box_a != nullptr && box_b != nullptr) {
    return BoxesIntersect(
        {a.pose.Apply(box_a->center), a.pose.rotation * box_a->axes, box_a->half_extents},
        {b.pose.Apply(box_b->center), b.pose.rotation * box_b->axes, box_b->half_extents});
  }
  if (const auto* sa = std::get_if<Sphere>(&a.geometry)) {
    if (const auto* sb = std::get_if<Sphere>(&b.geometry)) {
      return (b.pose.Apply(sb->center) - a.pose.Apply(sa->center)).norm() <=
             sa->radius + sb->radius;
    }
  }
  return Distance(a, b).intersecting;
}

// Places every shape of `type` at the given link poses, in index-space order.
inline PosedShapes PoseShapesAt(const std::vector<RigidTransform>& link_poses,
                                const std::vector<LinkShapes>& shapes, ShapeType type) {
  PosedShapes out;
  out.type = type;
  for (const auto& link : shapes) {
    if (link.link_index >= link_poses.size()) {
      throw ProximityError("shapes reference link " + std::to_string(link.link_index) +
                           " beyond the model");
    }
    const RigidTransform& pose = link_poses[link.link_index];
    const auto add = [&](ShapeGeometry g, std::optional<std::size_t> part) {
      out.shapes.push_back({std::move(g), pose, link.link_index, part});
    };
    switch (type) {
      case ShapeType::kSphereLink:
        add(link.sphere_link, std::nullopt);
        break;
      case ShapeType::kObbLink:
        add(link.obb_link, std::nullopt);
        break;
      case ShapeType::kHullLink:
        add(&link.hull, std::nullopt);
        break;
      case ShapeType::kSphereDecomp:
        for (std::size_t p = 0; p < link.NumParts(); ++p) add(link.spheres_decomp[p], p);
        break;
      case ShapeType::kObbDecomp:
        for (std::size_t p = 0; p < link.NumParts(); ++p) add(link.obbs_decomp[p], p);
        break;
      case ShapeType::kHullDecomp:
        for (std::size_t p = 0; p < link.NumParts(); ++p) add(&link.decomposition[p], p);
        break;
    }
  }
  return out;
}

inline PosedShapes PoseShapes(const RobotModel& model, const std::vector<LinkShapes>& shapes,
                              ShapeType type, const Configuration& config) {
  return PoseShapesAt(ForwardKinematics(model, config), shapes, type);
}

// Pairs a query must evaluate: distinct owner links and not skipped.
using PairPlan = std::vector<std::pair<std::size_t, std::size_t>>;

inline void CheckIndexSpace(const PosedShapes& posed, const SkipMatrix& matrix) {
  if (posed.type != matrix.shape_type || posed.shapes.size() != matrix.num_shapes) {
    throw ProximityError("index space mismatch: shapes are " +
                         std::string(ToString(posed.type)) + " x" +
                         std::to_string(posed.shapes.size()) + ", matrix is " +
                         std::string(ToString(matrix.shape_type)) + " x" +
                         std::to_string(matrix.num_shapes));
  }
}

inline PairPlan ActivePairs(const PosedShapes& posed, const SkipMatrix& matrix,
                            bool include_skipped = false) {
  CheckIndexSpace(posed, matrix);
  PairPlan plan;
  const auto& s = posed.shapes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i].owner_link == s[j].owner_link) continue;
      if (!include_skipped && matrix.IsSkipped(i, j)) continue;
      plan.emplace_back(i, j);
    }
  }
  return plan;
}

struct CollisionQueryResult {
  bool colliding = false;
  std::size_t checks = 0;
};

// Stops at the first intersecting pair.
inline CollisionQueryResult QueryCollision(const PosedShapes& posed, const PairPlan& plan) {
  CollisionQueryResult out;
  for (const auto& [i, j] : plan) {
    ++out.checks;
    if (Intersects(posed.shapes[i], posed.shapes[j])) {
      out.colliding = true;
      break;
    }
  }
  return out;
}

inline CollisionQueryResult QueryCollision(const PosedShapes& posed,
                                           const SkipMatrix& matrix) {
  return QueryCollision(posed, ActivePairs(posed, matrix));
}

// Distances of every planned pair, ascending by d (ties by (i, j)).
inline std::vector<PairDistance> QueryProximity(const PosedShapes& posed,
                                                const PairPlan& plan,
                                                const SkipMatrix* matrix = nullptr,
                                                const StatsTable* stats = nullptr) {
  std::vector<PairDistance> out;
  out.reserve(plan.size());
  for (const auto& [i, j] : plan) {
    const DistanceResult r = Distance(posed.shapes[i], posed.shapes[j]);
    PairDistance pd;
    pd.i = i;
    pd.j = j;
    pd.d = r.distance;
    pd.point_a = r.point_a;
    pd.point_b = r.point_b;
    pd.skipped = matrix != nullptr && matrix->IsSkipped(i, j);
    if (stats != nullptr) {
      const PairStats* s = stats->Find(i, j);
      if (s != nullptr && s->samples > 0 && s->d_mean() > 0.0) pd.d_normalized = pd.d / s->d_mean();
    }
    out.push_back(pd);
  }
  std::sort(out.begin(), out.end(), [](const PairDistance& a, const PairDistance& b) {
    if (a.d != b.d) return a.d < b.d;
    return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
  });
  return out;
}

// Skipped pairs are left out unless `include_skipped` is set, in which case
// they are evaluated and flagged.
inline std::vector<PairDistance> QueryProximity(const PosedShapes& posed,
                                                const SkipMatrix& matrix,
                                                const StatsTable* stats = nullptr,
                                                bool include_skipped = false) {
  if (stats != nullptr &&
      (stats->shape_type != posed.type || stats->num_shapes != posed.shapes.size())) {
    throw ProximityError("stats do not match the shape index space");
  }
  return QueryProximity(posed, ActivePairs(posed, matrix, include_skipped), &matrix, stats);
}

struct QueryResult {
  QueryMode mode = QueryMode::kProximity;
  bool any_collision = false;
  std::size_t checks = 0;
  std::vector<PairDistance> pairs;  // proximity mode only
};

inline QueryResult QueryAllPairs(const PosedShapes& posed, const SkipMatrix& matrix,
                                 const StatsTable* stats, QueryMode mode,
                                 bool include_skipped = false) {
  QueryResult out;
  out.mode = mode;
  if (mode == QueryMode::kCollision) {
    const auto r = QueryCollision(posed, matrix);
    out.any_collision = r.colliding;
    out.checks = r.checks;
  } else {
    out.pairs = QueryProximity(posed, matrix, stats, include_skipped);
    out.checks = out.pairs.size();
    out.any_collision =
        std::any_of(out.pairs.begin(), out.pairs.end(),
                    [](const PairDistance& p) { return !p.skipped && p.d == 0.0; });
  }
  return out;
}

}  // namespace scmat

#endif  // SCMAT_PROXIMITY_HPP_
