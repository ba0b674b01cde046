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

// Approximate convex decomposition by recursive plane splitting.
//
// A part's concavity is the larger of two depths below its convex hull: the
// deepest surface vertex, and the longest inward ray from a sample point on a
// hull face to where it enters the mesh through a front-facing triangle. The
// most concave part is cut by a plane through its deepest point; candidate
// normals are the world axes and the part's principal axes, and the cut that
// minimizes the larger child concavity wins. Cutting stops once every part is
// within the tolerance or the part budget is spent.

#ifndef SCMAT_DECOMPOSITION_HPP_
#define SCMAT_DECOMPOSITION_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "scmat/bounding.hpp"
#include "scmat/hull.hpp"
#include "scmat/mesh.hpp"

namespace scmat {

struct DecompositionParams {
  std::size_t max_parts = 16;
  double concavity_tol = 1e-3;  // m
};

// Depth of `p` below the hull boundary; 0 for points on or outside it.
inline double DepthInside(const std::vector<Plane>& planes, const Vec3& p) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& plane : planes) worst = std::max(worst, plane.SignedDistance(p));
  return std::max(0.0, -worst);
}

// Concavity of a point set against its hull: max depth of any point.
inline double Concavity(std::span<const Vec3> points, const ConvexPolytope& hull) {
  const auto planes = hull.FacePlanes();
  double c = 0.0;
  for (const auto& p : points) c = std::max(c, DepthInside(planes, p));
  return c;
}

namespace detail {

inline constexpr std::size_t kConcavityRaySamples = 256;

// Ray r(t) = origin + t * dir against triangle (a, b, c). Returns t and
// whether the triangle faces the ray (outward normal against dir).
inline std::optional<std::pair<double, bool>> RayTriangle(const Vec3& origin, const Vec3& dir,
                                                          const Vec3& a, const Vec3& b,
                                                          const Vec3& c) {
  constexpr double kBaryTol = 1e-9;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < -kBaryTol || u > 1.0 + kBaryTol) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < -kBaryTol || u + v > 1.0 + kBaryTol) return std::nullopt;
  return std::make_pair(e2.dot(q) * inv, e1.cross(e2).dot(dir) < 0.0);
}

// Deepest inward ray from hull-face samples into `mesh`. A ray whose first
// hit is back-facing started inside the solid and counts as depth 0.
inline std::pair<double, Vec3> RayConcavity(const TriangleMesh& mesh,
                                            const ConvexPolytope& hull) {
  std::pair<double, Vec3> best{0.0, Vec3::Zero()};
  if (mesh.triangles.empty() || hull.faces.empty()) return best;
  const double scale = std::max(hull.BoundingRadius(), 1e-9);
  const double t_min = -1e-9 * scale;
  const auto planes = hull.FacePlanes();

  struct Tri {
    Vec3 a, b, c;
    double area;
    std::size_t face;
  };
  std::vector<Tri> tris;
  double total = 0.0;
  for (std::size_t f = 0; f < hull.faces.size(); ++f) {
    const auto& face = hull.faces[f];
    for (std::size_t k = 1; k + 1 < face.size(); ++k) {
      Tri t{hull.vertices[face[0]], hull.vertices[face[k]], hull.vertices[face[k + 1]], 0.0, f};
      t.area = TriangleArea(t.a, t.b, t.c);
      total += t.area;
      tris.push_back(t);
    }
  }
  if (!(total > 0.0)) return best;

  const auto probe = [&](const Vec3& origin, const Vec3& dir) {
    double first = std::numeric_limits<double>::infinity();
    bool front = false;
    for (const auto& tri : mesh.triangles) {
      const auto hit = RayTriangle(origin, dir, mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                   mesh.vertices[tri[2]]);
      if (!hit || hit->first < t_min) continue;
      // Prefer front-facing on ties so coincident hull and mesh faces give 0.
      if (hit->first < first - 1e-12 * scale ||
          (std::abs(hit->first - first) <= 1e-12 * scale && hit->second)) {
        first = std::min(first, hit->first);
        front = hit->second;
      }
    }
    if (!front || !std::isfinite(first) || first <= best.first) return;
    best = {first, origin + first * dir};
  };

  for (const auto& tri : tris) {
    const Vec3 dir = -planes[tri.face].normal;
    const auto n = static_cast<int>(
        std::clamp(std::sqrt(static_cast<double>(kConcavityRaySamples) * tri.area / total),
                   1.0, 8.0));
    // Interior barycentric grid with n^2 points.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n - i; ++j) {
        for (int up = 0; up < 2; ++up) {
          if (up == 1 && i + j + 2 > n) continue;
          const double u = (i + (up ? 2.0 : 1.0) / 3.0) / n;
          const double v = (j + (up ? 2.0 : 1.0) / 3.0) / n;
          probe(tri.a + u * (tri.b - tri.a) + v * (tri.c - tri.a), dir);
        }
      }
    }
  }
  return best;
}

struct DecompPart {
  TriangleMesh mesh;
  ConvexPolytope hull;
  double concavity = 0.0;
  Vec3 deepest = Vec3::Zero();
  bool final = false;
};

inline DecompPart MakePart(TriangleMesh mesh) {
  DecompPart part;
  part.mesh = std::move(mesh);
  part.hull = ConvexHull(part.mesh.vertices);
  const auto planes = part.hull.FacePlanes();
  for (const auto& v : part.mesh.vertices) {
    const double d = DepthInside(planes, v);
    if (d > part.concavity) {
      part.concavity = d;
      part.deepest = v;
    }
  }
  const auto [ray_depth, ray_point] = RayConcavity(part.mesh, part.hull);
  if (ray_depth > part.concavity) {
    part.concavity = ray_depth;
    part.deepest = ray_point;
  }
  return part;
}

// Keeps the side normal . x <= offset (or >= when `upper`).
inline TriangleMesh ClipMesh(const TriangleMesh& mesh, const Vec3& normal,
                             double offset, bool upper) {
  double scale = 0.0;
  for (const auto& v : mesh.vertices) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double on_plane = 1e-9 * std::max(scale, 1e-3);
  const auto side = [&](const Vec3& p) {
    double s = normal.dot(p) - offset;
    if (std::abs(s) <= on_plane) s = 0.0;
    return upper ? -s : s;  // <= 0 is kept
  };
  TriangleMesh out;
  VertexWelder welder(out);
  std::vector<bool> referenced(mesh.vertices.size(), false);
  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    if (side(p0) == 0.0 && side(p1) == 0.0 && side(p2) == 0.0) {
      // Face in the cut plane: it bounds the side its normal points away from.
      for (int k = 0; k < 3; ++k) referenced[tri[k]] = true;
      const double facing = (p1 - p0).cross(p2 - p0).dot(normal);
      if ((facing > 0.0) != upper) {
        out.triangles.push_back({welder.Add(p0), welder.Add(p1), welder.Add(p2)});
      }
      continue;
    }
    std::vector<Vec3> poly;
    for (int k = 0; k < 3; ++k) {
      referenced[tri[k]] = true;
      const Vec3& a = mesh.vertices[tri[k]];
      const Vec3& b = mesh.vertices[tri[(k + 1) % 3]];
      const double sa = side(a);
      const double sb = side(b);
      if (sa <= 0) poly.push_back(a);
      if ((sa < 0 && sb > 0) || (sa > 0 && sb < 0)) {
        poly.push_back(a + (sa / (sa - sb)) * (b - a));
      }
    }
    if (poly.size() < 3) continue;  // touches the plane; the other side keeps it
    std::vector<std::uint32_t> ids;
    for (const auto& p : poly) ids.push_back(welder.Add(p));
    for (std::size_t k = 1; k + 1 < ids.size(); ++k) {
      out.triangles.push_back({ids[0], ids[k], ids[k + 1]});
    }
  }
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (!referenced[i] && side(mesh.vertices[i]) <= 0) welder.Add(mesh.vertices[i]);
  }
  return out;
}

}  // namespace detail

// Splits `mesh` into at most params.max_parts convex parts whose union covers
// every mesh vertex. A mesh already convex within params.concavity_tol (or a
// budget of one part) yields exactly its hull.
inline std::vector<ConvexPolytope> ConvexDecomposition(
    const TriangleMesh& mesh, const DecompositionParams& params = {},
    Diagnostics* diag = nullptr) {
  if (mesh.vertices.empty()) throw GeometryError("decomposition of an empty mesh");
  std::vector<detail::DecompPart> parts;
  parts.push_back(detail::MakePart(mesh));
  if (parts.front().concavity <= params.concavity_tol || params.max_parts <= 1 ||
      mesh.triangles.empty()) {
    return {ConvexHull(mesh.vertices, diag)};
  }

  while (parts.size() < params.max_parts) {
    auto target = parts.end();
    for (auto it = parts.begin(); it != parts.end(); ++it) {
      if (it->final || it->concavity <= params.concavity_tol) continue;
      if (target == parts.end() || it->concavity > target->concavity) target = it;
    }
    if (target == parts.end()) break;

    std::vector<Vec3> normals = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    const Obb frame = OrientedBoundingBox(target->mesh.vertices);
    for (int k = 0; k < 3; ++k) {
      const Vec3 n = frame.axes.col(k);
      const bool duplicate = std::any_of(normals.begin(), normals.end(),
          [&](const Vec3& m) { return std::abs(m.dot(n)) > 1.0 - 1e-9; });
      if (!duplicate) normals.push_back(n);
    }

    double best_score = target->concavity;
    double best_volume = std::numeric_limits<double>::infinity();
    std::vector<detail::DecompPart> best;
    for (const auto& n : normals) {
      const double offset = n.dot(target->deepest);
      auto lower = detail::ClipMesh(target->mesh, n, offset, false);
      auto upper = detail::ClipMesh(target->mesh, n, offset, true);
      if (lower.triangles.empty() || upper.triangles.empty()) continue;
      auto a = detail::MakePart(std::move(lower));
      auto b = detail::MakePart(std::move(upper));
      const double score = std::max(a.concavity, b.concavity);
      const double volume = a.hull.Volume() + b.hull.Volume();
      if (score < best_score - 1e-12 ||
          (best.size() == 2 && score <= best_score + 1e-12 && volume < best_volume)) {
        best_score = score;
        best_volume = volume;
        best.clear();
        best.push_back(std::move(a));
        best.push_back(std::move(b));
      }
    }
    if (best.empty()) {
      target->final = true;
      continue;
    }
    *target = std::move(best[0]);
    parts.push_back(std::move(best[1]));
  }

  if (diag != nullptr) {
    double worst = 0.0;
    for (const auto& p : parts) worst = std::max(worst, p.concavity);
    if (worst > params.concavity_tol) {
      diag->Warn("decomposition stopped with concavity " + std::to_string(worst) +
                 " m above tolerance");
    }
  }
  std::vector<ConvexPolytope> out;
  out.reserve(parts.size());
  for (auto& p : parts) out.push_back(std::move(p.hull));
  return out;
}

}  // namespace scmat

#endif  // SCMAT_DECOMPOSITION_HPP_
