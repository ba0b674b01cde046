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

// 3D quickhull.

#ifndef SCMAT_HULL_HPP_
#define SCMAT_HULL_HPP_

#include <algorithm>
#include <cfloat>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "scmat/math.hpp"
#include "scmat/mesh.hpp"

namespace scmat {

struct Plane {
  Vec3 normal = Vec3::UnitZ();  // unit, outward
  double offset = 0.0;          // normal . x == offset on the plane

  double SignedDistance(const Vec3& p) const { return normal.dot(p) - offset; }
};

// Convex polytope with outward-oriented faces given as vertex-index loops.
struct ConvexPolytope {
  std::vector<Vec3> vertices;
  std::vector<std::vector<std::uint32_t>> faces;

  std::vector<Plane> FacePlanes() const {
    std::vector<Plane> planes;
    planes.reserve(faces.size());
    for (const auto& f : faces) {
      // Newell normal tolerates slightly non-planar polygons.
      Vec3 n = Vec3::Zero();
      Vec3 centroid = Vec3::Zero();
      for (std::size_t k = 0; k < f.size(); ++k) {
        const Vec3& a = vertices[f[k]];
        const Vec3& b = vertices[f[(k + 1) % f.size()]];
        n += a.cross(b);
        centroid += a;
      }
      centroid /= static_cast<double>(f.size());
      n.normalize();
      planes.push_back({n, n.dot(centroid)});
    }
    return planes;
  }

  // Max over faces of the signed plane distance: <= 0 inside, > 0 outside.
  double SignedDistance(const Vec3& p) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& plane : FacePlanes()) {
      worst = std::max(worst, plane.SignedDistance(p));
    }
    return worst;
  }

  // Largest vertex norm about the vertex centroid.
  double BoundingRadius() const {
    if (vertices.empty()) return 0.0;
    Vec3 c = Vec3::Zero();
    for (const auto& v : vertices) c += v;
    c /= static_cast<double>(vertices.size());
    double r = 0.0;
    for (const auto& v : vertices) r = std::max(r, (v - c).norm());
    return r;
  }

  double Volume() const {
    double vol = 0.0;
    for (const auto& f : faces) {
      for (std::size_t k = 1; k + 1 < f.size(); ++k) {
        vol += vertices[f[0]].dot(vertices[f[k]].cross(vertices[f[k + 1]]));
      }
    }
    return vol / 6.0;
  }
};

// Padding applied along degenerate directions of flat or collinear input.
inline constexpr double kDegeneratePadding = 1e-6;  // m

namespace detail {

class QuickHull {
 public:
  explicit QuickHull(std::span<const Vec3> points) : points_(points) {
    Vec3 lo = points_[0], hi = points_[0];
    double max_abs = 0.0;
    for (const auto& p : points_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      max_abs = std::max(max_abs, p.cwiseAbs().maxCoeff());
    }
    extent_ = (hi - lo).maxCoeff();
    const double scale = std::max(extent_, max_abs);
    eps_ = std::max(1e-11 * scale, 16 * DBL_EPSILON);
    flat_tol_ = std::max(1e-10 * std::max(extent_, 1e-300), 16 * DBL_EPSILON);
  }

  // Returns false when the input spans fewer than three dimensions; in that
  // case `degenerate_dirs` holds unit directions the input does not span.
  bool Build(std::vector<Vec3>& degenerate_dirs) {
    std::array<int, 4> simplex{};
    if (!InitialSimplex(simplex, degenerate_dirs)) return false;
    const Vec3 interior = (points_[simplex[0]] + points_[simplex[1]] +
                           points_[simplex[2]] + points_[simplex[3]]) /
                          4.0;
    const int tri[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
    for (const auto& t : tri) {
      int a = simplex[t[0]], b = simplex[t[1]], c = simplex[t[2]];
      const Vec3 n = (points_[b] - points_[a]).cross(points_[c] - points_[a]);
      if (n.dot(interior - points_[a]) > 0) std::swap(b, c);
      AddFace(a, b, c);
    }
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
      if (std::find(simplex.begin(), simplex.end(), i) == simplex.end()) {
        candidates.push_back(i);
      }
    }
    std::vector<int> all_faces(faces_.size());
    for (int f = 0; f < static_cast<int>(faces_.size()); ++f) all_faces[f] = f;
    AssignOutside(candidates, all_faces);

    // faces_ grows while iterating. The seed face is always visible from its
    // own farthest point, so it is retired by AddPoint.
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!faces_[f].alive || faces_[f].outside.empty()) continue;
      AddPoint(static_cast<int>(f));
    }
    return true;
  }

  ConvexPolytope Result() const {
    std::vector<int> remap(points_.size(), -1);
    std::vector<int> used;
    for (const auto& face : faces_) {
      if (!face.alive) continue;
      for (const int v : face.v) {
        if (remap[v] < 0) {
          remap[v] = 0;
          used.push_back(v);
        }
      }
    }
    std::sort(used.begin(), used.end());
    ConvexPolytope out;
    for (const int v : used) {
      remap[v] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(points_[v]);
    }
    for (const auto& face : faces_) {
      if (!face.alive) continue;
      out.faces.push_back({static_cast<std::uint32_t>(remap[face.v[0]]),
                           static_cast<std::uint32_t>(remap[face.v[1]]),
                           static_cast<std::uint32_t>(remap[face.v[2]])});
    }
    return out;
  }

 private:
  struct Face {
    std::array<int, 3> v{};
    Vec3 normal;
    double offset = 0.0;
    std::vector<int> outside;
    bool alive = true;
    bool visible = false;
  };

  static std::uint64_t EdgeKey(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }

  double Distance(const Face& f, int p) const {
    return f.normal.dot(points_[p]) - f.offset;
  }

  void AddFace(int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.normal = (points_[b] - points_[a]).cross(points_[c] - points_[a]);
    const double len = f.normal.norm();
    if (len > 0) f.normal /= len;
    f.offset = f.normal.dot((points_[a] + points_[b] + points_[c]) / 3.0);
    const int id = static_cast<int>(faces_.size());
    edges_[EdgeKey(a, b)] = id;
    edges_[EdgeKey(b, c)] = id;
    edges_[EdgeKey(c, a)] = id;
    faces_.push_back(std::move(f));
  }

  void AssignOutside(const std::vector<int>& candidates,
                     const std::vector<int>& faces) {
    for (const int p : candidates) {
      for (const int f : faces) {
        if (Distance(faces_[f], p) > eps_) {
          faces_[f].outside.push_back(p);
          break;
        }
      }
    }
  }

  bool InitialSimplex(std::array<int, 4>& s, std::vector<Vec3>& degenerate) {
    const int n = static_cast<int>(points_.size());
    std::array<int, 6> extremes{};
    for (int axis = 0; axis < 3; ++axis) {
      for (int i = 0; i < n; ++i) {
        if (points_[i][axis] < points_[extremes[2 * axis]][axis]) {
          extremes[2 * axis] = i;
        }
        if (points_[i][axis] > points_[extremes[2 * axis + 1]][axis]) {
          extremes[2 * axis + 1] = i;
        }
      }
    }
    double best = -1.0;
    for (const int a : extremes) {
      for (const int b : extremes) {
        const double d = (points_[a] - points_[b]).squaredNorm();
        if (d > best) {
          best = d;
          s[0] = a;
          s[1] = b;
        }
      }
    }
    if (std::sqrt(best) <= flat_tol_) {
      degenerate = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
      return false;
    }
    const Vec3 dir = (points_[s[1]] - points_[s[0]]).normalized();
    best = -1.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 r = points_[i] - points_[s[0]];
      const double d = (r - r.dot(dir) * dir).norm();
      if (d > best) {
        best = d;
        s[2] = i;
      }
    }
    if (best <= flat_tol_) {
      const Vec3 u = dir.unitOrthogonal();
      degenerate = {u, dir.cross(u)};
      return false;
    }
    const Vec3 normal = (points_[s[1]] - points_[s[0]])
                            .cross(points_[s[2]] - points_[s[0]])
                            .normalized();
    best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(normal.dot(points_[i] - points_[s[0]]));
      if (d > best) {
        best = d;
        s[3] = i;
      }
    }
    if (best <= flat_tol_) {
      degenerate = {normal};
      return false;
    }
    return true;
  }

  void AddPoint(int face_id) {
    const Face& seed = faces_[face_id];
    int apex = seed.outside.front();
    double far = Distance(seed, apex);
    for (const int p : seed.outside) {
      const double d = Distance(seed, p);
      if (d > far) {
        far = d;
        apex = p;
      }
    }

    // Flood the visible region from the seed face.
    std::vector<int> visible{face_id};
    faces_[face_id].visible = true;
    for (std::size_t k = 0; k < visible.size(); ++k) {
      const auto v = faces_[visible[k]].v;
      for (int e = 0; e < 3; ++e) {
        const int nb = edges_.at(EdgeKey(v[(e + 1) % 3], v[e]));
        if (!faces_[nb].visible && Distance(faces_[nb], apex) > eps_) {
          faces_[nb].visible = true;
          visible.push_back(nb);
        }
      }
    }

    std::vector<std::pair<int, int>> horizon;
    for (const int f : visible) {
      const auto v = faces_[f].v;
      for (int e = 0; e < 3; ++e) {
        const int nb = edges_.at(EdgeKey(v[(e + 1) % 3], v[e]));
        if (!faces_[nb].visible) horizon.emplace_back(v[e], v[(e + 1) % 3]);
      }
    }

    std::vector<int> orphans;
    for (const int f : visible) {
      Face& face = faces_[f];
      face.alive = false;
      for (const int p : face.outside) {
        if (p != apex) orphans.push_back(p);
      }
      face.outside.clear();
      face.outside.shrink_to_fit();
      for (int e = 0; e < 3; ++e) {
        const auto key = EdgeKey(face.v[e], face.v[(e + 1) % 3]);
        const auto it = edges_.find(key);
        if (it != edges_.end() && it->second == f) edges_.erase(it);
      }
    }

    std::vector<int> created;
    for (const auto& [a, b] : horizon) {
      created.push_back(static_cast<int>(faces_.size()));
      AddFace(a, b, apex);
    }
    AssignOutside(orphans, created);
  }

  std::span<const Vec3> points_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> edges_;
  double extent_ = 0.0;
  double eps_ = 0.0;
  double flat_tol_ = 0.0;
};

}  // namespace detail

// Minimal convex polytope containing `points`. Input spanning fewer than three
// dimensions (including fewer than four points) is padded by
// kDegeneratePadding along each missing direction and rebuilt; the padding is
// reported through `diag`. Throws GeometryError on empty input.
inline ConvexPolytope ConvexHull(std::span<const Vec3> points,
                                 Diagnostics* diag = nullptr) {
  if (points.empty()) throw GeometryError("convex hull of an empty point set");
  std::vector<Vec3> degenerate;
  {
    detail::QuickHull qh(points);
    if (qh.Build(degenerate)) return qh.Result();
  }
  // Thickness of the input along the missing directions, so that padding
  // always strictly exceeds it.
  double thickness = 0.0;
  for (const auto& d : degenerate) {
    double lo = points[0].dot(d), hi = lo;
    for (const auto& p : points) {
      lo = std::min(lo, p.dot(d));
      hi = std::max(hi, p.dot(d));
    }
    thickness = std::max(thickness, hi - lo);
  }
  const double pad = std::max(kDegeneratePadding, 10.0 * thickness);
  std::vector<Vec3> padded;
  const std::size_t combos = std::size_t{1} << degenerate.size();
  padded.reserve(points.size() * combos);
  for (const auto& p : points) {
    for (std::size_t mask = 0; mask < combos; ++mask) {
      Vec3 q = p;
      for (std::size_t k = 0; k < degenerate.size(); ++k) {
        q += ((mask >> k) & 1 ? pad : -pad) * degenerate[k];
      }
      padded.push_back(q);
    }
  }
  if (diag != nullptr) {
    diag->Warn("convex hull input spans " + std::to_string(3 - degenerate.size()) +
               " dimension(s); padded by " + std::to_string(pad) + " m");
  }
  detail::QuickHull qh(padded);
  std::vector<Vec3> unused;
  if (!qh.Build(unused)) {
    throw GeometryError("convex hull failed after degenerate padding");
  }
  return qh.Result();
}

}  // namespace scmat

#endif  // SCMAT_HULL_HPP_
