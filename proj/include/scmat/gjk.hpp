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

// GJK distance between convex sets given by support mappings, and the
// separating-axis test for oriented boxes.

#ifndef SCMAT_GJK_HPP_
#define SCMAT_GJK_HPP_

#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "scmat/bounding.hpp"
#include "scmat/math.hpp"

namespace scmat {

inline constexpr int kGjkMaxIterations = 128;
inline constexpr double kGjkRelativeTolerance = 1e-10;

struct GjkResult {
  double distance = 0.0;  // 0 when the sets intersect
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
  bool intersecting = false;
  bool degraded = false;  // iteration cap reached
  int iterations = 0;
};

namespace detail {

struct SimplexVertex {
  Vec3 w;  // a - b
  Vec3 a;
  Vec3 b;
};

// Closest point to the origin on the affine hull of N + 1 points. Returns
// false for affinely dependent points or when a barycentric weight is not
// strictly positive (the point then lies outside that face).
template <int N>
bool AffineClosest(const std::array<const Vec3*, 4>& y, std::array<double, 4>& lam,
                   Vec3& x) {
  const Vec3& y0 = *y[0];
  Eigen::Matrix<double, 3, N> e;
  for (int k = 0; k < N; ++k) e.col(k) = *y[k + 1] - y0;
  const Eigen::Matrix<double, N, N> gram = e.transpose() * e;
  double scale = 1.0;
  for (int k = 0; k < N; ++k) scale *= gram(k, k);
  const double det = gram.determinant();
  if (!(scale > 0.0) || !(det > 1e-14 * scale)) return false;
  const Eigen::Matrix<double, N, 1> mu = gram.ldlt().solve(-(e.transpose() * y0));
  double sum = 0.0;
  for (int k = 0; k < N; ++k) {
    if (!(mu[k] > 0.0)) return false;
    lam[k + 1] = mu[k];
    sum += mu[k];
  }
  lam[0] = 1.0 - sum;
  if (!(lam[0] > 0.0)) return false;
  x = y0 + e * mu;
  return true;
}

// Closest point to the origin on the convex hull of `s` (1..4 points), by
// enumerating faces of the simplex and keeping the minimum-norm candidate
// whose barycentric weights are all positive. On return `s` is reduced to the
// supporting face and `lambda` holds its weights.
inline Vec3 ClosestOnSimplex(std::array<SimplexVertex, 4>& s, int& count,
                             std::array<double, 4>& lambda) {
  double best_norm = std::numeric_limits<double>::infinity();
  int best_mask = 0;
  std::array<double, 4> best_lambda{};
  Vec3 best_point = Vec3::Zero();

  for (int mask = 1; mask < (1 << count); ++mask) {
    std::array<const Vec3*, 4> pts{};
    int m = 0;
    for (int k = 0; k < count; ++k) {
      if (mask & (1 << k)) pts[m++] = &s[k].w;
    }
    std::array<double, 4> lam{};
    Vec3 x;
    bool ok = false;
    switch (m) {
      case 1:
        lam[0] = 1.0;
        x = *pts[0];
        ok = true;
        break;
      case 2:
        ok = AffineClosest<1>(pts, lam, x);
        break;
      case 3:
        ok = AffineClosest<2>(pts, lam, x);
        break;
      case 4:
        ok = AffineClosest<3>(pts, lam, x);
        break;
    }
    if (!ok) continue;
    const double n2 = x.squaredNorm();
    if (n2 < best_norm) {
      best_norm = n2;
      best_mask = mask;
      best_lambda = lam;
      best_point = x;
    }
  }

  std::array<SimplexVertex, 4> reduced{};
  int m = 0;
  for (int k = 0; k < count; ++k) {
    if (best_mask & (1 << k)) {
      lambda[m] = best_lambda[m];
      reduced[m++] = s[k];
    }
  }
  s = reduced;
  count = m;
  return best_point;
}

}  // namespace detail

// Distance between convex sets A and B. `support_a(d)` / `support_b(d)`
// return a point of the set maximizing d . x; `initial_dir` seeds the search.
template <typename SupportA, typename SupportB>
GjkResult GjkDistance(const SupportA& support_a, const SupportB& support_b,
                      const Vec3& initial_dir, double abs_tolerance = 1e-12) {
  GjkResult result;
  std::array<detail::SimplexVertex, 4> simplex{};
  std::array<double, 4> lambda{1.0, 0.0, 0.0, 0.0};
  int count = 0;

  Vec3 dir = initial_dir.squaredNorm() > 0 ? initial_dir : Vec3::UnitX();
  {
    const Vec3 a = support_a(-dir);
    const Vec3 b = support_b(dir);
    simplex[0] = {a - b, a, b};
    count = 1;
  }
  Vec3 v = simplex[0].w;

  for (result.iterations = 0; result.iterations < kGjkMaxIterations;
       ++result.iterations) {
    const double vv = v.squaredNorm();
    if (vv <= abs_tolerance * abs_tolerance) {
      result.intersecting = true;
      break;
    }
    const Vec3 a = support_a(-v);
    const Vec3 b = support_b(v);
    const Vec3 w = a - b;
    if (vv - v.dot(w) <= kGjkRelativeTolerance * vv) break;
    bool duplicate = false;
    for (int k = 0; k < count; ++k) {
      if (simplex[k].w == w) duplicate = true;
    }
    if (duplicate) break;
    simplex[count++] = {w, a, b};
    v = detail::ClosestOnSimplex(simplex, count, lambda);
    if (count == 4) {
      result.intersecting = true;
      break;
    }
    if (v.squaredNorm() >= vv) break;  // no progress
  }
  if (result.iterations >= kGjkMaxIterations) result.degraded = true;

  Vec3 pa = Vec3::Zero();
  Vec3 pb = Vec3::Zero();
  for (int k = 0; k < count; ++k) {
    pa += lambda[k] * simplex[k].a;
    pb += lambda[k] * simplex[k].b;
  }
  result.point_a = pa;
  result.point_b = pb;
  if (result.intersecting) {
    result.distance = 0.0;
    result.point_b = pa;
  } else {
    result.distance = v.norm();
  }
  return result;
}

// Oriented box in world coordinates.
struct WorldBox {
  Vec3 center;
  Mat3 axes;
  Vec3 half_extents;

  Vec3 Support(const Vec3& d) const {
    Vec3 out = center;
    for (int k = 0; k < 3; ++k) {
      const double s = axes.col(k).dot(d) >= 0.0 ? 1.0 : -1.0;
      out += s * half_extents[k] * axes.col(k);
    }
    return out;
  }
};

// Separating-axis test over the 15 box axes.
inline bool BoxesIntersect(const WorldBox& a, const WorldBox& b) {
  const Mat3 r = a.axes.transpose() * b.axes;
  const Vec3 t = a.axes.transpose() * (b.center - a.center);
  Mat3 abs_r = r.cwiseAbs();
  abs_r.array() += 1e-12;
  const Vec3& ea = a.half_extents;
  const Vec3& eb = b.half_extents;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(t[i]) > ea[i] + eb.dot(abs_r.row(i))) return false;
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(t.dot(r.col(i))) > ea.dot(abs_r.col(i)) + eb[i]) return false;
  }
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3;
    const int i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3;
      const int j2 = (j + 2) % 3;
      const double ra = ea[i1] * abs_r(i2, j) + ea[i2] * abs_r(i1, j);
      const double rb = eb[j1] * abs_r(i, j2) + eb[j2] * abs_r(i, j1);
      const double dist = std::abs(t[i2] * r(i1, j) - t[i1] * r(i2, j));
      if (dist > ra + rb) return false;
    }
  }
  return true;
}

}  // namespace scmat

#endif  // SCMAT_GJK_HPP_
