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

// Minimal enclosing spheres and PCA oriented bounding boxes.

#ifndef SCMAT_BOUNDING_HPP_
#define SCMAT_BOUNDING_HPP_

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "scmat/math.hpp"
#include "scmat/mesh.hpp"
#include "scmat/rng.hpp"

namespace scmat {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;

  bool Contains(const Vec3& p, double tol = 0.0) const {
    return (p - center).norm() <= radius + tol;
  }
};

struct Obb {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns are the local axes
  Vec3 half_extents = Vec3::Zero();

  Vec3 ToLocal(const Vec3& p) const { return axes.transpose() * (p - center); }

  bool Contains(const Vec3& p, double tol = 0.0) const {
    return (ToLocal(p).cwiseAbs() - half_extents).maxCoeff() <= tol;
  }

  double Volume() const { return 8.0 * half_extents.prod(); }

  std::array<Vec3, 8> Corners() const {
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i) {
      const Vec3 s((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0,
                   (i & 4) ? 1.0 : -1.0);
      out[i] = center + axes * s.cwiseProduct(half_extents);
    }
    return out;
  }
};

namespace detail {

// Smallest sphere through the support points when they are affinely
// independent; nullopt otherwise.
inline std::optional<Sphere> Circumsphere(std::span<const Vec3> s) {
  switch (s.size()) {
    case 1:
      return Sphere{s[0], 0.0};
    case 2:
      return Sphere{0.5 * (s[0] + s[1]), 0.5 * (s[1] - s[0]).norm()};
    case 3: {
      const Vec3 ab = s[1] - s[0];
      const Vec3 ac = s[2] - s[0];
      const Vec3 n = ab.cross(ac);
      const double n2 = n.squaredNorm();
      if (n2 <= 1e-30 * ab.squaredNorm() * ac.squaredNorm()) return std::nullopt;
      const Vec3 off =
          (ac.squaredNorm() * n.cross(ab) + ab.squaredNorm() * ac.cross(n)) /
          (2.0 * n2);
      return Sphere{s[0] + off, off.norm()};
    }
    case 4: {
      Mat3 m;
      Vec3 rhs;
      for (int k = 0; k < 3; ++k) {
        const Vec3 d = s[k + 1] - s[0];
        m.row(k) = 2.0 * d.transpose();
        rhs[k] = d.squaredNorm();
      }
      const double scale = m.cwiseAbs().maxCoeff();
      if (std::abs(m.determinant()) <= 1e-12 * scale * scale * scale) {
        return std::nullopt;
      }
      const Vec3 off = m.partialPivLu().solve(rhs);
      return Sphere{s[0] + off, off.norm()};
    }
    default:
      return std::nullopt;
  }
}

inline bool InBall(const Sphere& ball, const Vec3& p) {
  return (p - ball.center).norm() <= ball.radius * (1.0 + 1e-12) + 1e-15;
}

// Minimal ball of at most four points by subset enumeration; used when the
// support set is numerically degenerate.
inline Sphere SmallBall(std::span<const Vec3> s) {
  Sphere best{s[0], std::numeric_limits<double>::infinity()};
  const int n = static_cast<int>(s.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<Vec3> sub;
    for (int k = 0; k < n; ++k) {
      if (mask & (1 << k)) sub.push_back(s[k]);
    }
    const auto ball = Circumsphere(sub);
    if (!ball || ball->radius >= best.radius) continue;
    if (std::all_of(s.begin(), s.end(),
                    [&](const Vec3& p) { return InBall(*ball, p); })) {
      best = *ball;
    }
  }
  return best;
}

inline Sphere BallOfSupport(std::span<const Vec3> support) {
  if (support.empty()) return {Vec3::Zero(), -1.0};
  if (auto ball = Circumsphere(support)) return *ball;
  return SmallBall(support);
}

// Move-to-front Welzl (Gartner). Recursion depth is bounded by the support
// size, not the number of points.
inline Sphere MoveToFrontBall(std::vector<Vec3>& pts, std::size_t end,
                              std::vector<Vec3>& support) {
  Sphere ball = BallOfSupport(support);
  if (support.size() == 4) return ball;
  for (std::size_t i = 0; i < end; ++i) {
    if (ball.radius >= 0.0 && InBall(ball, pts[i])) continue;
    support.push_back(pts[i]);
    ball = MoveToFrontBall(pts, i, support);
    support.pop_back();
    std::rotate(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i),
                pts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  return ball;
}

}  // namespace detail

// Minimal enclosing sphere. Throws GeometryError on empty input.
inline Sphere BoundingSphere(std::span<const Vec3> points) {
  if (points.empty()) throw GeometryError("bounding sphere of an empty point set");
  std::vector<Vec3> pts(points.begin(), points.end());
  // Fixed-seed shuffle: expected linear time, deterministic output.
  Xoshiro256 rng(0x5eedba11);
  for (std::size_t i = pts.size(); i > 1; --i) {
    std::swap(pts[i - 1], pts[rng.Next() % i]);
  }
  std::vector<Vec3> support;
  support.reserve(4);
  Sphere ball = detail::MoveToFrontBall(pts, pts.size(), support);
  // Absorb round-off so containment holds exactly.
  for (const auto& p : points) {
    ball.radius = std::max(ball.radius, (p - ball.center).norm());
  }
  return ball;
}

// PCA box: axes are the covariance eigenvectors (largest variance first),
// extents are the tight projections. Not volume-minimal. Throws GeometryError
// on empty input.
inline Obb OrientedBoundingBox(std::span<const Vec3> points) {
  if (points.empty()) throw GeometryError("OBB of an empty point set");
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    const Vec3 d = p - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Obb box;
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  // Eigen sorts eigenvalues ascending.
  box.axes.col(0) = solver.eigenvectors().col(2);
  box.axes.col(1) = solver.eigenvectors().col(1);
  box.axes.col(2) = box.axes.col(0).cross(box.axes.col(1));
  if (!IsRotation(box.axes, 1e-9)) box.axes = Mat3::Identity();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& p : points) {
    const Vec3 q = box.axes.transpose() * (p - mean);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  box.center = mean + box.axes * (0.5 * (lo + hi));
  box.half_extents = 0.5 * (hi - lo);
  return box;
}

}  // namespace scmat

#endif  // SCMAT_BOUNDING_HPP_
