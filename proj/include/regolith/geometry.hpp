/*
 * Copyright 2026 The Regolith Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "regolith/errors.hpp"

namespace regolith {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Triangle tag for terrain surface triangles; rock triangles carry the
/// (non-negative) placement index instead.
inline constexpr std::int32_t kTerrainTag = -1;

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& box) {
    min = min.cwiseMin(box.min);
    max = max.cwiseMax(box.max);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double surface_area() const {
    if (!valid()) return 0.0;
    const Vec3 e = extent();
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  }
};

struct Triangle {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 c = Vec3::Zero();
  std::int32_t tag = kTerrainTag;

  Vec3 scaled_normal() const { return (b - a).cross(c - a); }
  Vec3 normal() const { return scaled_normal().normalized(); }
  double area() const { return 0.5 * scaled_normal().norm(); }
  Vec3 centroid() const { return (a + b + c) / 3.0; }
  Aabb bounds() const {
    Aabb box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    return box;
  }
};

/// Proper rigid motion: p' = R p + t.
struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_quat(const Quat& q, const Vec3& translation) {
    return {q.normalized().toRotationMatrix(), translation};
  }

  Vec3 apply(const Vec3& p) const { return R * p + t; }

  /// this ∘ other: apply `other` first, then this.
  RigidTransform compose(const RigidTransform& other) const {
    return {R * other.R, R * other.t + t};
  }

  RigidTransform inverse() const {
    const Mat3 Rt = R.transpose();
    return {Rt, -(Rt * t)};
  }

  Quat rotation_quat() const { return Quat(R).normalized(); }

  /// Snaps R back onto SO(3) after incremental updates.
  void orthonormalize() { R = Quat(R).normalized().toRotationMatrix(); }

  bool is_valid(double tol = 1e-9) const {
    const Mat3 err = R.transpose() * R - Mat3::Identity();
    return err.cwiseAbs().maxCoeff() <= tol &&
           std::abs(R.determinant() - 1.0) <= tol && t.allFinite();
  }
};

/// Rotation angle of R in radians, in [0, pi].
inline double rotation_angle(const Mat3& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

/// Angle between two rotations.
inline double rotation_distance(const Mat3& a, const Mat3& b) {
  return rotation_angle(a.transpose() * b);
}

inline double rotation_distance(const Quat& a, const Quat& b) {
  const double d = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return 2.0 * std::acos(d);
}

}  // namespace regolith
