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

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "regolith/bvh.hpp"
#include "regolith/geometry.hpp"

namespace regolith {

/// Triangles with area at or below this are dropped during scene build.
inline constexpr double kDegenerateTriangleArea = 1e-12;

struct SceneHit {
  double distance = 0.0;
  std::int32_t triangle = -1;
  std::int32_t tag = kTerrainTag;
};

/// Immutable triangle world with a BVH for ray queries. Safe to share across
/// concurrent readers once built.
class Scene {
 public:
  Scene() = default;

  static Scene build(std::vector<Triangle> triangles) {
    std::vector<Triangle> kept;
    kept.reserve(triangles.size());
    for (Triangle& t : triangles)
      if (t.area() > kDegenerateTriangleArea) kept.push_back(std::move(t));
    if (kept.empty())
      throw ValidationError("scene build: no non-degenerate triangles");

    Scene scene;
    scene.triangles_ = std::move(kept);
    for (const Triangle& t : scene.triangles_) scene.bounds_.expand(t.bounds());
    scene.bvh_.build(scene.triangles_);
    return scene;
  }

  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Aabb& bounds() const { return bounds_; }

  /// Nearest hit along a unit-direction ray, or nullopt on miss.
  std::optional<SceneHit> ray_cast(const Vec3& origin, const Vec3& dir) const {
    if (std::abs(dir.norm() - 1.0) > 1e-9)
      throw ValidationError("ray direction must be a unit vector");
    const auto hit = bvh_.cast(triangles_, origin, dir);
    if (!hit) return std::nullopt;
    return SceneHit{hit->t, hit->triangle, triangles_[hit->triangle].tag};
  }

 private:
  std::vector<Triangle> triangles_;
  Bvh bvh_;
  Aabb bounds_;
};

/// Assembles terrain and rock triangles into one queryable scene.
inline Scene build_scene(std::vector<Triangle> terrain,
                         const std::vector<Triangle>& rocks = {}) {
  terrain.insert(terrain.end(), rocks.begin(), rocks.end());
  return Scene::build(std::move(terrain));
}

}  // namespace regolith
