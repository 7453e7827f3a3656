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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

/// Minimum ray parameter accepted as a hit; rejects self-intersections at
/// the ray origin.
inline constexpr double kRayEpsilon = 1e-6;

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  std::int32_t triangle = -1;
};

/// Watertight-enough Moller-Trumbore test. Returns the ray parameter of the
/// intersection if it lies in (t_min, t_max).
inline std::optional<double> intersect_triangle(const Triangle& tri,
                                                const Vec3& origin,
                                                const Vec3& dir, double t_min,
                                                double t_max) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;  // parallel
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - tri.a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= t_min || t >= t_max) return std::nullopt;
  return t;
}

inline bool intersect_aabb(const Aabb& box, const Vec3& origin,
                           const Vec3& inv_dir, double t_min, double t_max) {
  for (int axis = 0; axis < 3; ++axis) {
    double t0 = (box.min[axis] - origin[axis]) * inv_dir[axis];
    double t1 = (box.max[axis] - origin[axis]) * inv_dir[axis];
    if (inv_dir[axis] < 0.0) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
    if (t_max < t_min) return false;
  }
  return true;
}

/// Binned-SAH bounding volume hierarchy over a triangle array. The tree
/// stores indices into the caller's array; build order is deterministic.
class Bvh {
 public:
  Bvh() = default;

  explicit Bvh(const std::vector<Triangle>& tris) { build(tris); }

  void build(const std::vector<Triangle>& tris) {
    nodes_.clear();
    order_.resize(tris.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (tris.empty()) return;

    boxes_.resize(tris.size());
    centroids_.resize(tris.size());
    for (std::size_t i = 0; i < tris.size(); ++i) {
      boxes_[i] = tris[i].bounds();
      centroids_[i] = tris[i].centroid();
    }
    nodes_.reserve(2 * tris.size());
    build_node(0, static_cast<std::uint32_t>(tris.size()));
    boxes_.clear();
    boxes_.shrink_to_fit();
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  bool empty() const { return nodes_.empty(); }

  /// Nearest intersection along the ray, or nullopt. Exact ties on t are
  /// broken toward the lower triangle index, matching a linear scan.
  std::optional<RayHit> cast(const std::vector<Triangle>& tris,
                             const Vec3& origin, const Vec3& dir,
                             double t_min = kRayEpsilon,
                             double t_max = std::numeric_limits<double>::infinity()) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_dir = dir.cwiseInverse();
    RayHit best;
    best.t = t_max;

    std::uint32_t stack[256];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!intersect_aabb(node.box, origin, inv_dir, t_min, best.t)) continue;
      if (node.count > 0) {
        for (std::uint32_t k = 0; k < node.count; ++k) {
          const std::uint32_t idx = order_[node.first_or_right + k];
          if (auto t = intersect_triangle(tris[idx], origin, dir, t_min, best.t)) {
            if (*t < best.t ||
                (*t == best.t && static_cast<std::int32_t>(idx) < best.triangle)) {
              best.t = *t;
              best.triangle = static_cast<std::int32_t>(idx);
            }
          }
        }
      } else {
        // Near child first: left child is node index + 1.
        const std::uint32_t node_index =
            static_cast<std::uint32_t>(&node - nodes_.data());
        std::uint32_t near = node_index + 1;
        std::uint32_t far = node.first_or_right;
        if (dir[node.axis] < 0.0) std::swap(near, far);
        stack[top++] = far;
        stack[top++] = near;
      }
    }
    if (best.triangle < 0) return std::nullopt;
    return best;
  }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first_or_right = 0;  // leaf: first index in order_; inner: right child
    std::uint32_t count = 0;           // leaf: triangle count; inner: 0
    std::uint8_t axis = 0;
  };

  static constexpr std::uint32_t kMaxLeafSize = 4;
  static constexpr int kNumBins = 12;

  std::uint32_t build_node(std::uint32_t first, std::uint32_t count) {
    const std::uint32_t node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box, centroid_box;
    for (std::uint32_t k = 0; k < count; ++k) {
      box.expand(boxes_[order_[first + k]]);
      centroid_box.expand(centroids_[order_[first + k]]);
    }
    nodes_[node_index].box = box;

    const Vec3 extent = centroid_box.extent();
    int axis = 0;
    if (extent.y() > extent.x()) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;

    bool make_leaf = count <= kMaxLeafSize || extent[axis] <= 0.0;
    std::uint32_t mid = first + count / 2;

    if (!make_leaf) {
      // Binned SAH along the widest centroid axis.
      struct Bin {
        Aabb box;
        std::uint32_t count = 0;
      };
      Bin bins[kNumBins];
      const double lo = centroid_box.min[axis];
      const double scale = kNumBins / extent[axis];
      auto bin_of = [&](std::uint32_t tri) {
        const int b = static_cast<int>((centroids_[tri][axis] - lo) * scale);
        return std::clamp(b, 0, kNumBins - 1);
      };
      for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t tri = order_[first + k];
        Bin& bin = bins[bin_of(tri)];
        bin.box.expand(boxes_[tri]);
        bin.count++;
      }
      double best_cost = std::numeric_limits<double>::infinity();
      int best_split = -1;
      for (int split = 1; split < kNumBins; ++split) {
        Aabb left_box, right_box;
        std::uint32_t left_count = 0, right_count = 0;
        for (int b = 0; b < split; ++b) {
          if (bins[b].count) left_box.expand(bins[b].box);
          left_count += bins[b].count;
        }
        for (int b = split; b < kNumBins; ++b) {
          if (bins[b].count) right_box.expand(bins[b].box);
          right_count += bins[b].count;
        }
        if (left_count == 0 || right_count == 0) continue;
        const double cost = left_count * left_box.surface_area() +
                            right_count * right_box.surface_area();
        if (cost < best_cost) {
          best_cost = cost;
          best_split = split;
        }
      }
      if (best_split < 0) {
        make_leaf = count <= 4 * kMaxLeafSize;
        if (!make_leaf) {
          // All centroids in one bin: median split by (centroid, index).
          std::sort(order_.begin() + first, order_.begin() + first + count,
                    [&](std::uint32_t a, std::uint32_t b) {
                      const double ca = centroids_[a][axis];
                      const double cb = centroids_[b][axis];
                      return ca < cb || (ca == cb && a < b);
                    });
          mid = first + count / 2;
        }
      } else {
        auto it = std::stable_partition(
            order_.begin() + first, order_.begin() + first + count,
            [&](std::uint32_t tri) { return bin_of(tri) < best_split; });
        mid = static_cast<std::uint32_t>(it - order_.begin());
      }
    }

    if (make_leaf) {
      nodes_[node_index].first_or_right = first;
      nodes_[node_index].count = count;
      return node_index;
    }

    nodes_[node_index].axis = static_cast<std::uint8_t>(axis);
    build_node(first, mid - first);  // left child lands at node_index + 1
    const std::uint32_t right = build_node(mid, first + count - mid);
    nodes_[node_index].first_or_right = right;
    nodes_[node_index].count = 0;
    return node_index;
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  // Build-time scratch.
  std::vector<Aabb> boxes_;
  std::vector<Vec3> centroids_;
};

}  // namespace regolith
