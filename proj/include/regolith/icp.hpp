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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <utility>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

namespace detail {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      h ^= u;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline CellKey cell_of(const Vec3& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

/// Uniform hash grid over a fixed point set for radius queries.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& points, double cell)
      : points_(points), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i)
      cells_[cell_of(points[i], cell)].push_back(static_cast<std::uint32_t>(i));
  }

  /// Index of the nearest point within max_dist, or -1.
  std::int64_t nearest(const Vec3& query, double max_dist) const {
    const CellKey center = cell_of(query, cell_);
    const auto reach = static_cast<std::int64_t>(std::ceil(max_dist / cell_));
    double best_sq = max_dist * max_dist;
    std::int64_t best = -1;
    for (std::int64_t dz = -reach; dz <= reach; ++dz)
      for (std::int64_t dy = -reach; dy <= reach; ++dy)
        for (std::int64_t dx = -reach; dx <= reach; ++dx) {
          const auto it = cells_.find({center.x + dx, center.y + dy, center.z + dz});
          if (it == cells_.end()) continue;
          for (std::uint32_t idx : it->second) {
            const double d_sq = (points_[idx] - query).squaredNorm();
            if (d_sq < best_sq ||
                (d_sq == best_sq && best >= 0 && idx < best)) {
              best_sq = d_sq;
              best = idx;
            }
          }
        }
    return best;
  }

  template <typename Fn>
  void for_each_within(const Vec3& query, double radius, Fn&& fn) const {
    const CellKey center = cell_of(query, cell_);
    const auto reach = static_cast<std::int64_t>(std::ceil(radius / cell_));
    const double r_sq = radius * radius;
    for (std::int64_t dz = -reach; dz <= reach; ++dz)
      for (std::int64_t dy = -reach; dy <= reach; ++dy)
        for (std::int64_t dx = -reach; dx <= reach; ++dx) {
          const auto it = cells_.find({center.x + dx, center.y + dy, center.z + dz});
          if (it == cells_.end()) continue;
          for (std::uint32_t idx : it->second)
            if ((points_[idx] - query).squaredNorm() <= r_sq) fn(idx);
        }
  }

 private:
  const std::vector<Vec3>& points_;
  double cell_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

}  // namespace detail

/// Replaces all points within each occupied voxel by their centroid.
/// Output order follows the first occurrence of each voxel in the input.
inline std::vector<Vec3> voxel_downsample(const std::vector<Vec3>& points,
                                          double voxel) {
  if (!(voxel > 0.0)) throw ValidationError("voxel size must be > 0");
  std::unordered_map<detail::CellKey, std::uint32_t, detail::CellKeyHash> slots;
  std::vector<Vec3> sums;
  std::vector<std::uint32_t> counts;
  for (const Vec3& p : points) {
    const auto [it, inserted] = slots.try_emplace(
        detail::cell_of(p, voxel), static_cast<std::uint32_t>(sums.size()));
    if (inserted) {
      sums.push_back(p);
      counts.push_back(1);
    } else {
      sums[it->second] += p;
      counts[it->second] += 1;
    }
  }
  for (std::size_t i = 0; i < sums.size(); ++i) sums[i] /= counts[i];
  return sums;
}

/// Local plane fits: unit normal (smallest covariance eigenvector) plus the
/// fitted patch centroid per point.
struct SurfacePatches {
  std::vector<Vec3> normals;    // zero normal = no reliable fit
  std::vector<Vec3> centroids;  // patch mean; the fitted plane runs through it
};

/// Fits a plane to the nearest neighbors of each point within the radius,
/// capped at a small count so the patch stays local on curved geometry.
/// Points whose neighborhood is too small or not genuinely two-dimensional
/// (a single scan-ring arc) get a zero normal and are skipped by
/// registration.
inline SurfacePatches fit_surface_patches(const std::vector<Vec3>& points,
                                          double radius = 1.0,
                                          int min_neighbors = 5,
                                          int max_neighbors = 16) {
  SurfacePatches patches;
  patches.normals.assign(points.size(), Vec3::Zero());
  patches.centroids = points;
  if (points.empty()) return patches;
  const detail::PointGrid grid(points, radius);
  std::vector<std::pair<double, std::uint32_t>> near;
  for (std::size_t i = 0; i < points.size(); ++i) {
    near.clear();
    grid.for_each_within(points[i], radius, [&](std::uint32_t j) {
      near.emplace_back((points[j] - points[i]).squaredNorm(), j);
    });
    if (static_cast<int>(near.size()) < min_neighbors) continue;
    const std::size_t k =
        std::min(near.size(), static_cast<std::size_t>(max_neighbors));
    std::partial_sort(near.begin(), near.begin() + k, near.end());

    Vec3 mean = Vec3::Zero();
    for (std::size_t n = 0; n < k; ++n) mean += points[near[n].second];
    mean /= static_cast<double>(k);
    Mat3 cov = Mat3::Zero();
    for (std::size_t n = 0; n < k; ++n) {
      const Vec3 d = points[near[n].second] - mean;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    // A plane fit needs spread in two directions; a single scan-ring arc has
    // lambda_1 ~ 0 and its smallest eigenvector is arbitrary.
    if (eig.eigenvalues()(1) < 1e-3 * eig.eigenvalues()(2)) continue;
    patches.normals[i] = eig.eigenvectors().col(0).normalized();
    patches.centroids[i] = mean;
  }
  return patches;
}

/// Surface normals only; see fit_surface_patches.
inline std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points,
                                          double radius = 1.0,
                                          int min_neighbors = 5,
                                          int max_neighbors = 16) {
  return fit_surface_patches(points, radius, min_neighbors, max_neighbors).normals;
}

/// Flips normals so they face the sensor origin; PCA leaves the sign
/// arbitrary, and the symmetric objective needs consistent orientation.
inline void orient_normals_toward(std::vector<Vec3>& normals,
                                  const std::vector<Vec3>& points,
                                  const Vec3& viewpoint = Vec3::Zero()) {
  for (std::size_t i = 0; i < normals.size(); ++i)
    if (normals[i].dot(points[i] - viewpoint) > 0.0) normals[i] = -normals[i];
}

struct IcpParams {
  double max_corr_dist = 1.0;  // m; pairs farther apart are rejected
  int max_iterations = 30;
  double tolerance = 1e-6;     // parameter-update norm for convergence
  double normal_radius = 0.5;  // m, normal estimation neighborhood
  int min_normal_neighbors = 5;
  double degeneracy_condition = 1e8;  // normal-system condition threshold
  // Robust weighting in units of the per-iteration robust sigma.
  double huber_factor = 1.5;  // Huber knee
  double cutoff_factor = 6.0; // hard rejection
};

struct IcpResult {
  RigidTransform transform;  // maps source points into the target frame
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // trimmed RMS per accepted iteration
};

namespace detail {

struct IcpLinearization {
  Eigen::Matrix<double, 6, 6> normal_matrix = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  double trimmed_rms = 0.0;  // RMS of the best 80% residuals; the progress metric
  double plain_rms = 0.0;
  std::size_t pairs = 0;
};

/// Associates source points against the target grid and builds the
/// Huber-weighted point-to-plane normal equations at the given transform.
/// The plane normal of each pair is the symmetric average of the target
/// normal and the (rotated) source normal, which cancels the first-order
/// bias from the two scans sampling the surface at shifted stations.
inline IcpLinearization icp_linearize(const std::vector<Vec3>& source,
                                      const SurfacePatches& source_patches,
                                      const std::vector<Vec3>& target,
                                      const SurfacePatches& target_patches,
                                      const PointGrid& grid,
                                      const RigidTransform& transform,
                                      const IcpParams& params) {
  const double max_corr_dist = params.max_corr_dist;
  struct Pair {
    Vec3 p;
    Vec3 n;
    double r;
  };
  std::vector<Pair> pairs;
  pairs.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3& ns = source_patches.normals[i];
    if (ns.squaredNorm() == 0.0) continue;
    const Vec3 p = transform.apply(source[i]);
    const std::int64_t j = grid.nearest(p, max_corr_dist);
    if (j < 0) continue;
    const Vec3& nq = target_patches.normals[static_cast<std::size_t>(j)];
    if (nq.squaredNorm() == 0.0) continue;
    // Pairs whose normals disagree join different surfaces (occlusion
    // boundaries, facet flips); drop them instead of averaging.
    const Vec3 ns_rot = transform.R * ns;
    if (ns_rot.dot(nq) < 0.5) continue;
    const Vec3 n = 0.5 * (nq + ns_rot);
    pairs.push_back({p, n, n.dot(p - target[static_cast<std::size_t>(j)])});
  }

  IcpLinearization lin;
  lin.pairs = pairs.size();
  if (pairs.empty()) return lin;

  // Robust scale from the median absolute residual; gross outliers are cut,
  // the rest Huber-weighted. The weights steer only the step; progress is
  // judged on the fixed-fraction trimmed RMS, which stays comparable across
  // iterations.
  std::vector<double> abs_r(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) abs_r[k] = std::abs(pairs[k].r);
  std::nth_element(abs_r.begin(), abs_r.begin() + abs_r.size() / 2, abs_r.end());
  const double sigma = std::max(1.4826 * abs_r[abs_r.size() / 2], 1e-9);
  const double huber_delta = params.huber_factor * sigma;
  const double cutoff = params.cutoff_factor * sigma;

  const std::size_t trim_count =
      std::max<std::size_t>(1, (pairs.size() * 8) / 10);
  std::nth_element(abs_r.begin(), abs_r.begin() + (trim_count - 1), abs_r.end());
  double trimmed_sq = 0.0;
  const double trim_limit = abs_r[trim_count - 1];

  double plain_sq = 0.0;
  std::size_t used = 0, trimmed_used = 0;
  for (const Pair& pair : pairs) {
    const double a = std::abs(pair.r);
    plain_sq += pair.r * pair.r;
    if (a <= trim_limit && trimmed_used < trim_count) {
      trimmed_sq += pair.r * pair.r;
      ++trimmed_used;
    }
    if (a > cutoff) continue;
    const double w = a <= huber_delta ? 1.0 : huber_delta / a;
    Eigen::Matrix<double, 6, 1> jac;
    jac.head<3>() = pair.p.cross(pair.n);
    jac.tail<3>() = pair.n;
    lin.normal_matrix += w * jac * jac.transpose();
    lin.rhs -= w * jac * pair.r;
    ++used;
  }
  if (used == 0) {
    lin.pairs = 0;
    return lin;
  }
  lin.pairs = used;
  lin.plain_rms = std::sqrt(plain_sq / static_cast<double>(pairs.size()));
  lin.trimmed_rms = std::sqrt(trimmed_sq / static_cast<double>(trimmed_used));
  return lin;
}

}  // namespace detail

/// Point-to-plane ICP. Iterates nearest-neighbor association against the
/// target (pairs beyond max_corr_dist rejected, the rest Huber-weighted),
/// solves the linearized least squares, and re-orthonormalizes the rotation.
/// Stops when the parameter update drops below the tolerance, the trimmed
/// residual stops improving, or max_iterations is reached. Throws
/// DegenerateGeometryError when the normal system does not constrain all six
/// degrees of freedom (e.g. both clouds on one plane).
inline IcpResult icp_point_to_plane(const std::vector<Vec3>& source,
                                    const std::vector<Vec3>& target,
                                    const RigidTransform& init = RigidTransform::identity(),
                                    const IcpParams& params = IcpParams{}) {
  if (source.size() < 10 || target.size() < 10)
    throw ValidationError("icp requires at least 10 points per cloud");

  SurfacePatches target_patches =
      fit_surface_patches(target, params.normal_radius, params.min_normal_neighbors);
  orient_normals_toward(target_patches.normals, target);
  SurfacePatches source_patches =
      fit_surface_patches(source, params.normal_radius, params.min_normal_neighbors);
  orient_normals_toward(source_patches.normals, source);
  const detail::PointGrid grid(target, params.max_corr_dist);

  RigidTransform current = init;
  RigidTransform best = init;
  double best_trimmed = std::numeric_limits<double>::infinity();
  double best_plain = 0.0;
  IcpResult result;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const detail::IcpLinearization lin =
        detail::icp_linearize(source, source_patches, target, target_patches,
                              grid, current, params);
    if (lin.pairs < 6)
      throw DegenerateGeometryError("icp: fewer than 6 usable correspondences");

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(
        lin.normal_matrix);
    const double lambda_min = eig.eigenvalues()(0);
    const double lambda_max = eig.eigenvalues()(5);
    if (!(lambda_min > 0.0) ||
        lambda_max / lambda_min > params.degeneracy_condition)
      throw DegenerateGeometryError(
          "icp: normal system is ill-conditioned; scan geometry does not "
          "constrain the transform (planar scene)");

    if (lin.trimmed_rms >= best_trimmed - 1e-15 && iter > 0) {
      result.iterations = iter;
      break;  // stopped improving; keep the best transform seen
    }
    best = current;
    best_trimmed = lin.trimmed_rms;
    best_plain = lin.plain_rms;
    result.residual_history.push_back(lin.trimmed_rms);

    const Eigen::Matrix<double, 6, 1> delta =
        eig.eigenvectors() * (eig.eigenvalues().cwiseInverse().asDiagonal() *
                              (eig.eigenvectors().transpose() * lin.rhs));
    const Vec3 omega = delta.head<3>();
    Mat3 delta_r = Mat3::Identity();
    const double angle = omega.norm();
    if (angle > 0.0)
      delta_r = Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
    current.R = delta_r * current.R;
    current.t = delta_r * current.t + delta.tail<3>();
    current.orthonormalize();
    result.iterations = iter + 1;

    if (delta.norm() < params.tolerance) {
      // Converged; score the final transform on fresh correspondences.
      const detail::IcpLinearization final_lin =
          detail::icp_linearize(source, source_patches, target, target_patches,
                                grid, current, params);
      if (final_lin.pairs >= 6 && final_lin.trimmed_rms <= best_trimmed) {
        best = current;
        best_trimmed = final_lin.trimmed_rms;
        best_plain = final_lin.plain_rms;
        result.residual_history.push_back(final_lin.trimmed_rms);
      }
      result.converged = true;
      break;
    }
  }

  result.transform = best;
  result.residual_rms = best_plain;
  return result;
}

}  // namespace regolith
