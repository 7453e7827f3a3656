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
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "regolith/geometry.hpp"
#include "regolith/parallel.hpp"
#include "regolith/rng.hpp"
#include "regolith/scene.hpp"
#include "regolith/trajectory.hpp"

namespace regolith {

/// Scanning range sensor on a regular azimuth x elevation grid centered on
/// the sensor's +X axis. Azimuth positive toward +Y, elevation toward +Z.
struct LidarModel {
  double az_fov = 90.0;   // degrees
  double el_fov = 30.0;   // degrees
  double az_res = 0.2;    // degrees per beam
  double el_res = 0.4;    // degrees per beam
  double max_range = 100.0;        // m
  double rate = 10.0;              // Hz
  double range_noise_sigma = 0.0;  // m, 1-sigma on returned distance
  std::uint64_t seed = 0;

  /// Forward-facing stock preset.
  static LidarModel default_model() { return LidarModel{}; }

  /// Spinning 64-plane preset with full horizontal coverage.
  static LidarModel os1_64() {
    LidarModel m;
    m.az_fov = 360.0;
    m.az_res = 360.0 / 1024.0;
    m.el_fov = 33.2;
    m.el_res = 33.2 / 64.0;
    m.max_range = 120.0;
    m.rate = 10.0;
    return m;
  }

  int beams_azimuth() const { return static_cast<int>(std::lround(az_fov / az_res)); }
  int beams_elevation() const { return static_cast<int>(std::lround(el_fov / el_res)); }

  void validate() const {
    if (!(az_fov > 0.0 && el_fov > 0.0))
      throw ValidationError("lidar fov must be > 0");
    if (!(az_res > 0.0 && el_res > 0.0))
      throw ValidationError("lidar resolution must be > 0");
    if (!(max_range > 0.0)) throw ValidationError("lidar max_range must be > 0");
    if (!(rate > 0.0)) throw ValidationError("lidar rate must be > 0");
    if (!(range_noise_sigma >= 0.0))
      throw ValidationError("lidar range_noise_sigma must be >= 0");
  }
};

/// Stereo depth camera. Square-pixel pinhole; focal lengths derive from the
/// fields of view.
struct StereoModel {
  int width = 1280;
  int height = 720;
  double h_fov = 90.0;  // degrees
  double v_fov = 60.0;  // degrees
  double baseline = 0.12;  // m
  double rate = 30.0;      // Hz

  static StereoModel default_model() { return StereoModel{}; }

  double focal_px() const { return width / (2.0 * std::tan(deg_to_rad(h_fov) / 2.0)); }
  double focal_py() const { return height / (2.0 * std::tan(deg_to_rad(v_fov) / 2.0)); }

  void validate() const {
    if (width < 1 || height < 1)
      throw ValidationError("stereo resolution must be at least 1x1");
    if (!(h_fov > 0.0 && h_fov < 180.0 && v_fov > 0.0 && v_fov < 180.0))
      throw ValidationError("stereo fov must be in (0, 180) degrees");
    if (!(baseline > 0.0)) throw ValidationError("stereo baseline must be > 0");
    if (!(rate > 0.0)) throw ValidationError("stereo rate must be > 0");
  }
};

/// One sensor revolution/frame: points in the sensor frame plus the emitting
/// ground-truth pose. Invalid beams keep a zero point and a false flag.
struct Scan {
  double stamp = 0.0;
  PoseStamped pose;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (auto v : valid) n += v != 0;
    return n;
  }

  std::vector<Vec3> valid_points() const {
    std::vector<Vec3> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      if (valid[i]) out.push_back(points[i]);
    return out;
  }
};

/// Depth + disparity images from one stereo frame. Misses hold +inf depth
/// and zero disparity.
struct DepthFrame {
  double stamp = 0.0;
  PoseStamped pose;
  int width = 0;
  int height = 0;
  std::vector<double> depth;      // row-major, m
  std::vector<double> disparity;  // row-major, px

  double depth_at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  double disparity_at(int u, int v) const { return disparity[static_cast<std::size_t>(v) * width + u]; }
};

/// Simulates one full scan from the given pose. Beam noise is seeded per
/// (model seed, frame index, beam index), so results do not depend on
/// evaluation order or worker count. Gaussian range noise is truncated at
/// +/- 3 sigma, which keeps every valid return within
/// max_range + 3*range_noise_sigma of the sensor.
inline Scan simulate_lidar_scan(const Scene& scene, const PoseStamped& pose,
                                const LidarModel& model,
                                std::uint64_t frame_index = 0) {
  model.validate();
  const int n_az = model.beams_azimuth();
  const int n_el = model.beams_elevation();
  const double az_step = deg_to_rad(model.az_fov) / n_az;
  const double el_step = deg_to_rad(model.el_fov) / n_el;
  const double az_lo = -deg_to_rad(model.az_fov) / 2.0;
  const double el_lo = -deg_to_rad(model.el_fov) / 2.0;

  Scan scan;
  scan.stamp = pose.t;
  scan.pose = pose;
  scan.points.assign(static_cast<std::size_t>(n_az) * n_el, Vec3::Zero());
  scan.valid.assign(static_cast<std::size_t>(n_az) * n_el, 0);

  const Mat3 R = pose.q.toRotationMatrix();
  const std::uint64_t frame_seed = mix_seed(model.seed, frame_index);

  // Rows are independent; beam noise is seeded by (frame, beam), so the
  // result does not depend on the worker count.
  parallel_for(0, static_cast<std::size_t>(n_el), [&](std::size_t row) {
    const double el = el_lo + (row + 0.5) * el_step;
    const double cos_el = std::cos(el), sin_el = std::sin(el);
    for (int col = 0; col < n_az; ++col) {
      const double az = az_lo + (col + 0.5) * az_step;
      const Vec3 dir_sensor(cos_el * std::cos(az), cos_el * std::sin(az), sin_el);
      const std::size_t beam = row * n_az + col;

      const auto hit = scene.ray_cast(pose.p, R * dir_sensor);
      if (!hit || hit->distance > model.max_range) continue;

      double distance = hit->distance;
      if (model.range_noise_sigma > 0.0) {
        Pcg32 rng(mix_seed(frame_seed, beam), /*stream=*/0x6c696472ull);
        const double noise = std::clamp(rng.normal(), -3.0, 3.0) * model.range_noise_sigma;
        distance = std::max(kRayEpsilon, distance + noise);
      }
      scan.points[beam] = distance * dir_sensor;
      scan.valid[beam] = 1;
    }
  });
  return scan;
}

/// Renders one depth/disparity frame through a pinhole at the pose. The
/// optical axis is the sensor's +X; depth is the forward (optical-Z)
/// component of the hit, disparity = focal_px * baseline / depth.
inline DepthFrame simulate_depth_frame(const Scene& scene, const PoseStamped& pose,
                                       const StereoModel& model) {
  model.validate();
  DepthFrame frame;
  frame.stamp = pose.t;
  frame.pose = pose;
  frame.width = model.width;
  frame.height = model.height;
  frame.depth.assign(static_cast<std::size_t>(model.width) * model.height,
                     std::numeric_limits<double>::infinity());
  frame.disparity.assign(static_cast<std::size_t>(model.width) * model.height, 0.0);

  const double fx = model.focal_px();
  const double fy = model.focal_py();
  const double cx = model.width / 2.0;
  const double cy = model.height / 2.0;
  const Mat3 R = pose.q.toRotationMatrix();

  parallel_for(0, static_cast<std::size_t>(model.height), [&](std::size_t v) {
    for (int u = 0; u < model.width; ++u) {
      // Image +u is right (-Y body), +v is down (-Z body).
      const Vec3 dir_sensor =
          Vec3(1.0, -((u + 0.5) - cx) / fx, -((v + 0.5) - cy) / fy).normalized();
      const auto hit = scene.ray_cast(pose.p, R * dir_sensor);
      if (!hit) continue;
      const double depth = hit->distance * dir_sensor.x();
      if (!(depth > 0.0)) continue;
      const std::size_t px = v * model.width + u;
      frame.depth[px] = depth;
      frame.disparity[px] = fx * model.baseline / depth;
    }
  });
  return frame;
}

}  // namespace regolith
