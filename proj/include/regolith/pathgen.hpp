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
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/geometry.hpp"
#include "regolith/heightfield.hpp"
#include "regolith/rng.hpp"
#include "regolith/trajectory.hpp"
#include "regolith/util.hpp"

namespace regolith {

/// Scripted path over a terrain: piecewise-linear XY waypoints followed at
/// constant speed, with the sensor riding height_offset above the surface.
struct PathSpec {
  std::vector<Vec2> waypoints;
  bool closed = false;
  double speed = 1.0;          // m/s
  double sample_rate = 10.0;   // Hz
  double height_offset = 1.0;  // m above terrain

  void validate() const {
    const std::size_t min_points = closed ? 3 : 2;
    if (waypoints.size() < min_points)
      throw ValidationError("path needs at least " + std::to_string(min_points) +
                            " waypoints");
    if (!(speed > 0.0)) throw ValidationError("path speed must be > 0");
    if (!(sample_rate > 0.0)) throw ValidationError("path sample_rate must be > 0");
  }
};

inline double polyline_length(const std::vector<Vec2>& waypoints, bool closed) {
  double length = 0.0;
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k)
    length += (waypoints[k + 1] - waypoints[k]).norm();
  if (closed && waypoints.size() > 1)
    length += (waypoints.front() - waypoints.back()).norm();
  return length;
}

/// ZYX (roll-pitch-yaw) Euler angles of q, Gazebo pose convention:
/// R = Rz(yaw) Ry(pitch) Rx(roll).
inline Vec3 quat_to_euler_zyx(const Quat& q_in) {
  const Quat q = q_in.normalized();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return Vec3(roll, pitch, yaw);
}

inline Quat euler_zyx_to_quat(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
              Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

/// Samples stamped poses along the path every speed/sample_rate meters.
/// Orientation is yaw-only, following the tangent of the segment the sample
/// lies on; corners snap to the next segment's tangent. Elevation is the
/// bilinear terrain height plus height_offset.
inline Trajectory sample_trajectory(const PathSpec& path, const Heightfield& hf) {
  path.validate();
  hf.validate();
  for (std::size_t k = 0; k < path.waypoints.size(); ++k)
    if (!hf.contains(path.waypoints[k].x(), path.waypoints[k].y()))
      throw ValidationError("waypoint " + std::to_string(k) +
                            " lies outside the heightfield extent");

  std::vector<Vec2> pts = path.waypoints;
  if (path.closed) pts.push_back(pts.front());

  std::vector<double> cumulative{0.0};
  for (std::size_t k = 0; k + 1 < pts.size(); ++k)
    cumulative.push_back(cumulative.back() + (pts[k + 1] - pts[k]).norm());
  const double total = cumulative.back();
  if (!(total > 0.0)) throw ValidationError("path has zero length");

  const double spacing = path.speed / path.sample_rate;
  const auto steps = static_cast<std::size_t>(
      std::floor(total / spacing * (1.0 + 1e-12) + 1e-12));

  Trajectory traj;
  traj.poses.reserve(steps + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = std::min(k * spacing, total);
    while (seg + 2 < pts.size() && s >= cumulative[seg + 1]) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double f = seg_len > 0.0 ? (s - cumulative[seg]) / seg_len : 0.0;
    const Vec2 xy = pts[seg] + f * (pts[seg + 1] - pts[seg]);
    const Vec2 tangent = (pts[seg + 1] - pts[seg]).normalized();

    PoseStamped pose;
    pose.t = static_cast<double>(k) / path.sample_rate;
    pose.p = Vec3(xy.x(), xy.y(), hf.sample(xy.x(), xy.y()) + path.height_offset);
    pose.q = Quat(Eigen::AngleAxisd(std::atan2(tangent.y(), tangent.x()),
                                    Vec3::UnitZ()));
    traj.poses.push_back(pose);
  }
  return traj;
}

/// Composes each orientation with a random small rotation (axis uniform on
/// the sphere, angle ~ Normal(0, sigma_deg)). Positions and timestamps are
/// copied untouched; the result is deterministic in the seed regardless of
/// evaluation order.
inline Trajectory perturb_orientations(const Trajectory& traj, double sigma_deg,
                                       std::uint64_t seed) {
  if (!(sigma_deg >= 0.0)) throw ValidationError("sigma_deg must be >= 0");
  Trajectory out = traj;
  if (sigma_deg == 0.0) return out;
  const double sigma_rad = deg_to_rad(sigma_deg);
  for (std::size_t k = 0; k < out.poses.size(); ++k) {
    Pcg32 rng(mix_seed(seed, k), /*stream=*/0x6f726e74ull);
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 axis(s * std::cos(phi), s * std::sin(phi), z);
    const double angle = rng.normal() * sigma_rad;
    out.poses[k].q = (out.poses[k].q * Quat(Eigen::AngleAxisd(angle, axis))).normalized();
  }
  return out;
}

/// Writes the trajectory as an SDF actor script: one <waypoint> per pose
/// with <time> seconds and <pose> "x y z roll pitch yaw".
inline void export_actor_sdf(const Trajectory& traj,
                             const std::filesystem::path& path,
                             const std::string& actor_name = "rover") {
  std::ostringstream sdf;
  sdf << "<?xml version=\"1.0\"?>\n"
      << "<sdf version=\"1.6\">\n"
      << "  <actor name=\"" << actor_name << "\">\n"
      << "    <script>\n"
      << "      <loop>false</loop>\n"
      << "      <auto_start>true</auto_start>\n"
      << "      <trajectory id=\"0\" type=\"walk\">\n";
  char buf[256];
  for (const PoseStamped& pose : traj.poses) {
    const Vec3 rpy = quat_to_euler_zyx(pose.q);
    std::snprintf(buf, sizeof(buf),
                  "        <waypoint>\n"
                  "          <time>%.17g</time>\n"
                  "          <pose>%.17g %.17g %.17g %.17g %.17g %.17g</pose>\n"
                  "        </waypoint>\n",
                  pose.t, pose.p.x(), pose.p.y(), pose.p.z(), rpy.x(), rpy.y(),
                  rpy.z());
    sdf << buf;
  }
  sdf << "      </trajectory>\n"
      << "    </script>\n"
      << "  </actor>\n"
      << "</sdf>\n";
  write_file(path, sdf.str());
}

}  // namespace regolith
