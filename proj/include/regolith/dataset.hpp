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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regolith/ply_io.hpp"
#include "regolith/sensors.hpp"
#include "regolith/trajectory.hpp"
#include "regolith/util.hpp"

namespace regolith {

/// A point cloud with its capture time, the unit odometry consumes.
struct TimedCloud {
  double stamp = 0.0;
  std::vector<Vec3> points;  // sensor frame
};

struct DatasetInfo {
  std::filesystem::path directory;
  std::filesystem::path manifest;      // dataset.json
  std::filesystem::path ground_truth;  // TUM file of emitting poses
  std::vector<std::filesystem::path> frames;
};

namespace detail {

inline nlohmann::json lidar_model_json(const LidarModel& m) {
  return {{"az_fov_deg", m.az_fov},   {"el_fov_deg", m.el_fov},
          {"az_res_deg", m.az_res},   {"el_res_deg", m.el_res},
          {"max_range_m", m.max_range}, {"rate_hz", m.rate},
          {"range_noise_sigma_m", m.range_noise_sigma}, {"seed", m.seed}};
}

inline std::string frame_filename(double stamp) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%014.6f.ply", stamp);
  return std::string(buf);
}

/// Emitting pose index per frame on the sensor-rate grid. Every frame must
/// find a trajectory pose within half a sensor period, and no pose may be
/// reused.
inline std::vector<std::size_t> select_frame_poses(const Trajectory& traj,
                                                   double rate) {
  const double period = 1.0 / rate;
  const double t0 = traj.poses.front().t;
  const auto frame_count = static_cast<std::size_t>(
      std::floor(traj.duration() * rate * (1.0 + 1e-12) + 1e-12)) + 1;
  std::vector<std::size_t> indices;
  indices.reserve(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    const double t_frame = t0 + static_cast<double>(f) * period;
    const auto it = std::lower_bound(
        traj.poses.begin(), traj.poses.end(), t_frame,
        [](const PoseStamped& pose, double t) { return pose.t < t; });
    std::size_t idx = static_cast<std::size_t>(it - traj.poses.begin());
    if (idx == traj.poses.size()) {
      idx = traj.poses.size() - 1;
    } else if (idx > 0 &&
               t_frame - traj.poses[idx - 1].t <= traj.poses[idx].t - t_frame) {
      --idx;
    }
    if (std::abs(traj.poses[idx].t - t_frame) > period / 2.0 + 1e-9)
      throw ValidationError(
          "trajectory sampling too sparse for the sensor rate near t=" +
          std::to_string(t_frame));
    if (!indices.empty() && idx == indices.back())
      throw ValidationError(
          "trajectory sampling slower than the sensor rate: pose reused at t=" +
          std::to_string(t_frame));
    indices.push_back(idx);
  }
  return indices;
}

}  // namespace detail

/// Simulates a LiDAR sequence along a trajectory. Frames are taken on the
/// sensor-rate grid; each frame uses the nearest trajectory pose, which must
/// lie within half a sensor period. Writes one PLY of valid points per
/// frame, a TUM file of the emitting poses, and a dataset manifest. Output
/// bytes are a pure function of (scene, trajectory, model).
inline DatasetInfo simulate_sequence(const Scene& scene, const Trajectory& traj,
                                     const LidarModel& model,
                                     const std::filesystem::path& out_dir) {
  model.validate();
  traj.validate();
  if (traj.poses.empty())
    throw ValidationError("simulate_sequence requires a non-empty trajectory");

  const std::vector<std::size_t> pose_indices =
      detail::select_frame_poses(traj, model.rate);
  std::filesystem::create_directories(out_dir / "scans");

  DatasetInfo info;
  info.directory = out_dir;
  info.manifest = out_dir / "dataset.json";
  info.ground_truth = out_dir / "groundtruth.tum";

  Trajectory emitted;
  nlohmann::json frames_json = nlohmann::json::array();
  for (std::size_t f = 0; f < pose_indices.size(); ++f) {
    const PoseStamped& pose = traj.poses[pose_indices[f]];
    const Scan scan = simulate_lidar_scan(scene, pose, model, f);
    const std::string name = detail::frame_filename(scan.stamp);
    write_ply(out_dir / "scans" / name, scan.valid_points());
    emitted.poses.push_back(pose);
    frames_json.push_back({{"t", scan.stamp}, {"file", "scans/" + name}});
    info.frames.push_back(out_dir / "scans" / name);
  }

  write_tum(info.ground_truth, emitted);

  nlohmann::json manifest = {
      {"type", "lidar"},
      {"model", detail::lidar_model_json(model)},
      {"frame_count", pose_indices.size()},
      {"frames", frames_json},
      {"ground_truth", "groundtruth.tum"},
  };
  write_file(info.manifest, manifest.dump(2) + "\n");
  return info;
}

/// Stereo flavor of simulate_sequence: each frame is the depth image
/// back-projected into a sensor-frame point cloud (the miss pixels are
/// skipped). Same dataset layout as the LiDAR writer.
inline DatasetInfo simulate_sequence(const Scene& scene, const Trajectory& traj,
                                     const StereoModel& model,
                                     const std::filesystem::path& out_dir) {
  model.validate();
  traj.validate();
  if (traj.poses.empty())
    throw ValidationError("simulate_sequence requires a non-empty trajectory");

  const std::vector<std::size_t> pose_indices =
      detail::select_frame_poses(traj, model.rate);
  std::filesystem::create_directories(out_dir / "scans");

  DatasetInfo info;
  info.directory = out_dir;
  info.manifest = out_dir / "dataset.json";
  info.ground_truth = out_dir / "groundtruth.tum";

  Trajectory emitted;
  nlohmann::json frames_json = nlohmann::json::array();
  const double fx = model.focal_px();
  const double fy = model.focal_py();
  const double cx = model.width / 2.0;
  const double cy = model.height / 2.0;

  for (std::size_t f = 0; f < pose_indices.size(); ++f) {
    const PoseStamped& pose = traj.poses[pose_indices[f]];
    const DepthFrame frame = simulate_depth_frame(scene, pose, model);
    std::vector<Vec3> points;
    points.reserve(frame.depth.size());
    for (int v = 0; v < frame.height; ++v) {
      for (int u = 0; u < frame.width; ++u) {
        const double z = frame.depth_at(u, v);
        if (!std::isfinite(z)) continue;
        points.emplace_back(z, -z * ((u + 0.5) - cx) / fx,
                            -z * ((v + 0.5) - cy) / fy);
      }
    }
    const std::string name = detail::frame_filename(frame.stamp);
    write_ply(out_dir / "scans" / name, points);
    emitted.poses.push_back(pose);
    frames_json.push_back({{"t", frame.stamp}, {"file", "scans/" + name}});
    info.frames.push_back(out_dir / "scans" / name);
  }

  write_tum(info.ground_truth, emitted);

  nlohmann::json manifest = {
      {"type", "stereo"},
      {"model",
       {{"width", model.width},
        {"height", model.height},
        {"h_fov_deg", model.h_fov},
        {"v_fov_deg", model.v_fov},
        {"baseline_m", model.baseline},
        {"rate_hz", model.rate}}},
      {"frame_count", pose_indices.size()},
      {"frames", frames_json},
      {"ground_truth", "groundtruth.tum"},
  };
  write_file(info.manifest, manifest.dump(2) + "\n");
  return info;
}

/// Loads the frames of a simulated dataset in time order.
inline std::vector<TimedCloud> load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "dataset.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("invalid dataset manifest " + manifest_path.string() + ": " +
                     e.what());
  }
  std::vector<TimedCloud> clouds;
  for (const auto& frame : manifest.at("frames")) {
    TimedCloud cloud;
    cloud.stamp = frame.at("t").get<double>();
    cloud.points = read_ply(dir / frame.at("file").get<std::string>());
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

}  // namespace regolith
