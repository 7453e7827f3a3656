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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "regolith/geometry.hpp"

namespace regolith {

/// A stamped sensor pose. The quaternion rotates sensor-frame vectors into
/// the world frame.
struct PoseStamped {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
};

struct Trajectory {
  std::vector<PoseStamped> poses;
  std::string frame = "world";

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  double duration() const {
    return poses.empty() ? 0.0 : poses.back().t - poses.front().t;
  }

  void validate() const {
    for (std::size_t i = 0; i < poses.size(); ++i) {
      const PoseStamped& pose = poses[i];
      if (!std::isfinite(pose.t) || !pose.p.allFinite())
        throw ValidationError("trajectory pose " + std::to_string(i) +
                              " has non-finite fields");
      if (std::abs(pose.q.norm() - 1.0) > 1e-9)
        throw ValidationError("trajectory pose " + std::to_string(i) +
                              " has a non-unit quaternion");
      if (i > 0 && !(poses[i - 1].t < pose.t))
        throw ValidationError("trajectory timestamps not strictly increasing at index " +
                              std::to_string(i));
    }
  }
};

struct TumReadResult {
  Trajectory trajectory;
  int renormalized_quaternions = 0;  // inputs that needed renormalization
};

/// Reads a TUM trajectory file: "t tx ty tz qx qy qz qw" per line, '#'
/// comments allowed. Non-unit quaternions are renormalized and counted.
inline TumReadResult read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory: " + path.string());

  TumReadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ls(line);
    double f[8];
    int parsed = 0;
    while (parsed < 8 && (ls >> f[parsed])) ++parsed;
    std::string extra;
    if (parsed != 8 || (ls >> extra))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 8 fields 't tx ty tz qx qy qz qw'");

    PoseStamped pose;
    pose.t = f[0];
    pose.p = Vec3(f[1], f[2], f[3]);
    Quat q(f[7], f[4], f[5], f[6]);  // Eigen order (w, x, y, z)
    const double norm = q.norm();
    if (!(norm > 1e-12))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": zero-norm quaternion");
    if (std::abs(norm - 1.0) > 1e-9) ++result.renormalized_quaternions;
    pose.q = q.normalized();

    if (!result.trajectory.poses.empty() &&
        !(result.trajectory.poses.back().t < pose.t))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": timestamps not strictly increasing");
    result.trajectory.poses.push_back(pose);
  }
  return result;
}

/// Writes a TUM trajectory with round-trip-exact precision.
inline void write_tum(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "# t tx ty tz qx qy qz qw\n";
  char line[256];
  for (const PoseStamped& pose : traj.poses) {
    std::snprintf(line, sizeof(line),
                  "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", pose.t,
                  pose.p.x(), pose.p.y(), pose.p.z(), pose.q.x(), pose.q.y(),
                  pose.q.z(), pose.q.w());
    out << line;
  }
  if (!out) throw IoError("error while writing: " + path.string());
}

}  // namespace regolith
