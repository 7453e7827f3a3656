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

#include <cstddef>
#include <vector>

#include "regolith/dataset.hpp"
#include "regolith/icp.hpp"
#include "regolith/trajectory.hpp"

namespace regolith {

struct OdometryParams {
  double voxel = 0.2;  // m, downsampling before registration
  IcpParams icp;
};

struct OdometryResult {
  Trajectory trajectory;                // one pose per input frame
  std::vector<std::size_t> skipped_frames;  // degenerate registrations
  std::vector<double> residuals;        // ICP RMS per registered frame
};

/// Frame-to-frame LiDAR odometry: voxel downsampling plus point-to-plane
/// ICP against the previous scan, initialized with the previous relative
/// motion. Degenerate registrations fall back to that constant-velocity
/// prediction and are reported in skipped_frames, so the output keeps one
/// pose per frame.
inline OdometryResult run_odometry(const std::vector<TimedCloud>& frames,
                                   const OdometryParams& params = OdometryParams{}) {
  if (frames.size() < 2)
    throw ValidationError("odometry requires at least 2 frames");

  OdometryResult result;
  RigidTransform pose = RigidTransform::identity();
  RigidTransform relative = RigidTransform::identity();

  result.trajectory.poses.push_back(
      {frames[0].stamp, pose.t, pose.rotation_quat()});

  std::vector<Vec3> previous = voxel_downsample(frames[0].points, params.voxel);
  for (std::size_t k = 1; k < frames.size(); ++k) {
    std::vector<Vec3> current = voxel_downsample(frames[k].points, params.voxel);
    try {
      const IcpResult icp =
          icp_point_to_plane(current, previous, relative, params.icp);
      relative = icp.transform;
      result.residuals.push_back(icp.residual_rms);
    } catch (const DegenerateGeometryError&) {
      // Keep the constant-velocity prediction and flag the frame.
      result.skipped_frames.push_back(k);
      result.residuals.push_back(-1.0);
    }
    pose = pose.compose(relative);
    result.trajectory.poses.push_back(
        {frames[k].stamp, pose.t, pose.rotation_quat()});
    previous = std::move(current);
  }
  result.trajectory.validate();
  return result;
}

}  // namespace regolith
