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

#include "regolith/odometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "regolith/terrain.hpp"
#include "test_support.hpp"

namespace regolith {
namespace {

using test_support::flat_field;

Scene rocky_scene() {
  Heightfield hf = flat_field(21, 21, 1.0);
  for (int j = 0; j < 21; ++j)
    for (int i = 0; i < 21; ++i)
      hf.at(i, j) = 0.8 * std::sin(0.6 * i) * std::cos(0.5 * j);
  RockPopulation boulders;
  boulders.density = 0.04;
  boulders.diameter_min = 0.8;
  boulders.diameter_max = 2.0;
  boulders.seed = 1;
  RockPopulation pebbles;
  pebbles.density = 0.2;
  pebbles.diameter_min = 0.2;
  pebbles.diameter_max = 0.5;
  pebbles.seed = 2;
  const std::vector<RockPopulation> pops = {boulders, pebbles};
  const auto placements = scatter_rocks(hf, pops, 8);
  return build_scene(displace_plane(hf), instantiate_rocks(placements, pops));
}

LidarModel odom_lidar() {
  LidarModel m;
  m.az_fov = 360.0;
  m.az_res = 0.5;
  m.el_fov = 40.0;
  m.el_res = 1.5;
  m.max_range = 25.0;
  m.rate = 10.0;
  return m;
}

OdometryParams odom_params() {
  OdometryParams params;
  params.voxel = 0.1;
  return params;
}

TEST(Odometry, StaticSensorStaysAtIdentity) {
  const Scene scene = rocky_scene();
  const LidarModel m = odom_lidar();
  const PoseStamped pose{0.0, Vec3(10, 10, 1.2), Quat::Identity()};
  const Scan scan = simulate_lidar_scan(scene, pose, m);

  std::vector<TimedCloud> frames;
  for (int k = 0; k < 4; ++k) frames.push_back({k * 0.1, scan.valid_points()});

  const OdometryResult r = run_odometry(frames, odom_params());
  ASSERT_EQ(r.trajectory.size(), frames.size());
  EXPECT_TRUE(r.skipped_frames.empty());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    EXPECT_LT(r.trajectory.poses[k].p.norm(), 1e-9);
    EXPECT_LT(rotation_distance(r.trajectory.poses[k].q, Quat::Identity()), 1e-9);
    EXPECT_EQ(r.trajectory.poses[k].t, frames[k].stamp);
  }
}

// Noiseless 1 m straight run at 0.05 m/frame: final position error below 2%
// of the travelled distance, with ground truth from the simulator.
TEST(Odometry, StraightRunTracksGroundTruth) {
  const Scene scene = rocky_scene();
  const LidarModel m = odom_lidar();

  std::vector<TimedCloud> frames;
  std::vector<Vec3> gt_positions;
  const int n = 21;  // 1 m at 0.05 m per frame
  for (int k = 0; k < n; ++k) {
    const Vec3 p(7.0 + 0.05 * k, 6.0, 1.2);
    const PoseStamped pose{k * 0.1, p, Quat::Identity()};
    const Scan scan = simulate_lidar_scan(scene, pose, m);
    frames.push_back({pose.t, scan.valid_points()});
    gt_positions.push_back(p);
  }

  const OdometryResult r = run_odometry(frames, odom_params());
  EXPECT_TRUE(r.skipped_frames.empty());
  // Odometry starts at identity; ground truth relative to the first pose.
  const Vec3 final_rel_est = r.trajectory.poses.back().p;
  const Vec3 final_rel_gt = gt_positions.back() - gt_positions.front();
  EXPECT_LT((final_rel_est - final_rel_gt).norm(), 0.02 * 1.0)
      << "estimated " << final_rel_est.transpose() << " vs "
      << final_rel_gt.transpose();
}

TEST(Odometry, OutputTimestampsMatchInputFrames) {
  const Scene scene = rocky_scene();
  const LidarModel m = odom_lidar();
  std::vector<TimedCloud> frames;
  for (int k = 0; k < 3; ++k) {
    const PoseStamped pose{0.3 + k * 0.1, Vec3(10 + 0.05 * k, 10, 1.2),
                           Quat::Identity()};
    frames.push_back({pose.t, simulate_lidar_scan(scene, pose, m).valid_points()});
  }
  const OdometryResult r = run_odometry(frames);
  ASSERT_EQ(r.trajectory.size(), 3u);
  for (std::size_t k = 0; k < frames.size(); ++k)
    EXPECT_EQ(r.trajectory.poses[k].t, frames[k].stamp);
  r.trajectory.validate();
}

TEST(Odometry, DegenerateFramesFlaggedNotFatal) {
  // Flat-ground scans: every registration is unconstrained in x, y, yaw.
  Heightfield hf = flat_field(41, 41, 1.0);
  const Scene scene = build_scene(displace_plane(hf));
  const LidarModel m = odom_lidar();

  std::vector<TimedCloud> frames;
  for (int k = 0; k < 3; ++k) {
    const PoseStamped pose{k * 0.1, Vec3(20 + 0.05 * k, 20, 1.2), Quat::Identity()};
    frames.push_back({pose.t, simulate_lidar_scan(scene, pose, m).valid_points()});
  }
  const OdometryResult r = run_odometry(frames);
  EXPECT_EQ(r.skipped_frames.size(), 2u);  // both registrations degenerate
  EXPECT_EQ(r.trajectory.size(), 3u);      // poses still emitted
}

TEST(Odometry, RequiresAtLeastTwoFrames) {
  std::vector<TimedCloud> frames(1);
  EXPECT_THROW(run_odometry(frames), ValidationError);
}

}  // namespace
}  // namespace regolith
