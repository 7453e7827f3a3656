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

#include "regolith/dataset.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>

#include "regolith/terrain.hpp"
#include "test_support.hpp"

namespace regolith {
namespace {

using test_support::flat_field;
using test_support::TempDir;

Trajectory straight_line(double length_m, double rate_hz, double height) {
  Trajectory traj;
  const double dt = 1.0 / rate_hz;
  const int n = static_cast<int>(length_m * rate_hz) + 1;
  for (int k = 0; k < n; ++k)
    traj.poses.push_back({k * dt, Vec3(2.0 + k / rate_hz, 10.0, height),
                          Quat::Identity()});
  return traj;
}

LidarModel sparse_lidar() {
  LidarModel m;
  m.az_fov = 360.0;
  m.az_res = 6.0;
  m.el_fov = 30.0;
  m.el_res = 6.0;
  m.max_range = 40.0;
  m.rate = 10.0;
  return m;
}

std::map<std::string, std::string> hash_tree(const std::filesystem::path& dir) {
  std::map<std::string, std::string> hashes;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file())
      hashes[std::filesystem::relative(entry.path(), dir).generic_string()] =
          hash_file(entry.path());
  return hashes;
}

TEST(PlyIo, RoundTripAtFloatPrecision) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::vector<Vec3> cloud;
  for (int i = 0; i < 5000; ++i) cloud.emplace_back(u(rng), u(rng), u(rng));

  TempDir dir("ply_roundtrip");
  const auto path = dir.path() / "cloud.ply";
  write_ply(path, cloud);
  const auto back = read_ply(path);
  ASSERT_EQ(back.size(), cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int c = 0; c < 3; ++c)
      EXPECT_EQ(static_cast<float>(cloud[i][c]), static_cast<float>(back[i][c]));
}

TEST(PlyIo, RejectsForeignHeaders) {
  TempDir dir("ply_bad");
  const auto path = dir.path() / "bad.ply";
  write_file(path, "ply\nformat ascii 1.0\nend_header\n");
  EXPECT_THROW(read_ply(path), ParseError);
  write_file(path, "not a ply\n");
  EXPECT_THROW(read_ply(path), ParseError);
}

TEST(Dataset, TenSecondsAtTenHzGives101Frames) {
  const Scene scene = build_scene(displace_plane(flat_field(21, 21, 1.0)));
  const Trajectory traj = straight_line(10.0, 10.0, 1.0);  // 10 s
  TempDir dir("dataset_101");
  const DatasetInfo info =
      simulate_sequence(scene, traj, sparse_lidar(), dir.path() / "ds");
  EXPECT_EQ(info.frames.size(), 101u);

  const Trajectory gt = read_tum(info.ground_truth).trajectory;
  EXPECT_EQ(gt.size(), info.frames.size());
  for (const auto& frame : info.frames)
    EXPECT_TRUE(std::filesystem::exists(frame));
}

TEST(Dataset, RerunIsByteIdentical) {
  const Scene scene = build_scene(displace_plane(flat_field(21, 21, 1.0)));
  Trajectory traj = straight_line(3.0, 10.0, 1.0);
  LidarModel m = sparse_lidar();
  m.range_noise_sigma = 0.02;  // exercise the seeded noise path
  m.seed = 9;

  TempDir dir("dataset_determinism");
  simulate_sequence(scene, traj, m, dir.path() / "a");
  simulate_sequence(scene, traj, m, dir.path() / "b");
  EXPECT_EQ(hash_tree(dir.path() / "a"), hash_tree(dir.path() / "b"));
}

TEST(Dataset, LoadDatasetReturnsFramesInOrder) {
  const Scene scene = build_scene(displace_plane(flat_field(21, 21, 1.0)));
  const Trajectory traj = straight_line(2.0, 10.0, 1.0);
  TempDir dir("dataset_load");
  const DatasetInfo info =
      simulate_sequence(scene, traj, sparse_lidar(), dir.path() / "ds");
  const auto clouds = load_dataset(dir.path() / "ds");
  ASSERT_EQ(clouds.size(), info.frames.size());
  for (std::size_t k = 1; k < clouds.size(); ++k)
    EXPECT_LT(clouds[k - 1].stamp, clouds[k].stamp);
  EXPECT_GT(clouds[0].points.size(), 10u);
}

TEST(Dataset, StereoSequenceBackProjectsOntoScene) {
  // Ramp cells are planar, so the bilinear sample equals the mesh surface.
  Heightfield hf = flat_field(21, 21, 1.0);
  for (int j = 0; j < 21; ++j)
    for (int i = 0; i < 21; ++i) hf.at(i, j) = 0.08 * i + 0.03 * j;
  const Scene scene = build_scene(displace_plane(hf));

  StereoModel m;
  m.width = 32;
  m.height = 16;
  m.rate = 10.0;
  const Trajectory traj = straight_line(2.0, 10.0, 1.3);
  TempDir dir("dataset_stereo");
  const DatasetInfo info = simulate_sequence(scene, traj, m, dir.path() / "ds");
  EXPECT_EQ(info.frames.size(), 21u);

  const auto manifest = nlohmann::json::parse(read_file(info.manifest));
  EXPECT_EQ(manifest.at("type").get<std::string>(), "stereo");

  // Back-projected points, mapped to world via the emitting pose, must land
  // on the scene surface.
  const auto clouds = load_dataset(dir.path() / "ds");
  const Trajectory gt = read_tum(info.ground_truth).trajectory;
  ASSERT_EQ(clouds.size(), gt.size());
  int checked = 0;
  for (std::size_t k = 0; k < clouds.size(); k += 7) {
    const Mat3 R = gt.poses[k].q.toRotationMatrix();
    for (std::size_t i = 0; i < clouds[k].points.size(); i += 11) {
      const Vec3 world = R * clouds[k].points[i] + gt.poses[k].p;
      EXPECT_NEAR(world.z(), hf.sample(world.x(), world.y()), 2e-3);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Dataset, SparseTrajectoryRejected) {
  const Scene scene = build_scene(displace_plane(flat_field(21, 21, 1.0)));
  Trajectory traj;  // 1 Hz poses cannot serve a 10 Hz sensor
  for (int k = 0; k < 5; ++k)
    traj.poses.push_back({static_cast<double>(k), Vec3(2 + k, 10, 1), Quat::Identity()});
  TempDir dir("dataset_sparse");
  EXPECT_THROW(simulate_sequence(scene, traj, sparse_lidar(), dir.path() / "ds"),
               ValidationError);
}

}  // namespace
}  // namespace regolith
