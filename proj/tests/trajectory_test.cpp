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

#include "regolith/trajectory.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "test_support.hpp"

namespace regolith {
namespace {

using test_support::TempDir;

TEST(TumIo, CommentsOnlyFileGivesEmptyTrajectory) {
  TempDir dir("tum_comments");
  const auto path = dir.path() / "empty.tum";
  std::ofstream(path) << "# a comment\n\n   # another\n";
  const TumReadResult r = read_tum(path);
  EXPECT_TRUE(r.trajectory.empty());
  EXPECT_EQ(r.renormalized_quaternions, 0);
}

TEST(TumIo, RoundTripOfRandomPosesIsExact) {
  std::mt19937_64 rng(99);
  const Trajectory traj = test_support::random_trajectory(rng, 1000, 50.0);
  TempDir dir("tum_roundtrip");
  const auto path = dir.path() / "poses.tum";
  write_tum(path, traj);
  const Trajectory back = read_tum(path).trajectory;
  ASSERT_EQ(back.size(), traj.size());
  double max_err = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    max_err = std::max(max_err, std::abs(back.poses[i].t - traj.poses[i].t));
    max_err = std::max(max_err,
                       (back.poses[i].p - traj.poses[i].p).cwiseAbs().maxCoeff());
    max_err = std::max(max_err, (back.poses[i].q.coeffs() -
                                 traj.poses[i].q.coeffs()).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(max_err, 1e-9);
}

TEST(TumIo, SevenFieldLineNamesTheLine) {
  TempDir dir("tum_arity");
  const auto path = dir.path() / "short.tum";
  std::ofstream(path) << "# header\n0 1 2 3 0 0 0 1\n1 1 2 3 0 0 0\n";
  try {
    read_tum(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST(TumIo, ExtraFieldIsAnError) {
  TempDir dir("tum_extra");
  const auto path = dir.path() / "long.tum";
  std::ofstream(path) << "0 1 2 3 0 0 0 1 42\n";
  EXPECT_THROW(read_tum(path), ParseError);
}

TEST(TumIo, NonIncreasingTimestampsRejected) {
  TempDir dir("tum_time");
  const auto path = dir.path() / "backwards.tum";
  std::ofstream(path) << "1 0 0 0 0 0 0 1\n1 1 0 0 0 0 0 1\n";
  EXPECT_THROW(read_tum(path), ParseError);
}

TEST(TumIo, NonUnitQuaternionsRenormalizedAndCounted) {
  TempDir dir("tum_norm");
  const auto path = dir.path() / "unnormalized.tum";
  std::ofstream(path) << "0 0 0 0 0 0 0 2\n1 0 0 0 0 0 0 1\n";
  const TumReadResult r = read_tum(path);
  EXPECT_EQ(r.renormalized_quaternions, 1);
  EXPECT_NEAR(r.trajectory.poses[0].q.norm(), 1.0, 1e-15);
  EXPECT_NEAR(r.trajectory.poses[0].q.w(), 1.0, 1e-15);
}

TEST(TumIo, ZeroQuaternionRejected) {
  TempDir dir("tum_zero");
  const auto path = dir.path() / "zero.tum";
  std::ofstream(path) << "0 0 0 0 0 0 0 0\n";
  EXPECT_THROW(read_tum(path), ParseError);
}

TEST(Trajectory, ValidateChecksInvariants) {
  Trajectory traj;
  traj.poses.push_back({0.0, Vec3::Zero(), Quat::Identity()});
  traj.poses.push_back({1.0, Vec3(1, 0, 0), Quat::Identity()});
  EXPECT_NO_THROW(traj.validate());

  traj.poses[1].t = 0.0;
  EXPECT_THROW(traj.validate(), ValidationError);
  traj.poses[1].t = 1.0;
  traj.poses[1].q = Quat(2, 0, 0, 0);
  EXPECT_THROW(traj.validate(), ValidationError);
}

}  // namespace
}  // namespace regolith
