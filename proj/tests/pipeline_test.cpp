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

#include "regolith/pipeline.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"

namespace regolith {
namespace {

using test_support::TempDir;

void write_mini_raster(const std::filesystem::path& path) {
  std::ofstream out(path);
  out << "ncols 17\nnrows 17\n";
  for (int j = 0; j < 17; ++j) {
    for (int i = 0; i < 17; ++i)
      out << 0.5 + 0.5 * std::sin(0.8 * i) * std::cos(0.6 * j) << ' ';
    out << '\n';
  }
}

BenchConfig mini_config(const std::filesystem::path& dir) {
  write_mini_raster(dir / "mini.asc");
  BenchConfig cfg;
  cfg.terrain.raster = (dir / "mini.asc").string();
  cfg.terrain.cell_size = 1.0;
  cfg.terrain.z_scale = 0.6;
  RockPopulation pop;
  pop.density = 0.15;
  pop.diameter_min = 0.2;
  pop.diameter_max = 0.7;
  pop.seed = 2;
  cfg.rocks = {pop};
  cfg.path.spec.waypoints = {Vec2(3, 3), Vec2(13, 3), Vec2(13, 13), Vec2(3, 13)};
  cfg.path.spec.closed = true;
  cfg.path.spec.speed = 1.0;
  cfg.path.spec.sample_rate = 10.0;
  cfg.path.spec.height_offset = 1.2;
  cfg.sensor.lidar.az_fov = 360.0;
  cfg.sensor.lidar.az_res = 4.0;
  cfg.sensor.lidar.el_fov = 40.0;
  cfg.sensor.lidar.el_res = 4.0;
  cfg.sensor.lidar.max_range = 30.0;
  cfg.seed = 5;
  return cfg;
}

PipelineOptions quiet(std::vector<Stage> stages, bool force = false) {
  PipelineOptions options;
  options.stages = std::move(stages);
  options.force = force;
  options.log = nullptr;
  return options;
}

TEST(Pipeline, EvalOnlyWithIdenticalTrajectories) {
  TempDir dir("pipe_eval_only");
  std::mt19937_64 rng(1);
  Trajectory gt;
  Vec3 p(0, 0, 0);
  for (int k = 0; k < 400; ++k) {
    gt.poses.push_back({k * 0.1, p, Quat::Identity()});
    p += Vec3(0.05, 0.03 * std::sin(k * 0.1), 0.001 * k);
  }
  write_tum(dir.path() / "gt.tum", gt);

  BenchConfig cfg;
  cfg.out_dir = (dir.path() / "run").string();
  cfg.eval_external_ground_truth = (dir.path() / "gt.tum").string();
  cfg.eval_external_estimate = (dir.path() / "gt.tum").string();

  EXPECT_EQ(run_pipeline(cfg, quiet({Stage::Eval})), 0);
  const auto report = nlohmann::json::parse(
      read_file(dir.path() / "run" / "eval" / "report.json"));
  EXPECT_LE(report.at("ate").at("rms_m").get<double>(), 1e-12);
  EXPECT_LE(report.at("drift").at("median_fraction").get<double>(), 1e-12);
}

TEST(Pipeline, MissingPrerequisiteNamesStage) {
  TempDir dir("pipe_missing");
  BenchConfig cfg = mini_config(dir.path());
  cfg.out_dir = (dir.path() / "run").string();

  std::ostringstream log;
  PipelineOptions options = quiet({Stage::Odom});
  options.log = &log;
  EXPECT_NE(run_pipeline(cfg, options), 0);
  EXPECT_NE(log.str().find("odom:"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("simulate"), std::string::npos) << log.str();
}

TEST(Pipeline, GenAndSimulateProduceTrackedArtifacts) {
  TempDir dir("pipe_gen_sim");
  BenchConfig cfg = mini_config(dir.path());
  cfg.out_dir = (dir.path() / "run").string();

  ASSERT_EQ(run_pipeline(cfg, quiet({Stage::GenTerrain, Stage::GenPath,
                                     Stage::Simulate})),
            0);
  for (const char* rel :
       {"world/world.obj", "world/world.stl", "world/world.sdf",
        "world/rocks.json", "path/groundtruth.tum", "path/actor.sdf",
        "dataset/dataset.json", "dataset/groundtruth.tum", "manifest.json"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / rel))
        << rel;

  const auto manifest = nlohmann::json::parse(
      read_file(std::filesystem::path(cfg.out_dir) / "manifest.json"));
  EXPECT_EQ(manifest.at("tool_version").get<std::string>(),
            std::string(kVersion));
  EXPECT_TRUE(manifest.at("stages").contains("gen-terrain"));
  EXPECT_TRUE(manifest.at("stages").contains("gen-path"));
  EXPECT_TRUE(manifest.at("stages").contains("simulate"));
}

TEST(Pipeline, StereoSensorRecordsDepthClouds) {
  TempDir dir("pipe_stereo");
  BenchConfig cfg = mini_config(dir.path());
  cfg.out_dir = (dir.path() / "run").string();
  cfg.sensor.type = "stereo";
  cfg.sensor.stereo.width = 48;
  cfg.sensor.stereo.height = 28;
  cfg.sensor.stereo.rate = 10.0;
  cfg.path.spec.waypoints = {Vec2(3, 8), Vec2(11, 8)};
  cfg.path.spec.closed = false;
  cfg.path.spec.sample_rate = 30.0;

  ASSERT_EQ(run_pipeline(cfg, quiet({Stage::GenTerrain, Stage::GenPath,
                                     Stage::Simulate})),
            0);
  const auto manifest_path =
      std::filesystem::path(cfg.out_dir) / "dataset" / "dataset.json";
  const auto dataset = nlohmann::json::parse(read_file(manifest_path));
  EXPECT_EQ(dataset.at("type").get<std::string>(), "stereo");
  const auto clouds = load_dataset(std::filesystem::path(cfg.out_dir) / "dataset");
  ASSERT_FALSE(clouds.empty());
  EXPECT_GT(clouds.front().points.size(), 100u);
}

TEST(Pipeline, RerunIntoFreshDirIsByteIdentical) {
  TempDir dir("pipe_determinism");
  BenchConfig cfg = mini_config(dir.path());

  cfg.out_dir = (dir.path() / "a").string();
  ASSERT_EQ(run_pipeline(cfg, quiet({Stage::GenTerrain, Stage::GenPath,
                                     Stage::Simulate})),
            0);
  cfg.out_dir = (dir.path() / "b").string();
  ASSERT_EQ(run_pipeline(cfg, quiet({Stage::GenTerrain, Stage::GenPath,
                                     Stage::Simulate})),
            0);
  EXPECT_EQ(read_file(dir.path() / "a" / "manifest.json"),
            read_file(dir.path() / "b" / "manifest.json"));
}

TEST(Pipeline, UnchangedStageIsSkippedUnlessForced) {
  TempDir dir("pipe_skip");
  BenchConfig cfg = mini_config(dir.path());
  cfg.out_dir = (dir.path() / "run").string();

  std::ostringstream first_log;
  PipelineOptions first = quiet({Stage::GenTerrain});
  first.log = &first_log;
  ASSERT_EQ(run_pipeline(cfg, first), 0);
  EXPECT_EQ(first_log.str().find("skipping"), std::string::npos);

  std::ostringstream second_log;
  PipelineOptions second = quiet({Stage::GenTerrain});
  second.log = &second_log;
  ASSERT_EQ(run_pipeline(cfg, second), 0);
  EXPECT_NE(second_log.str().find("gen-terrain: up to date, skipping"),
            std::string::npos)
      << second_log.str();

  std::ostringstream forced_log;
  PipelineOptions forced = quiet({Stage::GenTerrain}, /*force=*/true);
  forced.log = &forced_log;
  ASSERT_EQ(run_pipeline(cfg, forced), 0);
  EXPECT_EQ(forced_log.str().find("skipping"), std::string::npos)
      << forced_log.str();

  // A config change invalidates the stage.
  cfg.rocks[0].density = 0.3;
  std::ostringstream changed_log;
  PipelineOptions changed = quiet({Stage::GenTerrain});
  changed.log = &changed_log;
  ASSERT_EQ(run_pipeline(cfg, changed), 0);
  EXPECT_EQ(changed_log.str().find("skipping"), std::string::npos);
}

TEST(Pipeline, ManifestPathsAreRelative) {
  TempDir dir("pipe_relpaths");
  BenchConfig cfg = mini_config(dir.path());
  cfg.out_dir = (dir.path() / "run").string();
  ASSERT_EQ(run_pipeline(cfg, quiet({Stage::GenTerrain})), 0);
  const auto manifest = nlohmann::json::parse(
      read_file(std::filesystem::path(cfg.out_dir) / "manifest.json"));
  for (const auto& [rel, hash] :
       manifest.at("stages").at("gen-terrain").at("outputs").items()) {
    EXPECT_FALSE(std::filesystem::path(rel).is_absolute()) << rel;
    EXPECT_EQ(hash.get<std::string>().size(), 16u);
  }
}

}  // namespace
}  // namespace regolith
