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

#include "regolith/config.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"

namespace regolith {
namespace {

using nlohmann::json;
using test_support::TempDir;

TEST(Config, EmptyObjectYieldsDefaults) {
  const BenchConfig cfg = parse_config(json::object());
  // Stock sensor model defaults.
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.az_fov, 90.0);
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.el_fov, 30.0);
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.az_res, 0.2);
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.el_res, 0.4);
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.rate, 10.0);
  EXPECT_EQ(cfg.sensor.stereo.width, 1280);
  EXPECT_EQ(cfg.sensor.stereo.height, 720);
  EXPECT_DOUBLE_EQ(cfg.sensor.stereo.h_fov, 90.0);
  EXPECT_DOUBLE_EQ(cfg.sensor.stereo.v_fov, 60.0);
  EXPECT_DOUBLE_EQ(cfg.sensor.stereo.baseline, 0.12);
  EXPECT_DOUBLE_EQ(cfg.sensor.stereo.rate, 30.0);
  // Evaluation defaults: 10 m segments, first third, metric scale.
  EXPECT_DOUBLE_EQ(cfg.eval.segment_length, 10.0);
  EXPECT_DOUBLE_EQ(cfg.eval.align_fraction, 1.0 / 3.0);
  EXPECT_GT(cfg.eval.max_dt, 0.0);
  EXPECT_EQ(cfg.seed, 0u);
}

TEST(Config, UnknownKeyNamesTheKey) {
  try {
    parse_config(json{{"terrian", json::object()}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/terrian");
  }
  try {
    parse_config(json{{"rocks", json::array({json{{"densty", 0.1}}})}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/rocks/0/densty");
  }
}

TEST(Config, RangeErrorsCarryJsonPointer) {
  try {
    parse_config(json{{"eval", {{"segment_length_m", -1.0}}}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer(), "/eval/segment_length_m");
  }
  EXPECT_THROW(parse_config(json{{"eval", {{"align_fraction", 1.5}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"terrain", {{"cell_size", 0.0}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"odometry", {{"voxel_m", -0.5}}}}), ConfigError);
  EXPECT_THROW(parse_config(json{{"sensor", {{"type", "sonar"}}}}), ConfigError);
  EXPECT_THROW(
      parse_config(json{{"sensor", {{"lidar", {{"preset", "vlp99"}}}}}}),
      ConfigError);
  EXPECT_THROW(parse_config(json{{"rocks", {{{"diameter_min", -1.0}}}}}),
               ConfigError);
}

TEST(Config, ParsesFullDocument) {
  const json doc = {
      {"terrain",
       {{"raster", "crater.asc"}, {"cell_size", 0.5}, {"z_scale", 1.5},
        {"origin", {1.0, 2.0}}}},
      {"rocks",
       {{{"density", 0.02}, {"diameter_min", 0.5}, {"diameter_max", 1.5},
         {"irregularity", 0.3}, {"seed", 7}},
        {{"density", 0.3}, {"diameter_min", 0.1}, {"diameter_max", 0.5}}}},
      {"path",
       {{"waypoints", {{2.0, 2.0}, {18.0, 2.0}, {10.0, 16.0}}},
        {"closed", true}, {"speed", 0.8}, {"sample_rate", 20.0},
        {"height_offset", 1.1}, {"orientation_noise_deg", 0.5}}},
      {"sensor", {{"type", "lidar"}, {"lidar", {{"preset", "os1_64"},
                                                 {"range_noise_sigma_m", 0.01}}}}},
      {"odometry", {{"voxel_m", 0.25}}},
      {"eval", {{"max_dt_s", 0.02}}},
      {"seed", 99},
      {"out_dir", "runs/custom"},
  };
  const BenchConfig cfg = parse_config(doc);
  EXPECT_EQ(cfg.terrain.raster, "crater.asc");
  EXPECT_DOUBLE_EQ(cfg.terrain.origin_x, 1.0);
  ASSERT_EQ(cfg.rocks.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.rocks[0].diameter_max, 1.5);
  EXPECT_EQ(cfg.rocks[0].seed, 7u);
  ASSERT_EQ(cfg.path.spec.waypoints.size(), 3u);
  EXPECT_TRUE(cfg.path.spec.closed);
  EXPECT_DOUBLE_EQ(cfg.path.orientation_noise_deg, 0.5);
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.az_fov, 360.0);  // preset applied
  EXPECT_DOUBLE_EQ(cfg.sensor.lidar.range_noise_sigma, 0.01);  // then override
  EXPECT_DOUBLE_EQ(cfg.odometry.voxel, 0.25);
  EXPECT_DOUBLE_EQ(cfg.eval.max_dt, 0.02);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.out_dir, "runs/custom");
}

TEST(Config, ClosedPathNeedsThreeWaypoints) {
  const json doc = {{"path", {{"waypoints", {{0.0, 0.0}, {1.0, 1.0}}},
                              {"closed", true}}}};
  EXPECT_THROW(parse_config(doc), ConfigError);
}

TEST(Config, LoadResolvesRelativePathsAndChecksExistence) {
  TempDir dir("config_load");
  std::ofstream(dir.path() / "terrain.asc") << "ncols 2\nnrows 2\n0 0\n0 0\n";
  const json doc = {{"terrain", {{"raster", "terrain.asc"}}}};
  const auto cfg_path = dir.path() / "bench.json";
  write_file(cfg_path, doc.dump());

  const BenchConfig cfg = load_config(cfg_path);
  EXPECT_TRUE(std::filesystem::path(cfg.terrain.raster).is_absolute());
  EXPECT_TRUE(std::filesystem::exists(cfg.terrain.raster));

  const json missing = {{"terrain", {{"raster", "nope.png"}}}};
  write_file(cfg_path, missing.dump());
  EXPECT_THROW(load_config(cfg_path), ConfigError);

  write_file(cfg_path, "{not json");
  EXPECT_THROW(load_config(cfg_path), ConfigError);
}

TEST(Config, CanonicalJsonRoundTripsThroughParse) {
  BenchConfig cfg;
  cfg.seed = 1234;
  cfg.rocks.push_back({0.1, 0.2, 0.6, 0.5, 3});
  cfg.path.spec.waypoints = {Vec2(1, 2), Vec2(3, 4)};
  const json j = config_to_json(cfg);
  // config_to_json contains no out_dir (not part of the scientific inputs),
  // but everything else must survive a round trip.
  json parseable = j;
  const BenchConfig back = parse_config(parseable);
  EXPECT_EQ(back.seed, cfg.seed);
  ASSERT_EQ(back.rocks.size(), 1u);
  EXPECT_DOUBLE_EQ(back.rocks[0].diameter_max, 0.6);
  ASSERT_EQ(back.path.spec.waypoints.size(), 2u);
  EXPECT_DOUBLE_EQ(back.path.spec.waypoints[1].y(), 4.0);
}

}  // namespace
}  // namespace regolith
