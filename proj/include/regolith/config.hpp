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
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regolith/metrics.hpp"
#include "regolith/odometry.hpp"
#include "regolith/pathgen.hpp"
#include "regolith/sensors.hpp"
#include "regolith/terrain.hpp"
#include "regolith/util.hpp"

namespace regolith {

struct TerrainConfig {
  std::string raster;       // PNG or ASCII grid; empty = stage unavailable
  double cell_size = 0.5;   // m
  double z_scale = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

struct PathConfig {
  PathSpec spec;
  double orientation_noise_deg = 0.0;
};

struct SensorConfig {
  std::string type = "lidar";  // "lidar" | "stereo"
  LidarModel lidar = LidarModel::default_model();
  StereoModel stereo = StereoModel::default_model();
};

/// Full benchmark configuration. JSON defaults: stock sensor models, 10 m
/// drift segments, first-third alignment.
struct BenchConfig {
  TerrainConfig terrain;
  std::vector<RockPopulation> rocks;
  PathConfig path;
  SensorConfig sensor;
  OdometryParams odometry;
  EvalParams eval;
  std::string eval_external_estimate;      // TUM path; overrides odom output
  std::string eval_external_ground_truth;  // TUM path; overrides dataset gt
  std::uint64_t seed = 0;
  std::string out_dir = "runs/out";
};

namespace detail {

inline void check_known_keys(const nlohmann::json& obj, const std::string& ptr,
                             std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) { known = true; break; }
    if (!known) throw ConfigError(ptr + "/" + key, "unknown key");
  }
}

inline double get_number(const nlohmann::json& obj, const std::string& ptr,
                         const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
  return v.get<double>();
}

inline std::uint64_t get_uint(const nlohmann::json& obj, const std::string& ptr,
                              const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ConfigError(ptr + "/" + key, "expected an integer");
  return v.get<std::uint64_t>();
}

inline int get_int(const nlohmann::json& obj, const std::string& ptr,
                   const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(ptr + "/" + key, "expected an integer");
  return v.get<int>();
}

inline bool get_bool(const nlohmann::json& obj, const std::string& ptr,
                     const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(ptr + "/" + key, "expected a boolean");
  return v.get<bool>();
}

inline std::string get_string(const nlohmann::json& obj, const std::string& ptr,
                              const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(ptr + "/" + key, "expected a string");
  return v.get<std::string>();
}

inline void require_positive(double v, const std::string& ptr) {
  if (!(v > 0.0)) throw ConfigError(ptr, "must be > 0");
}

inline TerrainConfig parse_terrain(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"raster", "cell_size", "z_scale", "origin"});
  TerrainConfig t;
  t.raster = get_string(j, ptr, "raster", t.raster);
  t.cell_size = get_number(j, ptr, "cell_size", t.cell_size);
  t.z_scale = get_number(j, ptr, "z_scale", t.z_scale);
  require_positive(t.cell_size, ptr + "/cell_size");
  if (!std::isfinite(t.z_scale)) throw ConfigError(ptr + "/z_scale", "must be finite");
  if (j.contains("origin")) {
    const auto& o = j.at("origin");
    if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number())
      throw ConfigError(ptr + "/origin", "expected [x, y]");
    t.origin_x = o[0].get<double>();
    t.origin_y = o[1].get<double>();
  }
  return t;
}

inline RockPopulation parse_rock_population(const nlohmann::json& j,
                                            const std::string& ptr) {
  check_known_keys(j, ptr, {"density", "diameter_min", "diameter_max",
                            "irregularity", "seed"});
  RockPopulation p;
  p.density = get_number(j, ptr, "density", p.density);
  p.diameter_min = get_number(j, ptr, "diameter_min", p.diameter_min);
  p.diameter_max = get_number(j, ptr, "diameter_max", p.diameter_max);
  p.shape_irregularity = get_number(j, ptr, "irregularity", p.shape_irregularity);
  p.seed = get_uint(j, ptr, "seed", p.seed);
  if (!(p.density >= 0.0)) throw ConfigError(ptr + "/density", "must be >= 0");
  if (!(p.diameter_min > 0.0)) throw ConfigError(ptr + "/diameter_min", "must be > 0");
  if (!(p.diameter_max >= p.diameter_min))
    throw ConfigError(ptr + "/diameter_max", "must be >= diameter_min");
  if (!(p.shape_irregularity >= 0.0 && p.shape_irregularity <= 1.0))
    throw ConfigError(ptr + "/irregularity", "must be in [0, 1]");
  return p;
}

inline PathConfig parse_path(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"waypoints", "closed", "speed", "sample_rate",
                            "height_offset", "orientation_noise_deg"});
  PathConfig p;
  if (j.contains("waypoints")) {
    const auto& w = j.at("waypoints");
    if (!w.is_array()) throw ConfigError(ptr + "/waypoints", "expected an array");
    p.spec.waypoints.clear();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto& pt = w[k];
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
        throw ConfigError(ptr + "/waypoints/" + std::to_string(k), "expected [x, y]");
      p.spec.waypoints.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
  }
  p.spec.closed = get_bool(j, ptr, "closed", p.spec.closed);
  p.spec.speed = get_number(j, ptr, "speed", p.spec.speed);
  p.spec.sample_rate = get_number(j, ptr, "sample_rate", p.spec.sample_rate);
  p.spec.height_offset = get_number(j, ptr, "height_offset", p.spec.height_offset);
  p.orientation_noise_deg =
      get_number(j, ptr, "orientation_noise_deg", p.orientation_noise_deg);
  require_positive(p.spec.speed, ptr + "/speed");
  require_positive(p.spec.sample_rate, ptr + "/sample_rate");
  if (!(p.orientation_noise_deg >= 0.0))
    throw ConfigError(ptr + "/orientation_noise_deg", "must be >= 0");
  if (!p.spec.waypoints.empty()) {
    const std::size_t min_points = p.spec.closed ? 3 : 2;
    if (p.spec.waypoints.size() < min_points)
      throw ConfigError(ptr + "/waypoints",
                        "need at least " + std::to_string(min_points) + " waypoints");
  }
  return p;
}

inline LidarModel parse_lidar(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"preset", "az_fov_deg", "el_fov_deg", "az_res_deg",
                            "el_res_deg", "max_range_m", "rate_hz",
                            "range_noise_sigma_m", "seed"});
  LidarModel m = LidarModel::default_model();
  const std::string preset = get_string(j, ptr, "preset", "default");
  if (preset == "os1_64") m = LidarModel::os1_64();
  else if (preset != "default")
    throw ConfigError(ptr + "/preset", "unknown preset '" + preset + "'");
  m.az_fov = get_number(j, ptr, "az_fov_deg", m.az_fov);
  m.el_fov = get_number(j, ptr, "el_fov_deg", m.el_fov);
  m.az_res = get_number(j, ptr, "az_res_deg", m.az_res);
  m.el_res = get_number(j, ptr, "el_res_deg", m.el_res);
  m.max_range = get_number(j, ptr, "max_range_m", m.max_range);
  m.rate = get_number(j, ptr, "rate_hz", m.rate);
  m.range_noise_sigma = get_number(j, ptr, "range_noise_sigma_m", m.range_noise_sigma);
  m.seed = get_uint(j, ptr, "seed", m.seed);
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(ptr, e.what());
  }
  return m;
}

inline StereoModel parse_stereo(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"width", "height", "h_fov_deg", "v_fov_deg",
                            "baseline_m", "rate_hz"});
  StereoModel m = StereoModel::default_model();
  m.width = get_int(j, ptr, "width", m.width);
  m.height = get_int(j, ptr, "height", m.height);
  m.h_fov = get_number(j, ptr, "h_fov_deg", m.h_fov);
  m.v_fov = get_number(j, ptr, "v_fov_deg", m.v_fov);
  m.baseline = get_number(j, ptr, "baseline_m", m.baseline);
  m.rate = get_number(j, ptr, "rate_hz", m.rate);
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(ptr, e.what());
  }
  return m;
}

inline SensorConfig parse_sensor(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"type", "lidar", "stereo"});
  SensorConfig s;
  s.type = get_string(j, ptr, "type", s.type);
  if (s.type != "lidar" && s.type != "stereo")
    throw ConfigError(ptr + "/type", "expected 'lidar' or 'stereo'");
  if (j.contains("lidar")) s.lidar = parse_lidar(j.at("lidar"), ptr + "/lidar");
  if (j.contains("stereo")) s.stereo = parse_stereo(j.at("stereo"), ptr + "/stereo");
  return s;
}

inline OdometryParams parse_odometry(const nlohmann::json& j, const std::string& ptr) {
  check_known_keys(j, ptr, {"voxel_m", "max_corr_dist_m", "max_iterations",
                            "tolerance"});
  OdometryParams o;
  o.voxel = get_number(j, ptr, "voxel_m", o.voxel);
  o.icp.max_corr_dist = get_number(j, ptr, "max_corr_dist_m", o.icp.max_corr_dist);
  o.icp.max_iterations = get_int(j, ptr, "max_iterations", o.icp.max_iterations);
  o.icp.tolerance = get_number(j, ptr, "tolerance", o.icp.tolerance);
  require_positive(o.voxel, ptr + "/voxel_m");
  require_positive(o.icp.max_corr_dist, ptr + "/max_corr_dist_m");
  if (o.icp.max_iterations < 1)
    throw ConfigError(ptr + "/max_iterations", "must be >= 1");
  require_positive(o.icp.tolerance, ptr + "/tolerance");
  return o;
}

}  // namespace detail

/// Parses and validates a configuration document. Unknown keys and range
/// violations raise ConfigError carrying the JSON pointer of the offending
/// field. An empty object yields the pure defaults.
inline BenchConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  detail::check_known_keys(j, "", {"terrain", "rocks", "path", "sensor",
                                   "odometry", "eval", "seed", "out_dir"});
  BenchConfig cfg;
  if (j.contains("terrain")) cfg.terrain = detail::parse_terrain(j.at("terrain"), "/terrain");
  if (j.contains("rocks")) {
    const auto& rocks = j.at("rocks");
    if (!rocks.is_array()) throw ConfigError("/rocks", "expected an array");
    cfg.rocks.clear();
    for (std::size_t k = 0; k < rocks.size(); ++k)
      cfg.rocks.push_back(
          detail::parse_rock_population(rocks[k], "/rocks/" + std::to_string(k)));
  }
  if (j.contains("path")) cfg.path = detail::parse_path(j.at("path"), "/path");
  if (j.contains("sensor")) cfg.sensor = detail::parse_sensor(j.at("sensor"), "/sensor");
  if (j.contains("odometry"))
    cfg.odometry = detail::parse_odometry(j.at("odometry"), "/odometry");
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    detail::check_known_keys(e, "/eval",
                             {"segment_length_m", "align_fraction", "max_dt_s",
                              "external_estimate", "external_ground_truth"});
    cfg.eval.segment_length =
        detail::get_number(e, "/eval", "segment_length_m", cfg.eval.segment_length);
    cfg.eval.align_fraction =
        detail::get_number(e, "/eval", "align_fraction", cfg.eval.align_fraction);
    cfg.eval.max_dt = detail::get_number(e, "/eval", "max_dt_s", cfg.eval.max_dt);
    cfg.eval_external_estimate =
        detail::get_string(e, "/eval", "external_estimate", "");
    cfg.eval_external_ground_truth =
        detail::get_string(e, "/eval", "external_ground_truth", "");
    detail::require_positive(cfg.eval.segment_length, "/eval/segment_length_m");
    if (!(cfg.eval.align_fraction > 0.0 && cfg.eval.align_fraction <= 1.0))
      throw ConfigError("/eval/align_fraction", "must be in (0, 1]");
    detail::require_positive(cfg.eval.max_dt, "/eval/max_dt_s");
  }
  cfg.seed = detail::get_uint(j, "", "seed", cfg.seed);
  cfg.out_dir = detail::get_string(j, "", "out_dir", cfg.out_dir);
  return cfg;
}

/// Loads a configuration file. Relative file references (terrain raster,
/// external trajectories) are resolved against the config file's directory,
/// and referenced files must exist.
inline BenchConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
  BenchConfig cfg = parse_config(j);

  const auto base = std::filesystem::absolute(path).parent_path();
  auto resolve = [&](std::string& ref, const char* pointer) {
    if (ref.empty()) return;
    std::filesystem::path p(ref);
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p))
      throw ConfigError(pointer, "referenced file does not exist: " + p.string());
    ref = p.string();
  };
  resolve(cfg.terrain.raster, "/terrain/raster");
  resolve(cfg.eval_external_estimate, "/eval/external_estimate");
  resolve(cfg.eval_external_ground_truth, "/eval/external_ground_truth");
  return cfg;
}

/// Canonical JSON form used for manifest hashing.
inline nlohmann::json config_to_json(const BenchConfig& c) {
  nlohmann::json waypoints = nlohmann::json::array();
  for (const Vec2& w : c.path.spec.waypoints)
    waypoints.push_back({w.x(), w.y()});
  nlohmann::json rocks = nlohmann::json::array();
  for (const RockPopulation& p : c.rocks)
    rocks.push_back({{"density", p.density},
                     {"diameter_min", p.diameter_min},
                     {"diameter_max", p.diameter_max},
                     {"irregularity", p.shape_irregularity},
                     {"seed", p.seed}});
  return nlohmann::json{
      {"terrain",
       {{"raster", c.terrain.raster},
        {"cell_size", c.terrain.cell_size},
        {"z_scale", c.terrain.z_scale},
        {"origin", {c.terrain.origin_x, c.terrain.origin_y}}}},
      {"rocks", rocks},
      {"path",
       {{"waypoints", waypoints},
        {"closed", c.path.spec.closed},
        {"speed", c.path.spec.speed},
        {"sample_rate", c.path.spec.sample_rate},
        {"height_offset", c.path.spec.height_offset},
        {"orientation_noise_deg", c.path.orientation_noise_deg}}},
      {"sensor",
       {{"type", c.sensor.type},
        {"lidar", detail::lidar_model_json(c.sensor.lidar)},
        {"stereo",
         {{"width", c.sensor.stereo.width},
          {"height", c.sensor.stereo.height},
          {"h_fov_deg", c.sensor.stereo.h_fov},
          {"v_fov_deg", c.sensor.stereo.v_fov},
          {"baseline_m", c.sensor.stereo.baseline},
          {"rate_hz", c.sensor.stereo.rate}}}}},
      {"odometry",
       {{"voxel_m", c.odometry.voxel},
        {"max_corr_dist_m", c.odometry.icp.max_corr_dist},
        {"max_iterations", c.odometry.icp.max_iterations},
        {"tolerance", c.odometry.icp.tolerance}}},
      {"eval",
       {{"segment_length_m", c.eval.segment_length},
        {"align_fraction", c.eval.align_fraction},
        {"max_dt_s", c.eval.max_dt},
        {"external_estimate", c.eval_external_estimate},
        {"external_ground_truth", c.eval_external_ground_truth}}},
      {"seed", c.seed},
  };
}

}  // namespace regolith
