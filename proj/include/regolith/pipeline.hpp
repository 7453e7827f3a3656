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

#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regolith/config.hpp"
#include "regolith/dataset.hpp"
#include "regolith/mesh_io.hpp"
#include "regolith/metrics.hpp"
#include "regolith/odometry.hpp"
#include "regolith/pathgen.hpp"
#include "regolith/version.hpp"

namespace regolith {

enum class Stage { GenTerrain, GenPath, Simulate, Odom, Eval };

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::GenTerrain: return "gen-terrain";
    case Stage::GenPath: return "gen-path";
    case Stage::Simulate: return "simulate";
    case Stage::Odom: return "odom";
    case Stage::Eval: return "eval";
  }
  return "?";
}

inline std::vector<Stage> all_stages() {
  return {Stage::GenTerrain, Stage::GenPath, Stage::Simulate, Stage::Odom,
          Stage::Eval};
}

struct PipelineOptions {
  std::vector<Stage> stages = all_stages();
  bool force = false;
  std::ostream* log = &std::cerr;
};

namespace detail {

class PipelineRun {
 public:
  PipelineRun(const BenchConfig& config, const PipelineOptions& options)
      : config_(config), options_(options), run_dir_(config.out_dir) {
    std::filesystem::create_directories(run_dir_);
    manifest_path_ = run_dir_ / "manifest.json";
    if (std::filesystem::exists(manifest_path_)) {
      try {
        manifest_ = nlohmann::json::parse(read_file(manifest_path_));
      } catch (...) {
        manifest_ = nlohmann::json::object();  // rebuilt from scratch
      }
    }
    config_hash_ = to_hex(fnv1a64(config_to_json(config_).dump()));
    manifest_["tool_version"] = kVersion;
    manifest_["config_hash"] = config_hash_;
    manifest_["seed"] = config_.seed;
    if (!manifest_.contains("stages") || !manifest_["stages"].is_object())
      manifest_["stages"] = nlohmann::json::object();
  }

  void run(Stage stage) {
    switch (stage) {
      case Stage::GenTerrain: return gen_terrain();
      case Stage::GenPath: return gen_path();
      case Stage::Simulate: return simulate();
      case Stage::Odom: return odom();
      case Stage::Eval: return eval();
    }
  }

  void save_manifest() { write_file(manifest_path_, manifest_.dump(2) + "\n"); }

 private:
  void log(const std::string& message) {
    if (options_.log) *options_.log << message << '\n';
  }

  std::string subset_hash(std::initializer_list<const char*> sections,
                          const std::vector<std::string>& extra = {}) {
    const nlohmann::json full = config_to_json(config_);
    nlohmann::json subset;
    for (const char* s : sections) subset[s] = full.at(s);
    subset["seed"] = config_.seed;
    std::uint64_t h = fnv1a64(subset.dump());
    for (const std::string& e : extra) h = fnv1a64(e.data(), e.size(), h);
    return to_hex(h);
  }

  bool up_to_date(const std::string& stage, const std::string& inputs_hash) {
    if (options_.force) return false;
    const auto& stages = manifest_["stages"];
    if (!stages.contains(stage)) return false;
    const auto& entry = stages.at(stage);
    if (entry.value("inputs", "") != inputs_hash) return false;
    if (!entry.contains("outputs") || !entry.at("outputs").is_object()) return false;
    for (const auto& [rel, hash] : entry.at("outputs").items()) {
      const auto path = run_dir_ / rel;
      if (!std::filesystem::exists(path)) return false;
      if (hash_file(path) != hash.get<std::string>()) return false;
    }
    return true;
  }

  void record(const std::string& stage, const std::string& inputs_hash,
              const std::vector<std::filesystem::path>& outputs) {
    nlohmann::json entry;
    entry["inputs"] = inputs_hash;
    nlohmann::json out = nlohmann::json::object();
    for (const auto& path : outputs)
      out[std::filesystem::relative(path, run_dir_).generic_string()] =
          hash_file(path);
    entry["outputs"] = out;
    manifest_["stages"][stage] = entry;
    save_manifest();
  }

  Heightfield heightfield() {
    if (config_.terrain.raster.empty())
      throw ValidationError("no terrain raster configured");
    Heightfield hf = load_heightfield(config_.terrain.raster,
                                      config_.terrain.cell_size,
                                      config_.terrain.z_scale);
    hf.origin_x = config_.terrain.origin_x;
    hf.origin_y = config_.terrain.origin_y;
    return hf;
  }

  Scene scene() {
    const Heightfield hf = heightfield();
    const auto placements = scatter_rocks(hf, config_.rocks, config_.seed);
    return build_scene(displace_plane(hf),
                       instantiate_rocks(placements, config_.rocks));
  }

  void gen_terrain() {
    const std::string inputs =
        subset_hash({"terrain", "rocks"}, {hash_raster()});
    if (up_to_date("gen-terrain", inputs)) {
      log("gen-terrain: up to date, skipping");
      return;
    }
    const Heightfield hf = heightfield();
    const auto placements = scatter_rocks(hf, config_.rocks, config_.seed);
    const Scene world = build_scene(displace_plane(hf),
                                    instantiate_rocks(placements, config_.rocks));
    const auto dir = run_dir_ / "world";
    const WorldExport files = export_world(world, dir);

    nlohmann::json rocks_json = nlohmann::json::array();
    for (const RockPlacement& r : placements)
      rocks_json.push_back({{"population", r.population},
                            {"diameter_m", r.diameter},
                            {"position", {r.position.x(), r.position.y(), r.position.z()}},
                            {"yaw_rad", r.yaw}});
    write_file(dir / "rocks.json", rocks_json.dump(2) + "\n");
    log("gen-terrain: " + std::to_string(world.triangles().size()) +
        " triangles, " + std::to_string(placements.size()) + " rocks");
    record("gen-terrain", inputs,
           {files.obj, files.stl, files.sdf, dir / "rocks.json"});
  }

  void gen_path() {
    const std::string inputs = subset_hash({"terrain", "path"}, {hash_raster()});
    if (up_to_date("gen-path", inputs)) {
      log("gen-path: up to date, skipping");
      return;
    }
    if (config_.path.spec.waypoints.empty())
      throw ValidationError("no path waypoints configured");
    const Heightfield hf = heightfield();
    Trajectory gt = sample_trajectory(config_.path.spec, hf);
    if (config_.path.orientation_noise_deg > 0.0)
      gt = perturb_orientations(gt, config_.path.orientation_noise_deg, config_.seed);
    const auto dir = run_dir_ / "path";
    std::filesystem::create_directories(dir);
    write_tum(dir / "groundtruth.tum", gt);
    export_actor_sdf(gt, dir / "actor.sdf");
    log("gen-path: " + std::to_string(gt.size()) + " poses over " +
        std::to_string(polyline_length(config_.path.spec.waypoints,
                                       config_.path.spec.closed)) +
        " m");
    record("gen-path", inputs, {dir / "groundtruth.tum", dir / "actor.sdf"});
  }

  void simulate() {
    const auto gt_path = run_dir_ / "path" / "groundtruth.tum";
    if (!std::filesystem::exists(gt_path))
      throw ValidationError("missing prerequisite artifact path/groundtruth.tum "
                            "(run gen first)");
    const std::string inputs =
        subset_hash({"terrain", "rocks", "sensor"}, {hash_file(gt_path)});
    if (up_to_date("simulate", inputs)) {
      log("simulate: up to date, skipping");
      return;
    }
    const Trajectory gt = read_tum(gt_path).trajectory;
    const Scene world = scene();
    const DatasetInfo info =
        config_.sensor.type == "stereo"
            ? simulate_sequence(world, gt, config_.sensor.stereo,
                                run_dir_ / "dataset")
            : simulate_sequence(world, gt, config_.sensor.lidar,
                                run_dir_ / "dataset");
    log("simulate: " + std::to_string(info.frames.size()) + " frames");
    std::vector<std::filesystem::path> outputs = {info.manifest, info.ground_truth};
    outputs.insert(outputs.end(), info.frames.begin(), info.frames.end());
    record("simulate", inputs, outputs);
  }

  void odom() {
    const auto dataset_dir = run_dir_ / "dataset";
    if (!std::filesystem::exists(dataset_dir / "dataset.json"))
      throw ValidationError("missing prerequisite artifact dataset/dataset.json "
                            "(run simulate first)");
    const std::string inputs = subset_hash(
        {"odometry"}, {hash_file(dataset_dir / "dataset.json"),
                       hash_file(dataset_dir / "groundtruth.tum")});
    if (up_to_date("odom", inputs)) {
      log("odom: up to date, skipping");
      return;
    }
    const auto frames = load_dataset(dataset_dir);
    const OdometryResult result = run_odometry(frames, config_.odometry);
    const auto dir = run_dir_ / "odom";
    std::filesystem::create_directories(dir);
    write_tum(dir / "estimate.tum", result.trajectory);
    nlohmann::json odom_json = {{"frames", frames.size()},
                                {"skipped_frames", result.skipped_frames},
                                {"icp_residual_rms", result.residuals}};
    write_file(dir / "odom_report.json", odom_json.dump(2) + "\n");
    log("odom: " + std::to_string(frames.size()) + " frames, " +
        std::to_string(result.skipped_frames.size()) + " skipped");
    record("odom", inputs, {dir / "estimate.tum", dir / "odom_report.json"});
  }

  void eval() {
    std::filesystem::path gt_path = config_.eval_external_ground_truth.empty()
        ? run_dir_ / "dataset" / "groundtruth.tum"
        : std::filesystem::path(config_.eval_external_ground_truth);
    std::filesystem::path est_path = config_.eval_external_estimate.empty()
        ? run_dir_ / "odom" / "estimate.tum"
        : std::filesystem::path(config_.eval_external_estimate);
    if (!std::filesystem::exists(gt_path))
      throw ValidationError("missing ground-truth trajectory " + gt_path.string());
    if (!std::filesystem::exists(est_path))
      throw ValidationError("missing estimate trajectory " + est_path.string() +
                            " (run odom or configure eval/external_estimate)");
    const std::string inputs =
        subset_hash({"eval"}, {hash_file(gt_path), hash_file(est_path)});
    if (up_to_date("eval", inputs)) {
      log("eval: up to date, skipping");
      return;
    }
    const Trajectory gt = read_tum(gt_path).trajectory;
    const Trajectory est = read_tum(est_path).trajectory;
    const MetricsReport report = evaluate_trajectories(gt, est, config_.eval);
    const auto dir = run_dir_ / "eval";
    write_report_files(report, dir);
    char summary[160];
    std::snprintf(summary, sizeof(summary),
                  "eval: ATE rms %.4f m, median %.4f m; TDr median %.3f %%, rms %.3f %%",
                  report.ate_rms, report.ate_median, 100.0 * report.drift_median,
                  100.0 * report.drift_rms);
    log(summary);
    record("eval", inputs,
           {dir / "report.json", dir / "ate.csv", dir / "tdr.csv",
            dir / "ate_vs_distance.dat", dir / "tdr_vs_distance.dat"});
  }

  std::string hash_raster() {
    return config_.terrain.raster.empty() ? std::string("none")
                                          : hash_file(config_.terrain.raster);
  }

  BenchConfig config_;
  PipelineOptions options_;
  std::filesystem::path run_dir_;
  std::filesystem::path manifest_path_;
  nlohmann::json manifest_;
  std::string config_hash_;
};

}  // namespace detail

/// Runs the requested stages into the config's run directory. Each stage
/// records its inputs fingerprint and output hashes in manifest.json and is
/// skipped when nothing changed (unless forced). Returns 0 iff every
/// requested stage succeeded; on failure the stage name prefixes the logged
/// error.
inline int run_pipeline(const BenchConfig& config,
                        const PipelineOptions& options = PipelineOptions{}) {
  try {
    detail::PipelineRun run(config, options);
    for (Stage stage : options.stages) {
      try {
        run.run(stage);
      } catch (const std::exception& e) {
        if (options.log)
          *options.log << stage_name(stage) << ": " << e.what() << '\n';
        run.save_manifest();
        return 1;
      }
    }
    run.save_manifest();
    return 0;
  } catch (const std::exception& e) {
    if (options.log) *options.log << "pipeline: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace regolith
