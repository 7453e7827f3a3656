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

// Command-line front end: terrain/path generation, LiDAR simulation,
// reference odometry, and trajectory evaluation, individually or as a full
// pipeline run.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regolith/config.hpp"
#include "regolith/metrics.hpp"
#include "regolith/pipeline.hpp"
#include "regolith/version.hpp"

namespace {

struct GlobalFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool json = false;
};

regolith::BenchConfig load_effective_config(const GlobalFlags& flags,
                                            bool config_required) {
  regolith::BenchConfig config;
  if (!flags.config_path.empty()) {
    config = regolith::load_config(flags.config_path);
  } else if (config_required) {
    throw regolith::ValidationError("--config is required for this command");
  }
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

int run_stages(const GlobalFlags& flags, std::vector<regolith::Stage> stages) {
  const regolith::BenchConfig config = load_effective_config(flags, true);
  regolith::PipelineOptions options;
  options.stages = std::move(stages);
  options.force = flags.force;
  const int status = regolith::run_pipeline(config, options);
  if (flags.json) {
    nlohmann::json out = {{"status", status},
                          {"out_dir", config.out_dir},
                          {"manifest", config.out_dir + "/manifest.json"}};
    std::cout << out.dump(2) << '\n';
  }
  return status;
}

int run_evaluate(const GlobalFlags& flags, const std::string& gt_path,
                 const std::string& est_path, std::optional<double> segment_len,
                 std::optional<double> align_fraction,
                 std::optional<double> max_dt) {
  regolith::EvalParams params = load_effective_config(flags, false).eval;
  if (segment_len) params.segment_length = *segment_len;
  if (align_fraction) params.align_fraction = *align_fraction;
  if (max_dt) params.max_dt = *max_dt;

  const regolith::Trajectory gt = regolith::read_tum(gt_path).trajectory;
  const regolith::Trajectory est = regolith::read_tum(est_path).trajectory;
  const regolith::MetricsReport report =
      regolith::evaluate_trajectories(gt, est, params);

  if (!flags.out_dir.empty()) regolith::write_report_files(report, flags.out_dir);

  if (flags.json) {
    std::cout << regolith::report_to_json(report).dump(2) << '\n';
  } else {
    std::printf("pairs matched:   %zu\n", report.correspondences.pairs.size());
    std::printf("alignment rms:   %.6f m over first %d pairs\n",
                report.alignment.rms_residual, report.alignment.pairs_used);
    std::printf("ATE rms:         %.6f m\n", report.ate_rms);
    std::printf("ATE median:      %.6f m\n", report.ate_median);
    std::printf("TDr median:      %.4f %%\n", 100.0 * report.drift_median);
    std::printf("TDr rms:         %.4f %%\n", 100.0 * report.drift_rms);
    if (!flags.out_dir.empty())
      std::printf("report written:  %s\n", (flags.out_dir + "/report.json").c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regolith: planetary terrain benchmark for trajectory metrology"};
  app.set_version_flag("--version", std::string(regolith::kVersion));
  app.require_subcommand(1);
  app.fallthrough();  // accept global flags after the subcommand

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "JSON configuration file");
  app.add_option("--out", flags.out_dir, "output directory (overrides config)");
  app.add_option("--seed", flags.seed, "master seed (overrides config)");
  app.add_flag("--force", flags.force, "rerun stages even if up to date");
  app.add_flag("--json", flags.json, "machine-readable output on stdout");

  auto* gen_terrain = app.add_subcommand("gen-terrain", "generate and export the world");
  auto* gen_path = app.add_subcommand("gen-path", "sample the ground-truth trajectory");
  auto* simulate = app.add_subcommand("simulate", "ray-cast the sensor dataset");
  auto* odom = app.add_subcommand("odom", "run reference ICP odometry");
  auto* run = app.add_subcommand("run", "run the full pipeline");
  std::vector<std::string> stage_names;
  run->add_option("--stages", stage_names,
                  "subset of stages: gen, simulate, odom, eval")
      ->delimiter(',');

  auto* evaluate = app.add_subcommand("evaluate", "score an estimate against ground truth");
  std::string gt_path, est_path;
  std::optional<double> segment_len, align_fraction, max_dt;
  evaluate->add_option("--gt", gt_path, "ground-truth TUM trajectory")->required();
  evaluate->add_option("--est", est_path, "estimated TUM trajectory")->required();
  evaluate->add_option("--segment-len", segment_len, "drift segment length [m]");
  evaluate->add_option("--align-fraction", align_fraction,
                       "fraction of pairs used for alignment (0, 1]");
  evaluate->add_option("--max-dt", max_dt, "timestamp association window [s]");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_terrain->parsed())
      return run_stages(flags, {regolith::Stage::GenTerrain});
    if (gen_path->parsed()) return run_stages(flags, {regolith::Stage::GenPath});
    if (simulate->parsed()) return run_stages(flags, {regolith::Stage::Simulate});
    if (odom->parsed()) return run_stages(flags, {regolith::Stage::Odom});
    if (run->parsed()) {
      std::vector<regolith::Stage> stages;
      if (stage_names.empty()) {
        stages = regolith::all_stages();
      } else {
        for (const std::string& name : stage_names) {
          if (name == "gen") {
            stages.push_back(regolith::Stage::GenTerrain);
            stages.push_back(regolith::Stage::GenPath);
          } else if (name == "simulate") {
            stages.push_back(regolith::Stage::Simulate);
          } else if (name == "odom") {
            stages.push_back(regolith::Stage::Odom);
          } else if (name == "eval") {
            stages.push_back(regolith::Stage::Eval);
          } else {
            std::cerr << "unknown stage '" << name
                      << "' (expected gen, simulate, odom, eval)\n";
            return 1;
          }
        }
      }
      return run_stages(flags, std::move(stages));
    }
    if (evaluate->parsed())
      return run_evaluate(flags, gt_path, est_path, segment_len, align_fraction,
                          max_dt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
