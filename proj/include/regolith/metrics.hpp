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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "regolith/geometry.hpp"
#include "regolith/trajectory.hpp"
#include "regolith/util.hpp"

namespace regolith {

/// Timestamp-matched (ground truth, estimate) index pairs. Indices are
/// strictly increasing in both trajectories.
struct Correspondences {
  std::vector<std::pair<int, int>> pairs;  // (gt index, est index)
  double max_dt = 0.0;
};

/// Greedy nearest-timestamp matching in time order. A pair is accepted when
/// neither side has a strictly closer partner coming next; pairs with a gap
/// above max_dt are dropped. Each pose is matched at most once.
inline Correspondences associate_by_timestamp(const Trajectory& gt,
                                              const Trajectory& est,
                                              double max_dt) {
  if (gt.empty() || est.empty())
    throw ValidationError("association requires non-empty trajectories");
  if (!(max_dt > 0.0)) throw ValidationError("max_dt must be > 0");

  Correspondences corr;
  corr.max_dt = max_dt;
  std::size_t i = 0, j = 0;
  while (i < gt.size() && j < est.size()) {
    const double dt = std::abs(gt.poses[i].t - est.poses[j].t);
    if (i + 1 < gt.size() && std::abs(gt.poses[i + 1].t - est.poses[j].t) < dt) {
      ++i;  // a later ground-truth pose fits this estimate better
      continue;
    }
    if (j + 1 < est.size() && std::abs(gt.poses[i].t - est.poses[j + 1].t) < dt) {
      ++j;  // a later estimate fits this ground-truth pose better
      continue;
    }
    if (dt <= max_dt)
      corr.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    ++i;
    ++j;
  }
  if (corr.pairs.empty())
    throw ValidationError("no timestamp correspondences within max_dt");
  return corr;
}

/// Rigid alignment estimate -> ground truth: x* ~ R x + t.
struct AlignmentResult {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  double rms_residual = 0.0;  // over the pairs used for alignment
  int pairs_used = 0;

  RigidTransform transform() const {
    return RigidTransform::from_quat(rotation, translation);
  }
};

/// Closed-form least-squares rigid alignment (Horn's quaternion method) of
/// the estimate onto the ground truth, using only the first
/// ceil(align_fraction * pairs) correspondences. Scale is fixed at 1.
inline AlignmentResult horn_align(const Correspondences& corr,
                                  const Trajectory& gt, const Trajectory& est,
                                  double align_fraction = 1.0 / 3.0) {
  if (!(align_fraction > 0.0 && align_fraction <= 1.0))
    throw ValidationError("align_fraction must be in (0, 1]");
  const auto used = static_cast<std::size_t>(
      std::ceil(align_fraction * static_cast<double>(corr.pairs.size())));
  if (used < 3)
    throw ValidationError("alignment requires at least 3 correspondences in the prefix");

  Vec3 est_mean = Vec3::Zero(), gt_mean = Vec3::Zero();
  for (std::size_t k = 0; k < used; ++k) {
    gt_mean += gt.poses[corr.pairs[k].first].p;
    est_mean += est.poses[corr.pairs[k].second].p;
  }
  gt_mean /= static_cast<double>(used);
  est_mean /= static_cast<double>(used);

  // Cross-covariance of centered point sets, plus scatter for the
  // collinearity check.
  Mat3 cross = Mat3::Zero();
  Mat3 est_scatter = Mat3::Zero(), gt_scatter = Mat3::Zero();
  for (std::size_t k = 0; k < used; ++k) {
    const Vec3 g = gt.poses[corr.pairs[k].first].p - gt_mean;
    const Vec3 e = est.poses[corr.pairs[k].second].p - est_mean;
    cross += e * g.transpose();
    est_scatter += e * e.transpose();
    gt_scatter += g * g.transpose();
  }
  auto collinear = [](const Mat3& scatter) {
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    return eig.eigenvalues()(1) <= 1e-12 * std::max(eig.eigenvalues()(2), 1e-300);
  };
  if (collinear(est_scatter) || collinear(gt_scatter))
    throw DegenerateGeometryError(
        "alignment prefix is collinear; rotation is unobservable");

  // Horn's 4x4 quaternion eigenproblem.
  const double sxx = cross(0, 0), sxy = cross(0, 1), sxz = cross(0, 2);
  const double syx = cross(1, 0), syy = cross(1, 1), syz = cross(1, 2);
  const double szx = cross(2, 0), szy = cross(2, 1), szz = cross(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy,        szx - sxz,        sxy - syx,
       syz - szy,       sxx - syy - szz,  sxy + syx,        szx + sxz,
       szx - sxz,       sxy + syx,       -sxx + syy - szz,  syz + szy,
       sxy - syx,       szx + sxz,        syz + szy,       -sxx - syy + szz;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  const Eigen::Vector4d q_max = eig.eigenvectors().col(3);  // largest eigenvalue

  AlignmentResult result;
  result.rotation = Quat(q_max(0), q_max(1), q_max(2), q_max(3)).normalized();
  if (result.rotation.w() < 0.0) result.rotation.coeffs() = -result.rotation.coeffs();
  result.translation = gt_mean - result.rotation * est_mean;
  result.pairs_used = static_cast<int>(used);

  double residual_sq = 0.0;
  for (std::size_t k = 0; k < used; ++k) {
    const Vec3 aligned = result.rotation * est.poses[corr.pairs[k].second].p +
                         result.translation;
    residual_sq += (gt.poses[corr.pairs[k].first].p - aligned).squaredNorm();
  }
  result.rms_residual = std::sqrt(residual_sq / static_cast<double>(used));
  return result;
}

/// Absolute trajectory error per correspondence: the L2 distance between
/// the ground-truth position and the aligned estimate, over all pairs.
inline std::vector<double> compute_ate(const Correspondences& corr,
                                       const Trajectory& gt, const Trajectory& est,
                                       const AlignmentResult& alignment) {
  std::vector<double> ate;
  ate.reserve(corr.pairs.size());
  for (const auto& [gi, ei] : corr.pairs) {
    const Vec3 aligned = alignment.rotation * est.poses[ei].p + alignment.translation;
    ate.push_back((gt.poses[gi].p - aligned).norm());
  }
  return ate;
}

/// Arc length along the trajectory between pose indices i and j (i <= j).
inline double arc_length(const Trajectory& traj, int i, int j) {
  if (i > j || i < 0 || static_cast<std::size_t>(j) >= traj.size())
    throw ValidationError("arc_length: invalid index range");
  double length = 0.0;
  for (int k = i; k < j; ++k)
    length += (traj.poses[k + 1].p - traj.poses[k].p).norm();
  return length;
}

/// One local translation-drift sample anchored at a matched pair.
struct DriftSample {
  int pair_index = 0;   // anchor position in the correspondence list
  int end_pair_index = 0;  // segment end position in the correspondence list
  double gt_length = 0.0;  // m, >= segment length by construction
  double est_length = 0.0; // m
  double tdr = 0.0;        // |gt_length - est_length| / gt_length
};

/// Local translation drift: for each matched anchor i, the segment end j is
/// the first matched pose at least segment_len of ground-truth arc away;
/// drift is the relative arc-length difference of the matched estimate
/// segment. Raw (unaligned) positions are used; the quantity is invariant
/// under rigid motion of either trajectory. Anchors with no complete
/// segment are omitted.
inline std::vector<DriftSample> compute_drift(const Correspondences& corr,
                                              const Trajectory& gt,
                                              const Trajectory& est,
                                              double segment_len = 10.0) {
  if (!(segment_len > 0.0)) throw ValidationError("segment length must be > 0");

  // Cumulative arc length over the full trajectories (not only matched poses).
  auto cumulative = [](const Trajectory& traj) {
    std::vector<double> cum(traj.size(), 0.0);
    for (std::size_t k = 1; k < traj.size(); ++k)
      cum[k] = cum[k - 1] + (traj.poses[k].p - traj.poses[k - 1].p).norm();
    return cum;
  };
  const std::vector<double> gt_cum = cumulative(gt);
  const std::vector<double> est_cum = cumulative(est);

  std::vector<DriftSample> drift;
  std::size_t end = 0;
  for (std::size_t a = 0; a < corr.pairs.size(); ++a) {
    if (end < a + 1) end = a + 1;
    while (end < corr.pairs.size() &&
           gt_cum[corr.pairs[end].first] - gt_cum[corr.pairs[a].first] < segment_len)
      ++end;
    if (end >= corr.pairs.size()) break;  // no complete segment from here on

    DriftSample sample;
    sample.pair_index = static_cast<int>(a);
    sample.end_pair_index = static_cast<int>(end);
    sample.gt_length = gt_cum[corr.pairs[end].first] - gt_cum[corr.pairs[a].first];
    sample.est_length = est_cum[corr.pairs[end].second] - est_cum[corr.pairs[a].second];
    sample.tdr = std::abs(sample.gt_length - sample.est_length) / sample.gt_length;
    drift.push_back(sample);
  }
  if (drift.empty())
    throw ValidationError("ground truth shorter than one drift segment");
  return drift;
}

struct SeriesSummary {
  double rms = 0.0;
  double median = 0.0;
};

/// RMS and median of a series. Median of an even-length series is the mean
/// of the two middle elements.
inline SeriesSummary summarize_series(std::vector<double> series) {
  if (series.empty()) throw ValidationError("cannot summarize an empty series");
  SeriesSummary s;
  double sq = 0.0;
  for (double v : series) sq += v * v;
  s.rms = std::sqrt(sq / static_cast<double>(series.size()));
  std::sort(series.begin(), series.end());
  const std::size_t mid = series.size() / 2;
  s.median = series.size() % 2 ? series[mid] : 0.5 * (series[mid - 1] + series[mid]);
  return s;
}

struct EvalParams {
  double segment_length = 10.0;      // m
  double align_fraction = 1.0 / 3.0;
  double max_dt = 0.05;              // s
};

/// Full evaluation artifact: per-pose ATE, per-anchor drift, alignment, and
/// scalar summaries.
struct MetricsReport {
  Correspondences correspondences;
  AlignmentResult alignment;
  std::vector<double> ate_series;          // m, one per pair
  std::vector<DriftSample> drift_series;   // one per anchored segment
  double ate_rms = 0.0;
  double ate_median = 0.0;
  double drift_rms = 0.0;     // fraction
  double drift_median = 0.0;  // fraction
  EvalParams params;

  // Presentation helpers.
  std::vector<double> pair_stamps;        // gt timestamp per pair
  std::vector<double> pair_distances;     // gt arc length from start per pair
};

inline MetricsReport evaluate_trajectories(const Trajectory& gt,
                                           const Trajectory& est,
                                           const EvalParams& params = EvalParams{}) {
  gt.validate();
  est.validate();
  MetricsReport report;
  report.params = params;
  report.correspondences = associate_by_timestamp(gt, est, params.max_dt);
  report.alignment =
      horn_align(report.correspondences, gt, est, params.align_fraction);
  report.ate_series = compute_ate(report.correspondences, gt, est, report.alignment);
  report.drift_series =
      compute_drift(report.correspondences, gt, est, params.segment_length);

  const SeriesSummary ate = summarize_series(report.ate_series);
  report.ate_rms = ate.rms;
  report.ate_median = ate.median;
  std::vector<double> tdr;
  tdr.reserve(report.drift_series.size());
  for (const DriftSample& d : report.drift_series) tdr.push_back(d.tdr);
  const SeriesSummary drift = summarize_series(tdr);
  report.drift_rms = drift.rms;
  report.drift_median = drift.median;

  report.pair_stamps.reserve(report.correspondences.pairs.size());
  report.pair_distances.reserve(report.correspondences.pairs.size());
  double cum = 0.0;
  int prev = report.correspondences.pairs.front().first;
  for (const auto& [gi, ei] : report.correspondences.pairs) {
    cum += arc_length(gt, prev, gi);
    prev = gi;
    report.pair_stamps.push_back(gt.poses[gi].t);
    report.pair_distances.push_back(cum);
  }
  return report;
}

/// Machine-readable report. Drift appears as a fraction here; the human
/// summary prints percent.
inline nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json ate_series = nlohmann::json::array();
  for (std::size_t k = 0; k < r.ate_series.size(); ++k)
    ate_series.push_back({{"t", r.pair_stamps[k]},
                          {"gt_distance_m", r.pair_distances[k]},
                          {"ate_m", r.ate_series[k]}});
  nlohmann::json drift_series = nlohmann::json::array();
  for (const DriftSample& d : r.drift_series)
    drift_series.push_back({{"t", r.pair_stamps[d.pair_index]},
                            {"gt_distance_m", r.pair_distances[d.pair_index]},
                            {"gt_segment_m", d.gt_length},
                            {"est_segment_m", d.est_length},
                            {"tdr_fraction", d.tdr}});
  return nlohmann::json{
      {"pairs", r.correspondences.pairs.size()},
      {"ate", {{"rms_m", r.ate_rms}, {"median_m", r.ate_median}, {"series", ate_series}}},
      {"drift",
       {{"rms_fraction", r.drift_rms},
        {"median_fraction", r.drift_median},
        {"series", drift_series}}},
      {"alignment",
       {{"quaternion_xyzw",
         {r.alignment.rotation.x(), r.alignment.rotation.y(),
          r.alignment.rotation.z(), r.alignment.rotation.w()}},
        {"translation_m",
         {r.alignment.translation.x(), r.alignment.translation.y(),
          r.alignment.translation.z()}},
        {"rms_residual_m", r.alignment.rms_residual},
        {"pairs_used", r.alignment.pairs_used}}},
      {"params",
       {{"segment_length_m", r.params.segment_length},
        {"align_fraction", r.params.align_fraction},
        {"max_dt_s", r.params.max_dt}}},
  };
}

/// Writes the CSV series and gnuplot-ready per-distance data files.
inline void write_report_files(const MetricsReport& r,
                               const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "report.json", report_to_json(r).dump(2) + "\n");

  std::ostringstream ate_csv;
  ate_csv << "t,ate_m\n";
  for (std::size_t k = 0; k < r.ate_series.size(); ++k)
    ate_csv << format_double(r.pair_stamps[k]) << ','
            << format_double(r.ate_series[k]) << '\n';
  write_file(out_dir / "ate.csv", ate_csv.str());

  std::ostringstream tdr_csv;
  tdr_csv << "t,tdr_fraction\n";
  for (const DriftSample& d : r.drift_series)
    tdr_csv << format_double(r.pair_stamps[d.pair_index]) << ','
            << format_double(d.tdr) << '\n';
  write_file(out_dir / "tdr.csv", tdr_csv.str());

  std::ostringstream ate_plot;
  ate_plot << "# gt_distance_m ate_m\n";
  for (std::size_t k = 0; k < r.ate_series.size(); ++k)
    ate_plot << format_double(r.pair_distances[k]) << ' '
             << format_double(r.ate_series[k]) << '\n';
  write_file(out_dir / "ate_vs_distance.dat", ate_plot.str());

  std::ostringstream tdr_plot;
  tdr_plot << "# gt_distance_m tdr_fraction\n";
  for (const DriftSample& d : r.drift_series)
    tdr_plot << format_double(r.pair_distances[d.pair_index]) << ' '
             << format_double(d.tdr) << '\n';
  write_file(out_dir / "tdr_vs_distance.dat", tdr_plot.str());
}

}  // namespace regolith
