// Copyright 2026 The hpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "hpf/scenario.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hpf
{
enum class RunStatus { Ok, Fault };

struct EstimateSummary
{
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  Mat2 cov_pos{Mat2::Zero()};
  double mu_cv{0.0};
  double mu_uni{0.0};
};

struct StepRecord
{
  double t{0.0};
  bool init_phase{true};
  Pose2D robot;
  std::vector<Pose2D> agents;  // ground truth, parallel to RunLog::agent_ids
  FusionMode mode{FusionMode::Bootstrap};
  std::optional<Vec2> measurement;  // world frame
  std::optional<int> target_truth;  // ground-truth id behind the measurement, -1 for static structure
  bool camera_used{false};
  std::optional<EstimateSummary> estimate;
  std::uint64_t spline_version{0};
  double v{0.0};
  double omega{0.0};
  std::optional<double> lateral_error;
  std::optional<double> heading_error;
  std::vector<SafetyEvent> events;
};

struct RunSummary
{
  int init_attempts{0};
  std::size_t positives{0};
  std::size_t negatives{0};
  std::size_t admitted_points{0};
  std::size_t spline_fit_failures{0};
  std::size_t backtracks{0};
};

struct RunLog
{
  std::string scenario;
  std::uint64_t seed{0};
  double dt{0.0};
  std::vector<int> agent_ids;
  std::size_t leader_index{0};
  std::vector<StepRecord> steps;
  RunStatus status{RunStatus::Ok};
  std::string fault_reason;
  ClothoidSpline spline;
  RunSummary summary;
};

/// Runs the scenario: initialisation window with the robot at rest, then the
/// sense, recognise, fuse, track, path and control loop. A tracker fault stops
/// the robot and ends the run.
RunLog run(const Scenario & scenario);

struct LateralStats
{
  std::size_t count{0};
  double max{0.0};
  double p95{0.0};
  double rms{0.0};
};

struct Metrics
{
  std::string status;
  std::size_t steps{0};
  LateralStats lateral;
  double tracker_rmse{0.0};
  std::size_t tracker_samples{0};
  double identity_precision{0.0};
  std::size_t identity_samples{0};
  std::map<std::string, double> mode_occupancy;
  double mean_mu_cv{0.0};
  double mean_mu_uni{0.0};
  std::map<std::string, std::size_t> event_counts;
};

/// Distance from p to the polyline, or nullopt when the closest point is
/// an end of the polyline reached from beyond it.
std::optional<double> interior_distance_to_polyline(const Vec2 & p, const std::vector<Vec2> & polyline);

/// Linearly interpolated percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

Metrics compute_metrics(const RunLog & log);

nlohmann::json metrics_to_json(const Metrics & m);
nlohmann::json runlog_to_json(const RunLog & log);
RunLog runlog_from_json(const nlohmann::json & j);

RunLog read_runlog(const std::filesystem::path & path);

/// run.json, metrics.json and the plot files.
void write_outputs(const RunLog & log, const std::filesystem::path & out_dir);

/// truth_leader.csv, robot.csv, estimates.csv and spline.json.
void write_plot_data(const RunLog & log, const std::filesystem::path & out_dir);

std::string to_string(RunStatus s);

}  // namespace hpf
