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

#include "hpf/clothoid.hpp"
#include "hpf/geometry.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hpf
{
struct ControllerConfig
{
  double k_lat{1.5};            // 1/m^2
  double k_head{2.5};           // 1/m
  double v_nominal{0.8};        // m/s
  double a_max{0.5};            // m/s^2
  double follow_distance{1.5};  // m
  double v_curv_coeff{0.8};     // m/s at zero curvature
  double curvature_scale{1.0};  // m
  double d_slow{1.5};           // m
  double d_stop{0.6};           // m
  double t_alert{3.0};          // s
  double stop_release{0.15};    // m past d_stop before a stop ends
  double corridor_half_width{0.4};  // m
  double projection_step{0.05};     // m, coarse grid of project_to_path

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

struct PathProjection
{
  double s{0.0};
  double lateral_error{0.0};  // positive when the robot is left of the path
  double heading_error{0.0};  // robot heading minus path tangent
  double kappa{0.0};
};

/// Closest point of the spline to the robot: coarse scan every `step` metres,
/// then golden-section refinement inside the bracketing cells.
PathProjection project_to_path(const Pose2D & robot, const ClothoidSpline & spline, double step = 0.05);

/// Curvature command chi; the angular velocity is v * chi.
double steer(double lateral_error, double heading_error, double kappa, const ControllerConfig & config);

double velocity_target(double gap_to_leader, double kappa, const ControllerConfig & config);

/// velocity_target times the safety scale, rate limited to a_max * dt around
/// v_prev, never negative.
double velocity_policy(
  double gap_to_leader, double kappa, double v_prev, double dt, const ControllerConfig & config, double scale = 1.0);

/// 1 beyond d_slow, linear down to 0 at d_stop.
double safety_scale(std::optional<double> obstacle_distance, const ControllerConfig & config);

enum class SafetyEventKind { SlowDown, Stop, SoundAlert };
std::string_view to_string(SafetyEventKind k);

struct SafetyEvent
{
  SafetyEventKind kind{SafetyEventKind::SlowDown};
  double timestamp{0.0};
};

enum class SafetyZone { Clear, Slow, Stop };

struct SafetyState
{
  SafetyZone zone{SafetyZone::Clear};
  double far_duration{0.0};  // time spent stopped with the leader too far
  bool alerted{false};       // alert already given in this stop episode
};

struct SafetyOutput
{
  double scale{1.0};
  std::vector<SafetyEvent> events;
};

/// Advances the slow/stop/alert policy by dt. SlowDown and Stop are reported
/// on entering the zone; SoundAlert once per stop episode after the leader gap
/// has stayed above 2 follow_distance for t_alert seconds. A stop episode
/// lasts until the obstacle is farther than d_stop + stop_release.
SafetyOutput safety_step(
  SafetyState & state, std::optional<double> obstacle_distance, double leader_gap, double dt, double now,
  const ControllerConfig & config);

/// Distance along the path from s_robot to the first obstacle point lying
/// within the corridor half-width of the path ahead. Points are in world frame.
std::optional<double> obstacle_distance_on_path(
  const ClothoidSpline & spline, double s_robot, std::span<const Vec2> points, const ControllerConfig & config);

}  // namespace hpf
