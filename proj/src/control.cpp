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

#include "hpf/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hpf
{
void ControllerConfig::validate() const
{
  const std::pair<const char *, double> fields[] = {
    {"k_lat", k_lat},
    {"k_head", k_head},
    {"v_nominal", v_nominal},
    {"a_max", a_max},
    {"follow_distance", follow_distance},
    {"v_curv_coeff", v_curv_coeff},
    {"curvature_scale", curvature_scale},
    {"d_slow", d_slow},
    {"d_stop", d_stop},
    {"t_alert", t_alert},
    {"stop_release", stop_release},
    {"corridor_half_width", corridor_half_width},
    {"projection_step", projection_step},
  };
  for (const auto & [name, value] : fields) {
    if (!(value > 0.0)) {
      throw std::invalid_argument(std::string("control.") + name + " must be positive");
    }
  }
  if (!(d_stop < d_slow)) {
    throw std::invalid_argument("control.d_stop must be smaller than control.d_slow");
  }
}

namespace
{
double squared_distance_at(const ClothoidSpline & spline, const Vec2 & p, double s)
{
  return (spline.eval(s).pose.position() - p).squaredNorm();
}
}  // namespace

PathProjection project_to_path(const Pose2D & robot, const ClothoidSpline & spline, double step)
{
  if (spline.empty()) {
    throw std::invalid_argument("project_to_path: empty spline");
  }
  const Vec2 p = robot.position();
  const double total = spline.length();
  const auto cells = static_cast<std::size_t>(std::max(1.0, std::ceil(total / step)));
  const double h = total / static_cast<double>(cells);

  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= cells; ++i) {
    const double d = squared_distance_at(spline, p, static_cast<double>(i) * h);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }

  double lo = best > 0 ? static_cast<double>(best - 1) * h : 0.0;
  double hi = best < cells ? static_cast<double>(best + 1) * h : total;
  constexpr double inv_phi = 0.6180339887498949;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = squared_distance_at(spline, p, a);
  double fb = squared_distance_at(spline, p, b);
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = squared_distance_at(spline, p, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = squared_distance_at(spline, p, b);
    }
  }
  double s = 0.5 * (lo + hi);
  if (squared_distance_at(spline, p, static_cast<double>(best) * h) < squared_distance_at(spline, p, s)) {
    s = static_cast<double>(best) * h;
  }

  const SplineSample q = spline.eval(s);
  const Vec2 normal(-std::sin(q.pose.theta), std::cos(q.pose.theta));
  PathProjection out;
  out.s = s;
  out.lateral_error = (p - q.pose.position()).dot(normal);
  out.heading_error = normalize_angle(robot.theta - q.pose.theta);
  out.kappa = q.kappa;
  return out;
}

double steer(double lateral_error, double heading_error, double kappa, const ControllerConfig & config)
{
  return kappa - config.k_head * heading_error - config.k_lat * lateral_error;
}

double velocity_target(double gap_to_leader, double kappa, const ControllerConfig & config)
{
  const double fd = config.follow_distance;
  const double gap_term = config.v_nominal * std::clamp((gap_to_leader - fd) / fd, 0.0, 1.0);
  const double curve_term = config.v_curv_coeff / (1.0 + std::abs(kappa) * config.curvature_scale);
  return std::min(gap_term, curve_term);
}

double velocity_policy(
  double gap_to_leader, double kappa, double v_prev, double dt, const ControllerConfig & config, double scale)
{
  const double dv = config.a_max * dt;
  const double v = std::clamp(scale * velocity_target(gap_to_leader, kappa, config), v_prev - dv, v_prev + dv);
  return std::max(v, 0.0);
}

double safety_scale(std::optional<double> obstacle_distance, const ControllerConfig & config)
{
  if (!obstacle_distance || *obstacle_distance >= config.d_slow) {
    return 1.0;
  }
  if (*obstacle_distance <= config.d_stop) {
    return 0.0;
  }
  return (*obstacle_distance - config.d_stop) / (config.d_slow - config.d_stop);
}

std::string_view to_string(SafetyEventKind k)
{
  switch (k) {
    case SafetyEventKind::SlowDown:
      return "SlowDown";
    case SafetyEventKind::Stop:
      return "Stop";
    case SafetyEventKind::SoundAlert:
      return "SoundAlert";
  }
  return "?";
}

SafetyOutput safety_step(
  SafetyState & state, std::optional<double> obstacle_distance, double leader_gap, double dt, double now,
  const ControllerConfig & config)
{
  SafetyOutput out;
  out.scale = safety_scale(obstacle_distance, config);
  SafetyZone zone = SafetyZone::Clear;
  const bool held = state.zone == SafetyZone::Stop && obstacle_distance &&
                    *obstacle_distance < config.d_stop + config.stop_release;
  if (out.scale <= 0.0 || held) {
    out.scale = 0.0;
    zone = SafetyZone::Stop;
  } else if (out.scale < 1.0) {
    zone = SafetyZone::Slow;
  }

  if (zone == SafetyZone::Slow && state.zone == SafetyZone::Clear) {
    out.events.push_back({SafetyEventKind::SlowDown, now});
  }
  if (zone == SafetyZone::Stop && state.zone != SafetyZone::Stop) {
    out.events.push_back({SafetyEventKind::Stop, now});
    state.far_duration = 0.0;
    state.alerted = false;
  }
  state.zone = zone;

  if (zone == SafetyZone::Stop) {
    if (leader_gap > 2.0 * config.follow_distance) {
      state.far_duration += dt;
    } else {
      state.far_duration = 0.0;
    }
    if (!state.alerted && state.far_duration >= config.t_alert - 1e-9) {
      out.events.push_back({SafetyEventKind::SoundAlert, now});
      state.alerted = true;
    }
  } else {
    state.far_duration = 0.0;
    state.alerted = false;
  }
  return out;
}

std::optional<double> obstacle_distance_on_path(
  const ClothoidSpline & spline, double s_robot, std::span<const Vec2> points, const ControllerConfig & config)
{
  if (spline.empty() || points.empty()) {
    return std::nullopt;
  }
  const double s_end = std::min(spline.length(), s_robot + config.d_slow + 1.0);
  std::vector<std::pair<double, Vec2>> samples;
  for (double s = s_robot; s <= s_end + 1e-12; s += config.projection_step) {
    samples.emplace_back(s, spline.eval(s).pose.position());
  }
  const double r2 = config.corridor_half_width * config.corridor_half_width;
  std::optional<double> nearest;
  for (const auto & p : points) {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (const auto & [s, c] : samples) {
      const double d = (p - c).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best_s = s;
      }
    }
    if (best_d <= r2 && (!nearest || best_s - s_robot < *nearest)) {
      nearest = best_s - s_robot;
    }
  }
  if (nearest) {
    return nearest;
  }
  return std::nullopt;
}

}  // namespace hpf
