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

#include "hpf/sim_world.hpp"

#include "hpf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hpf
{
Pose2D step_unicycle(const Pose2D & s, const ControlInput & u, double dt)
{
  return make_pose(
    s.x + std::cos(s.theta) * dt * u.v, s.y + std::sin(s.theta) * dt * u.v, s.theta + dt * u.omega);
}

Pose2D pose_at(const Agent & agent, double t)
{
  const auto & traj = agent.trajectory;
  if (traj.empty()) {
    return {};
  }
  if (t <= traj.front().t) {
    return traj.front().pose;
  }
  if (t >= traj.back().t) {
    return traj.back().pose;
  }
  const auto it = std::upper_bound(
    traj.begin(), traj.end(), t, [](double value, const TimedPose & tp) { return value < tp.t; });
  const TimedPose & b = *it;
  const TimedPose & a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return make_pose(
    a.pose.x + f * (b.pose.x - a.pose.x), a.pose.y + f * (b.pose.y - a.pose.y),
    a.pose.theta + f * normalize_angle(b.pose.theta - a.pose.theta));
}

WorldState WorldState::create(std::vector<Agent> agents, std::vector<Segment> obstacles, double t0)
{
  WorldState w;
  w.time = t0;
  w.agents = std::move(agents);
  w.obstacles = std::move(obstacles);
  for (const auto & a : w.agents) {
    w.agent_poses.push_back(pose_at(a, t0));
  }
  return w;
}

WorldState advance(const WorldState & world, double dt)
{
  WorldState next = world;
  next.time = world.time + dt;
  for (std::size_t i = 0; i < next.agents.size(); ++i) {
    next.agent_poses[i] = pose_at(next.agents[i], next.time);
  }
  return next;
}

std::optional<double> ray_circle(const Vec2 & origin, const Vec2 & dir, const Vec2 & center, double radius)
{
  const Vec2 oc = center - origin;
  const double b = dir.dot(oc);
  const double disc = b * b - (oc.squaredNorm() - radius * radius);
  if (disc < 0.0) {
    return std::nullopt;
  }
  const double sq = std::sqrt(disc);
  const double t_near = b - sq;
  if (t_near > 0.0) {
    return t_near;
  }
  return std::nullopt;  // behind the sensor, or the sensor is inside the disk
}

std::optional<double> ray_segment(const Vec2 & origin, const Vec2 & dir, const Segment & seg)
{
  const Vec2 e = seg.b - seg.a;
  const double denom = dir.x() * e.y() - dir.y() * e.x();
  if (std::abs(denom) < 1e-15) {
    return std::nullopt;
  }
  const Vec2 w = seg.a - origin;
  const double t = (w.x() * e.y() - w.y() * e.x()) / denom;
  const double u = (w.x() * dir.y() - w.y() * dir.x()) / denom;
  if (t > 0.0 && u >= 0.0 && u <= 1.0) {
    return t;
  }
  return std::nullopt;
}

Scan simulate_lidar(const WorldState & world, const Pose2D & robot_pose, const LidarConfig & config, std::uint64_t seed)
{
  Rng rng(seed);
  Scan scan;
  scan.timestamp = world.time;
  const Vec2 origin = robot_pose.position();
  const auto n_rays = static_cast<int>(std::floor(2.0 * std::numbers::pi / config.angular_resolution + 1e-9));
  for (int i = 0; i < n_rays; ++i) {
    const double alpha = i * config.angular_resolution;
    if (alpha >= 2.0 * std::numbers::pi) {
      break;
    }
    const double heading = robot_pose.theta + alpha;
    const Vec2 dir(std::cos(heading), std::sin(heading));
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    for (std::size_t a = 0; a < world.agents.size(); ++a) {
      const auto & p = world.agent_poses[a];
      if (auto t = ray_circle(origin, dir, p.position(), world.agents[a].body_radius); t && *t < best) {
        best = *t;
        best_id = world.agents[a].id;
      }
    }
    for (const auto & seg : world.obstacles) {
      if (auto t = ray_segment(origin, dir, seg); t && *t < best) {
        best = *t;
        best_id = -1;
      }
    }
    // Draw noise for every ray so the stream does not depend on hit pattern.
    const double noise = config.sigma_r > 0.0 ? rng.normal(0.0, config.sigma_r) : 0.0;
    if (!(best <= config.r_max)) {
      continue;
    }
    const double r = std::clamp(best + noise, 1e-3, config.r_max);
    scan.points.push_back({r, alpha, best_id});
  }
  return scan;
}

double CameraConfig::focal_px() const
{
  return 0.5 * image_width / std::tan(0.5 * hfov);
}

Eigen::Vector3d lidar_to_camera(const Vec2 & point_l, double height, const CameraConfig & config)
{
  const Vec2 m = transform_point(inverse(config.mount), point_l);
  return {-m.y(), config.mount_height - height, m.x()};
}

std::optional<Vec2> project_to_image(const Vec2 & point_l, double height, const CameraConfig & config)
{
  const Eigen::Vector3d c = lidar_to_camera(point_l, height, config);
  if (c.z() <= 1e-6) {
    return std::nullopt;
  }
  const double f = config.focal_px();
  return Vec2(0.5 * config.image_width + f * c.x() / c.z(), 0.5 * config.image_height + f * c.y() / c.z());
}

namespace
{
double point_segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}
}  // namespace

std::vector<Detection> simulate_camera(
  const WorldState & world, const Pose2D & robot_pose, const CameraConfig & config, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<Detection> out;
  const double f = config.focal_px();
  const Vec2 cam_world = local_to_world(config.mount.translation, robot_pose);
  const double half_h = 0.5 * config.person_height;

  for (std::size_t a = 0; a < world.agents.size(); ++a) {
    const Agent & agent = world.agents[a];
    const Vec2 center_w = world.agent_poses[a].position();
    const Vec2 center_l = world_to_local(center_w, robot_pose);
    const Eigen::Vector3d center_c = lidar_to_camera(center_l, half_h, config);

    // Noise draws happen for every agent to keep the stream layout fixed.
    const double n_u = rng.normal();
    const double n_v = rng.normal();
    const double n_w = rng.normal();
    const double n_h = rng.normal();
    const double n_z = rng.normal();
    const bool missed = rng.bernoulli(config.p_miss);
    Embedding emb = agent.embedding_mean;
    for (Eigen::Index k = 0; k < emb.size(); ++k) {
      emb(k) += config.sigma_e * rng.normal();
    }

    const double range_c = std::hypot(center_c.x(), center_c.z());
    if (center_c.z() <= 0.0 || range_c <= agent.body_radius) {
      continue;
    }
    if (std::abs(std::atan2(center_c.x(), center_c.z())) > 0.5 * config.hfov) {
      continue;
    }
    // Surface point on the sight line to the centre.
    const double shrink = (range_c - agent.body_radius) / range_c;
    Eigen::Vector3d c(center_c.x() * shrink, center_c.y(), center_c.z() * shrink);
    if (c.z() < config.min_depth || c.z() > config.max_depth) {
      continue;
    }
    bool occluded = false;
    for (std::size_t o = 0; o < world.agents.size() && !occluded; ++o) {
      if (o == a) {
        continue;
      }
      occluded = point_segment_distance(world.agent_poses[o].position(), cam_world, center_w) <
                 world.agents[o].body_radius;
    }
    if (occluded || missed) {
      continue;
    }

    const double u = 0.5 * config.image_width + f * c.x() / c.z() + config.sigma_px * n_u;
    const double v = 0.5 * config.image_height + f * c.y() / c.z() + config.sigma_px * n_v;
    const double w = std::max(1.0, f * 2.0 * agent.body_radius / c.z() + config.sigma_px * n_w);
    const double h = std::max(1.0, f * config.person_height / c.z() + config.sigma_px * n_h);
    const double z_noisy = std::max(1e-3, c.z() + config.sigma_z * n_z);
    c.x() *= z_noisy / c.z();
    c.z() = z_noisy;

    Detection d;
    d.timestamp = world.time;
    d.bbox = {u - 0.5 * w, v - 0.5 * h, w, h};
    d.centroid_c = c;
    d.embedding = std::move(emb);
    d.agent_truth = agent.id;
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace hpf
