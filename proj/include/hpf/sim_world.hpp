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

#include "hpf/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace hpf
{
using Embedding = Eigen::VectorXd;

struct ControlInput
{
  double v{0.0};      // m/s
  double omega{0.0};  // rad/s
};

/// Forward-Euler unicycle update.
Pose2D step_unicycle(const Pose2D & s, const ControlInput & u, double dt);

enum class AgentRole { Leader, Pedestrian };

struct TimedPose
{
  double t{0.0};
  Pose2D pose;
};

struct Agent
{
  int id{0};
  AgentRole role{AgentRole::Pedestrian};
  std::vector<TimedPose> trajectory;  // strictly increasing t
  double body_radius{0.25};
  Embedding embedding_mean;
};

/// Scripted pose at time t: linear interpolation, held at both ends.
Pose2D pose_at(const Agent & agent, double t);

struct Segment
{
  Vec2 a{Vec2::Zero()};
  Vec2 b{Vec2::Zero()};
};

struct WorldState
{
  double time{0.0};
  std::vector<Agent> agents;
  std::vector<Pose2D> agent_poses;  // parallel to agents
  std::vector<Segment> obstacles;

  static WorldState create(std::vector<Agent> agents, std::vector<Segment> obstacles, double t0 = 0.0);
};

/// Moves every scripted agent to its pose at time + dt.
WorldState advance(const WorldState & world, double dt);

struct ScanPoint
{
  double r{0.0};
  double alpha{0.0};
  int hit_id{-1};  // ground truth: agent id, or -1 for a static obstacle
};

struct Scan
{
  double timestamp{0.0};
  std::vector<ScanPoint> points;  // alpha strictly increasing in [0, 2 pi)
};

struct LidarConfig
{
  double angular_resolution{0.5 * 3.14159265358979323846 / 180.0};
  double r_max{40.0};
  double sigma_r{0.01};
};

/// 360 degree scan from the LIDAR at `robot_pose` (frame L coincides with the
/// robot frame). Rays without a hit within r_max are omitted.
Scan simulate_lidar(const WorldState & world, const Pose2D & robot_pose, const LidarConfig & config, std::uint64_t seed);

struct BBox
{
  double x{0.0};  // top-left corner, pixels
  double y{0.0};
  double w{0.0};
  double h{0.0};

  Vec2 center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  double area() const { return w * h; }
};

struct Detection
{
  double timestamp{0.0};
  BBox bbox;
  Eigen::Vector3d centroid_c{Eigen::Vector3d::Zero()};  // camera frame: x right, y down, z forward
  Embedding embedding;
  int agent_truth{-1};  // test/metrics only
};

struct CameraConfig
{
  double hfov{69.0 * 3.14159265358979323846 / 180.0};
  int image_width{640};
  int image_height{480};
  double min_depth{0.5};
  double max_depth{3.0};
  double mount_height{1.0};   // optical centre above ground, m
  double person_height{1.7};  // m
  FrameTransform mount;       // camera pose in frame L (planar part of ^L T_C)
  double p_miss{0.02};
  double sigma_px{2.0};
  double sigma_z{0.02};
  double sigma_e{0.02};

  double focal_px() const;
};

/// Pin-hole detections of every visible agent. An agent is visible when its
/// centre lies inside the horizontal FOV, its depth is within
/// [min_depth, max_depth], and no other agent disk crosses the sight line.
/// The 3D centroid is the body surface point on the sight line to the centre.
std::vector<Detection> simulate_camera(
  const WorldState & world, const Pose2D & robot_pose, const CameraConfig & config, std::uint64_t seed);

/// Noise-free image projection of a point given in frame L (for feedback).
std::optional<Vec2> project_to_image(const Vec2 & point_l, double height, const CameraConfig & config);

/// Noise-free camera-frame coordinates of a ground point given in frame L.
Eigen::Vector3d lidar_to_camera(const Vec2 & point_l, double height, const CameraConfig & config);

/// Ray/shape intersection helpers (distance along a unit ray, if hit).
std::optional<double> ray_circle(const Vec2 & origin, const Vec2 & dir, const Vec2 & center, double radius);
std::optional<double> ray_segment(const Vec2 & origin, const Vec2 & dir, const Segment & seg);

}  // namespace hpf
