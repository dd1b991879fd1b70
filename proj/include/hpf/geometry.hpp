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

#include <Eigen/Core>

#include <cmath>
#include <numbers>

namespace hpf
{
using Vec2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

struct Pose2D
{
  double x{0.0};
  double y{0.0};
  double theta{0.0};

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose2D &) const = default;
};

inline Pose2D make_pose(double x, double y, double theta)
{
  return {x, y, normalize_angle(theta)};
}

/// Rigid planar transform p -> R(rotation) p + translation.
struct FrameTransform
{
  Vec2 translation{Vec2::Zero()};
  double rotation{0.0};

  static FrameTransform identity() { return {}; }
  static FrameTransform from_pose(const Pose2D & pose)
  {
    return {Vec2(pose.x, pose.y), normalize_angle(pose.theta)};
  }
  Pose2D to_pose() const { return make_pose(translation.x(), translation.y(), rotation); }
};

Vec2 rotate(const Vec2 & p, double angle);
Vec2 transform_point(const FrameTransform & t, const Vec2 & p);

/// a ∘ b: apply b first, then a.
FrameTransform compose(const FrameTransform & a, const FrameTransform & b);
FrameTransform inverse(const FrameTransform & t);

/// Re-expresses a point given in frame L_{k-1} in frame L_k, where `motion`
/// is the pose of L_k expressed in L_{k-1}.
Vec2 project_between_frames(const Vec2 & p_prev, const Pose2D & motion);

/// Pose of `to` expressed in the frame of `from` (both given in a common frame).
Pose2D relative_pose(const Pose2D & from, const Pose2D & to);

/// Point in the robot-local frame -> world frame.
Vec2 local_to_world(const Vec2 & local, const Pose2D & robot_pose);
Vec2 world_to_local(const Vec2 & world, const Pose2D & robot_pose);

}  // namespace hpf
