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

#include "hpf/geometry.hpp"

namespace hpf
{
Vec2 rotate(const Vec2 & p, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

Vec2 transform_point(const FrameTransform & t, const Vec2 & p)
{
  return rotate(p, t.rotation) + t.translation;
}

FrameTransform compose(const FrameTransform & a, const FrameTransform & b)
{
  return {transform_point(a, b.translation), normalize_angle(a.rotation + b.rotation)};
}

FrameTransform inverse(const FrameTransform & t)
{
  return {-rotate(t.translation, -t.rotation), normalize_angle(-t.rotation)};
}

Vec2 project_between_frames(const Vec2 & p_prev, const Pose2D & motion)
{
  return transform_point(inverse(FrameTransform::from_pose(motion)), p_prev);
}

Pose2D relative_pose(const Pose2D & from, const Pose2D & to)
{
  const Vec2 d = rotate(Vec2(to.x - from.x, to.y - from.y), -from.theta);
  return make_pose(d.x(), d.y(), to.theta - from.theta);
}

Vec2 local_to_world(const Vec2 & local, const Pose2D & robot_pose)
{
  return transform_point(FrameTransform::from_pose(robot_pose), local);
}

Vec2 world_to_local(const Vec2 & world, const Pose2D & robot_pose)
{
  return rotate(Vec2(world.x() - robot_pose.x, world.y() - robot_pose.y), -robot_pose.theta);
}

}  // namespace hpf
