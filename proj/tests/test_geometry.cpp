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
#include "hpf/rng.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace hpf
{
namespace
{
constexpr double kPi = std::numbers::pi;

TEST(Geometry, NormalizeAngleRange)
{
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_NEAR(normalize_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(2.0 * kPi + 0.5), 0.5, 1e-12);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(rng.uniform(-50.0, 50.0));
    EXPECT_GT(a, -kPi);
    EXPECT_LE(a, kPi);
  }
}

TEST(Geometry, TransformPointExamples)
{
  const Vec2 a = transform_point(FrameTransform::identity(), Vec2(3, 4));
  EXPECT_NEAR(a.x(), 3.0, 1e-15);
  EXPECT_NEAR(a.y(), 4.0, 1e-15);
  const Vec2 b = transform_point({Vec2(1, 0), 0.0}, Vec2(2, 0));
  EXPECT_NEAR(b.x(), 3.0, 1e-15);
  EXPECT_NEAR(b.y(), 0.0, 1e-15);
  const Vec2 c = transform_point({Vec2(0, 0), kPi / 2}, Vec2(1, 0));
  EXPECT_NEAR(c.x(), 0.0, 1e-15);
  EXPECT_NEAR(c.y(), 1.0, 1e-15);
}

TEST(Geometry, ProjectBetweenFramesExamples)
{
  Vec2 p = project_between_frames(Vec2(2, 0), {1, 0, 0});
  EXPECT_NEAR(p.x(), 1.0, 1e-15);
  EXPECT_NEAR(p.y(), 0.0, 1e-15);
  p = project_between_frames(Vec2(2, 3), {0, 0, 0});
  EXPECT_NEAR(p.x(), 2.0, 1e-15);
  EXPECT_NEAR(p.y(), 3.0, 1e-15);
  p = project_between_frames(Vec2(0, 1), {0, 0, kPi / 2});
  EXPECT_NEAR(p.x(), 1.0, 1e-15);
  EXPECT_NEAR(p.y(), 0.0, 1e-15);
}

TEST(Geometry, LocalToWorldExamples)
{
  Vec2 w = local_to_world(Vec2(2, 0), {1, 1, 0});
  EXPECT_NEAR(w.x(), 3.0, 1e-15);
  EXPECT_NEAR(w.y(), 1.0, 1e-15);
  w = local_to_world(Vec2(1, 0), {0, 0, kPi / 2});
  EXPECT_NEAR(w.x(), 0.0, 1e-15);
  EXPECT_NEAR(w.y(), 1.0, 1e-15);
}

TEST(GeometryProperty, ComposeWithInverseIsIdentity)
{
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const FrameTransform t{Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10)), rng.uniform(-kPi, kPi)};
    const FrameTransform id = compose(t, inverse(t));
    EXPECT_LE(id.translation.norm(), 1e-12);
    EXPECT_LE(std::abs(normalize_angle(id.rotation)), 1e-12);
  }
}

TEST(GeometryProperty, FrameProjectionRoundTrip)
{
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D motion = make_pose(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-kPi, kPi));
    const Vec2 p(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 q = project_between_frames(p, motion);
    const Vec2 back = transform_point(FrameTransform::from_pose(motion), q);
    EXPECT_LE((back - p).norm(), 1e-12);
  }
}

TEST(GeometryProperty, TransformPreservesDistances)
{
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const FrameTransform t{Vec2(rng.uniform(-10, 10), rng.uniform(-10, 10)), rng.uniform(-kPi, kPi)};
    const Vec2 a(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 b(rng.uniform(-10, 10), rng.uniform(-10, 10));
    EXPECT_NEAR((transform_point(t, a) - transform_point(t, b)).norm(), (a - b).norm(), 1e-12);
  }
}

TEST(GeometryProperty, RelativePoseMatchesWorldToLocal)
{
  Rng rng(14);
  for (int i = 0; i < 500; ++i) {
    const Pose2D from = make_pose(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi));
    const Pose2D to = make_pose(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi));
    const Pose2D rel = relative_pose(from, to);
    const Vec2 expected = world_to_local(to.position(), from);
    EXPECT_NEAR(rel.x, expected.x(), 1e-12);
    EXPECT_NEAR(rel.y, expected.y(), 1e-12);
    EXPECT_NEAR(normalize_angle(rel.theta - (to.theta - from.theta)), 0.0, 1e-12);
    // A point known in `from` is re-expressed in `to`.
    const Vec2 p(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec2 world = local_to_world(p, from);
    EXPECT_LE((project_between_frames(p, rel) - world_to_local(world, to)).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace hpf
