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

#include "hpf/lidar_fusion.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace hpf
{
namespace
{
constexpr double kPi = std::numbers::pi;

ScanPoint polar(const Vec2 & p)
{
  double a = std::atan2(p.y(), p.x());
  if (a < 0.0) {
    a += 2.0 * kPi;
  }
  return {p.norm(), a, -1};
}

std::vector<Vec2> scan_xy(const Scan & scan)
{
  std::vector<Vec2> out;
  for (const auto & p : scan.points) {
    out.push_back(scan_point_xy(p));
  }
  return out;
}

std::set<std::vector<std::size_t>> member_sets(const std::vector<Cluster> & clusters)
{
  std::set<std::vector<std::size_t>> out;
  for (const auto & c : clusters) {
    out.insert(c.members);
  }
  return out;
}

Cluster cluster_at(const Vec2 & p)
{
  Cluster c;
  c.centroid = p;
  c.point_count = 10;
  return c;
}

TEST(ClusterScan, IsolatedPointsAreDropped)
{
  Scan scan;
  scan.points = {polar(Vec2(1, 0)), polar(Vec2(11, 0))};
  EXPECT_TRUE(cluster_scan(scan, 0.3, 2).empty());
}

TEST(ClusterScan, RingCentroid)
{
  Scan scan;
  for (int i = 0; i < 20; ++i) {
    const double a = 2.0 * kPi * i / 20.0;
    scan.points.push_back(polar(Vec2(3.0 + 0.2 * std::cos(a), 1.0 + 0.2 * std::sin(a))));
  }
  const auto clusters = cluster_scan(scan, 0.3, 4);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_NEAR(clusters[0].centroid.x(), 3.0, 1e-9);
  EXPECT_NEAR(clusters[0].centroid.y(), 1.0, 1e-9);
  EXPECT_EQ(clusters[0].point_count, 20u);
}

TEST(ClusterScan, MatchesUnionFindOracleAndIsPermutationInvariant)
{
  Rng rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    const Scan scan = oracle::random_scan(rng);
    const double d_max = rng.uniform(0.1, 0.6);
    const std::size_t n_min = 1 + rng.index(5);
    const auto clusters = cluster_scan(scan, d_max, n_min);
    const auto pts = scan_xy(scan);
    ASSERT_EQ(member_sets(clusters), oracle::union_find_clusters(pts, d_max, n_min)) << "trial " << trial;
    for (const auto & c : clusters) {
      // Centroid is within the member spread.
      double spread = 0.0;
      for (std::size_t i : c.members) {
        for (std::size_t j : c.members) {
          spread = std::max(spread, (pts[i] - pts[j]).norm());
        }
      }
      for (std::size_t i : c.members) {
        EXPECT_LE((c.centroid - pts[i]).norm(), spread + 1e-12);
      }
    }

    // Shuffle and compare clusters through the point coordinates.
    std::vector<std::size_t> perm(scan.points.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[rng.index(i)]);
    }
    Scan shuffled;
    for (std::size_t i : perm) {
      shuffled.points.push_back(scan.points[i]);
    }
    const auto again = cluster_scan(shuffled, d_max, n_min);
    ASSERT_EQ(again.size(), clusters.size());
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      EXPECT_EQ(again[c].centroid, clusters[c].centroid);
      std::set<std::size_t> a(clusters[c].members.begin(), clusters[c].members.end());
      std::set<std::size_t> b;
      for (std::size_t m : again[c].members) {
        b.insert(perm[m]);
      }
      EXPECT_EQ(a, b);
    }
  }
}

TEST(CameraToLidar, AxisConventionAndMounting)
{
  const Vec2 a = camera_to_lidar(Eigen::Vector3d(0, 0.3, 2), FrameTransform::identity());
  EXPECT_NEAR(a.x(), 2.0, 1e-15);
  EXPECT_NEAR(a.y(), 0.0, 1e-15);
  const Vec2 b = camera_to_lidar(Eigen::Vector3d(0, 0.3, 2), {Vec2(0.1, 0), 0.0});
  EXPECT_NEAR(b.x(), 2.1, 1e-15);
  Rng rng(52);
  const FrameTransform mount{Vec2(0.12, -0.03), 5.0 * kPi / 180.0};
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d c(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 3));
    // x right, z forward: the camera-plane point is (z, -x).
    const Vec2 expected = transform_point(mount, Vec2(c.z(), -c.x()));
    EXPECT_LE((camera_to_lidar(c, mount) - expected).norm(), 1e-15);
  }
}

FusionState tracked_at(const Vec2 & p)
{
  FusionState s;
  s.mode = FusionMode::TrackedBoth;
  s.leader_local = p;
  return s;
}

TEST(FuseStep, SymmetricMidpoint)
{
  FusionParams params;
  params.gate = 0.5;
  const auto out = fuse_step({cluster_at(Vec2(2.0, 0.1))}, Vec2(2.0, -0.1), tracked_at(Vec2(2, 0)), {}, params);
  ASSERT_TRUE(out.measurement);
  EXPECT_NEAR(out.measurement->x(), 2.0, 1e-15);
  EXPECT_NEAR(out.measurement->y(), 0.0, 1e-15);
  EXPECT_EQ(out.state.mode, FusionMode::TrackedBoth);
  EXPECT_TRUE(out.camera_used);
}

TEST(FuseStep, LidarAloneFollowsTurningLeader)
{
  FusionParams params;
  FusionState s = tracked_at(Vec2(2, 0));
  for (int k = 1; k <= 5; ++k) {
    const double a = 0.1 * k;
    const Vec2 leader(2.0 * std::cos(a), 2.0 * std::sin(a));
    const auto out = fuse_step({cluster_at(leader), cluster_at(Vec2(-3, 0))}, std::nullopt, s, {}, params);
    ASSERT_TRUE(out.measurement);
    EXPECT_EQ(out.state.mode, FusionMode::TrackedLidarOnly);
    EXPECT_LE((*out.measurement - leader).norm(), 1e-15);
    s = out.state;
  }
}

TEST(FuseStep, DoubleMissForTtlStepsIsLost)
{
  FusionParams params;
  FusionState s = tracked_at(Vec2(2, 0));
  for (int k = 1; k <= params.n_ttl; ++k) {
    const auto out = fuse_step({}, std::nullopt, s, {}, params);
    EXPECT_FALSE(out.measurement);
    s = out.state;
    if (k < params.n_ttl) {
      EXPECT_NE(s.mode, FusionMode::Lost);
      EXPECT_TRUE(s.leader_local);
    }
  }
  EXPECT_EQ(s.mode, FusionMode::Lost);
}

TEST(FuseStep, BootstrapNeedsAgreementAndCamera)
{
  FusionParams params;
  FusionState s;
  for (int k = 1; k <= params.n_boot; ++k) {
    // LIDAR alone never bootstraps.
    const auto lidar_only = fuse_step({cluster_at(Vec2(1.5, 0))}, std::nullopt, s, {}, params);
    EXPECT_EQ(lidar_only.state.mode, FusionMode::Bootstrap);
    const auto out = fuse_step({cluster_at(Vec2(1.5, 0.02))}, Vec2(1.5, -0.02), s, {}, params);
    s = out.state;
    if (k < params.n_boot) {
      EXPECT_EQ(s.mode, FusionMode::Bootstrap);
      EXPECT_FALSE(out.measurement);
    }
  }
  EXPECT_EQ(s.mode, FusionMode::TrackedBoth);
}

TEST(FuseStep, BehindTheRobotDoesNotBootstrap)
{
  FusionParams params;
  FusionState s;
  for (int k = 0; k < 3 * params.n_boot; ++k) {
    s = fuse_step({cluster_at(Vec2(-1.5, 0))}, Vec2(-1.5, 0), s, {}, params).state;
  }
  EXPECT_EQ(s.mode, FusionMode::Bootstrap);
}

TEST(FuseStepProperty, MeasurementStaysInsideGate)
{
  Rng rng(53);
  FusionParams params;
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec2 prior(rng.uniform(0.5, 4), rng.uniform(-2, 2));
    const Pose2D motion = make_pose(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.2, 0.2));
    const Vec2 projected = project_between_frames(prior, motion);
    std::vector<Cluster> clusters;
    const int n = static_cast<int>(rng.index(5));
    for (int i = 0; i < n; ++i) {
      clusters.push_back(cluster_at(projected + Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1))));
    }
    std::optional<Vec2> cam;
    if (rng.bernoulli(0.6)) {
      cam = projected + Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    FusionState s = tracked_at(prior);
    s.mode = rng.bernoulli(0.5) ? FusionMode::TrackedBoth : FusionMode::TrackedLidarOnly;
    const auto out = fuse_step(clusters, cam, s, motion, params);
    if (out.measurement) {
      EXPECT_LE((*out.measurement - projected).norm(), params.gate + 1e-12);
      EXPECT_NE(out.state.mode, FusionMode::Lost);
      EXPECT_TRUE(out.state.leader_local);
    }
  }
}

}  // namespace
}  // namespace hpf
