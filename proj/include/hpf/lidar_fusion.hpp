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
#include "hpf/sim_world.hpp"

#include <Eigen/Core>

#include <optional>
#include <string_view>
#include <vector>

namespace hpf
{
struct Cluster
{
  Vec2 centroid{Vec2::Zero()};
  std::size_t point_count{0};
  std::vector<std::size_t> members;  // indices into Scan::points, ascending
};

/// Single-linkage Euclidean clustering of a scan: two points share a cluster
/// iff a chain of neighbours at most d_max apart connects them. Clusters
/// with fewer than n_min points are dropped. The output does not depend on
/// the order of the scan points; clusters are sorted by their smallest
/// member coordinate (x, then y).
std::vector<Cluster> cluster_scan(const Scan & scan, double d_max, std::size_t n_min);

Vec2 scan_point_xy(const ScanPoint & p);

/// Camera-frame point (x right, y down, z forward) to the LIDAR plane.
Vec2 camera_to_lidar(const Eigen::Vector3d & c, const FrameTransform & lidar_from_camera);

enum class FusionMode { Bootstrap, TrackedBoth, TrackedLidarOnly, TrackedCameraOnly, Lost };

std::string_view to_string(FusionMode mode);

struct FusionParams
{
  double gate{0.6};  // m
  int n_ttl{40};
  int n_boot{20};
};

struct FusionState
{
  FusionMode mode{FusionMode::Bootstrap};
  std::optional<Vec2> leader_local;  // in the frame of the step that produced it
  int frames_since_camera{0};
  int frames_since_lidar{0};
  int agreement_count{0};
};

struct FusionOutput
{
  FusionState state;
  std::optional<Vec2> measurement;         // frame L_k
  std::optional<std::size_t> cluster_index;  // matched LIDAR cluster
  bool camera_used{false};
};

/// One step of the spatio-temporal correspondence machine.
///
/// The prior leader position is moved into the current frame, then the
/// nearest cluster and the camera point are gated against it. Bootstrap (and
/// Lost) require N_boot consecutive steps of camera/cluster agreement in front
/// of the robot before tracking starts; while tracking, either sensor alone
/// keeps the lock, and N_ttl consecutive double misses drop it.
FusionOutput fuse_step(
  const std::vector<Cluster> & clusters, const std::optional<Vec2> & camera_leader_local, const FusionState & prior,
  const Pose2D & robot_motion, const FusionParams & params);

}  // namespace hpf
