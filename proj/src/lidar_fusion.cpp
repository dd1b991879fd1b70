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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace hpf
{
namespace
{
class DisjointSet
{
public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t i)
  {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  void unite(std::size_t a, std::size_t b)
  {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent_[std::max(a, b)] = std::min(a, b);
    }
  }

private:
  std::vector<std::size_t> parent_;
};

struct CellKey
{
  long long ix;
  long long iy;
  bool operator==(const CellKey &) const = default;
};

struct CellHash
{
  std::size_t operator()(const CellKey & k) const
  {
    return std::hash<long long>()(k.ix * 73856093LL ^ k.iy * 19349663LL);
  }
};

bool lex_less(const Vec2 & a, const Vec2 & b)
{
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}
}  // namespace

Vec2 scan_point_xy(const ScanPoint & p)
{
  return {p.r * std::cos(p.alpha), p.r * std::sin(p.alpha)};
}

std::vector<Cluster> cluster_scan(const Scan & scan, double d_max, std::size_t n_min)
{
  const std::size_t n = scan.points.size();
  std::vector<Vec2> xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xy[i] = scan_point_xy(scan.points[i]);
  }

  // Grid with cell size d_max: neighbours are in the 3x3 block around a cell.
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  auto key_of = [d_max](const Vec2 & p) {
    return CellKey{static_cast<long long>(std::floor(p.x() / d_max)), static_cast<long long>(std::floor(p.y() / d_max))};
  };
  for (std::size_t i = 0; i < n; ++i) {
    grid[key_of(xy[i])].push_back(i);
  }
  const double d2_max = d_max * d_max;
  DisjointSet ds(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CellKey k = key_of(xy[i]);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find({k.ix + dx, k.iy + dy});
        if (it == grid.end()) {
          continue;
        }
        for (std::size_t j : it->second) {
          if (j > i && (xy[i] - xy[j]).squaredNorm() <= d2_max) {
            ds.unite(i, j);
          }
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    groups[ds.find(i)].push_back(i);
  }
  std::vector<Cluster> clusters;
  std::vector<Vec2> keys;
  for (auto & [root, members] : groups) {
    if (members.size() < n_min) {
      continue;
    }
    // Sum in coordinate order so the centroid is bit-identical under any
    // permutation of the input.
    std::vector<Vec2> pts;
    pts.reserve(members.size());
    for (std::size_t m : members) {
      pts.push_back(xy[m]);
    }
    std::sort(pts.begin(), pts.end(), lex_less);
    Vec2 sum = Vec2::Zero();
    for (const auto & p : pts) {
      sum += p;
    }
    Cluster c;
    c.centroid = sum / static_cast<double>(pts.size());
    c.point_count = members.size();
    std::sort(members.begin(), members.end());
    c.members = std::move(members);
    clusters.push_back(std::move(c));
    keys.push_back(pts.front());
  }
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lex_less(keys[a], keys[b]); });
  std::vector<Cluster> sorted;
  sorted.reserve(clusters.size());
  for (std::size_t i : order) {
    sorted.push_back(std::move(clusters[i]));
  }
  return sorted;
}

Vec2 camera_to_lidar(const Eigen::Vector3d & c, const FrameTransform & lidar_from_camera)
{
  return transform_point(lidar_from_camera, Vec2(c.z(), -c.x()));
}

std::string_view to_string(FusionMode mode)
{
  switch (mode) {
    case FusionMode::Bootstrap:
      return "Bootstrap";
    case FusionMode::TrackedBoth:
      return "TrackedBoth";
    case FusionMode::TrackedLidarOnly:
      return "TrackedLidarOnly";
    case FusionMode::TrackedCameraOnly:
      return "TrackedCameraOnly";
    case FusionMode::Lost:
      return "Lost";
  }
  return "Unknown";
}

namespace
{
std::optional<std::size_t> nearest_cluster(const std::vector<Cluster> & clusters, const Vec2 & p, double gate)
{
  std::optional<std::size_t> best;
  double best_d = gate;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const double d = (clusters[i].centroid - p).norm();
    if (d <= best_d) {
      if (!best || d < best_d) {
        best = i;
        best_d = d;
      }
    }
  }
  return best;
}

FusionOutput acquire(
  const std::vector<Cluster> & clusters, const std::optional<Vec2> & camera, const std::optional<Vec2> & predicted,
  FusionState state, const FusionParams & params)
{
  FusionOutput out;
  std::optional<Vec2> candidate;
  std::optional<std::size_t> cluster;
  if (camera && camera->x() > 0.0) {
    cluster = nearest_cluster(clusters, *camera, params.gate);
    if (cluster) {
      candidate = 0.5 * (clusters[*cluster].centroid + *camera);
    }
  }
  if (!candidate) {
    state.agreement_count = 0;
    state.leader_local = predicted;
    out.state = state;
    return out;
  }
  const bool consistent = predicted && (*candidate - *predicted).norm() <= params.gate;
  state.agreement_count = consistent ? state.agreement_count + 1 : 1;
  state.leader_local = candidate;
  if (state.agreement_count >= params.n_boot) {
    state.mode = FusionMode::TrackedBoth;
    state.frames_since_camera = 0;
    state.frames_since_lidar = 0;
    out.measurement = candidate;
    out.cluster_index = cluster;
    out.camera_used = true;
  }
  out.state = state;
  return out;
}
}  // namespace

FusionOutput fuse_step(
  const std::vector<Cluster> & clusters, const std::optional<Vec2> & camera_leader_local, const FusionState & prior,
  const Pose2D & robot_motion, const FusionParams & params)
{
  std::optional<Vec2> predicted;
  if (prior.leader_local) {
    predicted = project_between_frames(*prior.leader_local, robot_motion);
  }
  FusionState state = prior;

  if (prior.mode == FusionMode::Bootstrap || prior.mode == FusionMode::Lost) {
    return acquire(clusters, camera_leader_local, predicted, state, params);
  }

  FusionOutput out;
  if (!predicted) {
    // Tracking without a prior cannot happen through fuse_step itself.
    state.mode = FusionMode::Lost;
    out.state = state;
    return out;
  }
  const auto cluster = nearest_cluster(clusters, *predicted, params.gate);
  const bool camera_hit = camera_leader_local && (*camera_leader_local - *predicted).norm() <= params.gate;

  state.frames_since_lidar = cluster ? 0 : state.frames_since_lidar + 1;
  state.frames_since_camera = camera_hit ? 0 : state.frames_since_camera + 1;

  if (cluster && camera_hit) {
    state.mode = FusionMode::TrackedBoth;
    out.measurement = 0.5 * (clusters[*cluster].centroid + *camera_leader_local);
  } else if (cluster) {
    state.mode = FusionMode::TrackedLidarOnly;
    out.measurement = clusters[*cluster].centroid;
  } else if (camera_hit) {
    state.mode = FusionMode::TrackedCameraOnly;
    out.measurement = *camera_leader_local;
  }
  out.cluster_index = cluster;
  out.camera_used = camera_hit;

  if (out.measurement) {
    state.leader_local = out.measurement;
  } else if (std::min(state.frames_since_camera, state.frames_since_lidar) >= params.n_ttl) {
    state.mode = FusionMode::Lost;
    state.leader_local.reset();
    state.agreement_count = 0;
  } else {
    state.leader_local = predicted;
  }
  out.state = state;
  return out;
}

}  // namespace hpf
