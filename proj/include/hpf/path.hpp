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

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace hpf
{
struct PathPoint
{
  Vec2 p{Vec2::Zero()};
  double t{0.0};
};

/// Admitted leader positions, consecutive points more than epsilon_d apart.
struct PathDataset
{
  std::vector<PathPoint> points;
};

/// Appends the candidate if the dataset is empty or it lies farther than
/// epsilon_d from the last admitted point.
bool admit_point(const PathPoint & candidate, PathDataset & dataset, double epsilon_d);

/// Cumulative chord length along the points, starting at 0.
std::vector<double> arc_length_abscissa(std::span<const Vec2> points);

/// LOESS with tricube weights. x and y are regressed independently against
/// the cumulative chord length; for each point the q = max(3, ceil(span n))
/// nearest abscissae define the bandwidth. Degree 1 only. Fewer than three
/// points pass through unchanged.
std::vector<Vec2> loess_smooth(std::span<const Vec2> points, double span, int degree = 1);

/// Points at arc length 0, spacing, 2 spacing, ... along the polyline, plus
/// the final endpoint.
std::vector<Vec2> resample_uniform(std::span<const Vec2> points, double spacing);

struct PathParams
{
  double epsilon_d{0.05};  // m
  double loess_span{0.3};
  double spacing{0.5};     // m
  std::size_t window{20};  // trailing raw points re-smoothed on each admission
};

/// Immutable spline published by the builder.
struct PathSnapshot
{
  ClothoidSpline spline;
  std::vector<Vec2> waypoints;
  std::uint64_t version{0};
  std::size_t stable_waypoints{0};  // waypoints that later rebuilds cannot move
};

/// Incremental path reconstruction: admission, LOESS over the trailing window,
/// uniform resampling and G2 spline fitting with the settled prefix frozen.
class PathBuilder
{
public:
  explicit PathBuilder(PathParams params = {});

  /// Returns true when the point was admitted (the spline is then rebuilt).
  bool add(const PathPoint & candidate);

  std::shared_ptr<const PathSnapshot> snapshot() const { return snapshot_; }
  std::uint64_t version() const { return snapshot_ ? snapshot_->version : 0; }

  const PathDataset & dataset() const { return dataset_; }
  const std::vector<Vec2> & smoothed() const { return smoothed_; }
  std::size_t fit_failures() const { return fit_failures_; }
  std::size_t backtracks() const { return backtracks_; }

private:
  void rebuild();

  PathParams params_;
  PathDataset dataset_;
  std::vector<Vec2> smoothed_;
  std::size_t frozen_{0};  // smoothed_[0, frozen_) no longer changes
  std::shared_ptr<const PathSnapshot> snapshot_;
  std::uint64_t next_version_{1};
  std::size_t fit_failures_{0};
  std::size_t backtracks_{0};
};

nlohmann::json spline_to_json(const ClothoidSpline & spline);
ClothoidSpline spline_from_json(const nlohmann::json & j);

}  // namespace hpf
