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

#include "hpf/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpf
{
bool admit_point(const PathPoint & candidate, PathDataset & dataset, double epsilon_d)
{
  if (!dataset.points.empty() && (candidate.p - dataset.points.back().p).norm() <= epsilon_d) {
    return false;
  }
  dataset.points.push_back(candidate);
  return true;
}

std::vector<double> arc_length_abscissa(std::span<const Vec2> points)
{
  std::vector<double> u(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i) {
    u[i] = u[i - 1] + (points[i] - points[i - 1]).norm();
  }
  return u;
}

namespace
{
double tricube(double r)
{
  if (r >= 1.0) {
    return 0.0;
  }
  const double c = 1.0 - r * r * r;
  return c * c * c;
}
}  // namespace

std::vector<Vec2> loess_smooth(std::span<const Vec2> points, double span, int degree)
{
  if (!(span > 0.0 && span <= 1.0)) {
    throw std::invalid_argument("loess_smooth: span must lie in (0, 1]");
  }
  if (degree != 1) {
    throw std::invalid_argument("loess_smooth: only degree 1 is supported");
  }
  const std::size_t n = points.size();
  std::vector<Vec2> out(points.begin(), points.end());
  if (n < 3) {
    return out;
  }
  const std::vector<double> u = arc_length_abscissa(points);
  const auto q = std::min(n, std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(span * n - 1e-9))));

  std::vector<double> dist(n);
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = std::abs(u[j] - u[i]);
    }
    sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
    const double dmax = sorted[q - 1];

    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    Vec2 t0 = Vec2::Zero();
    Vec2 t1 = Vec2::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const double w = dmax > 0.0 ? tricube(dist[j] / dmax) : (dist[j] == 0.0 ? 1.0 : 0.0);
      if (w == 0.0) {
        continue;
      }
      const double d = u[j] - u[i];
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      t0 += w * points[j];
      t1 += w * d * points[j];
    }
    const double det = s0 * s2 - s1 * s1;
    if (det > 1e-12 * s0 * s2 && det > 0.0) {
      out[i] = (s2 * t0 - s1 * t1) / det;
    } else {
      out[i] = t0 / s0;
    }
  }
  return out;
}

std::vector<Vec2> resample_uniform(std::span<const Vec2> points, double spacing)
{
  if (!(spacing > 0.0)) {
    throw std::invalid_argument("resample_uniform: spacing must be positive");
  }
  if (points.empty()) {
    return {};
  }
  const std::vector<double> u = arc_length_abscissa(points);
  const double total = u.back();
  std::vector<Vec2> out;
  out.push_back(points.front());
  if (total <= 0.0) {
    return out;
  }
  std::size_t seg = 0;
  for (std::size_t k = 1;; ++k) {
    const double s = static_cast<double>(k) * spacing;
    if (s >= total - 1e-9) {
      break;
    }
    while (seg + 2 < u.size() && u[seg + 1] < s) {
      ++seg;
    }
    const double len = u[seg + 1] - u[seg];
    const double f = len > 0.0 ? (s - u[seg]) / len : 0.0;
    out.push_back(points[seg] + f * (points[seg + 1] - points[seg]));
  }
  out.push_back(points.back());
  return out;
}

PathBuilder::PathBuilder(PathParams params) : params_(params) {}

bool PathBuilder::add(const PathPoint & candidate)
{
  const auto & pts = dataset_.points;
  const bool has_direction = pts.size() >= 2;
  const Vec2 last_dir = has_direction ? Vec2(pts.back().p - pts[pts.size() - 2].p) : Vec2::Zero();
  if (!admit_point(candidate, dataset_, params_.epsilon_d)) {
    return false;
  }
  if (has_direction && last_dir.dot(candidate.p - pts[pts.size() - 2].p) < 0.0) {
    ++backtracks_;
  }
  rebuild();
  return true;
}

void PathBuilder::rebuild()
{
  const std::size_t n = dataset_.points.size();
  const std::size_t start = n > params_.window ? n - params_.window : 0;
  std::vector<Vec2> raw;
  raw.reserve(n - start);
  for (std::size_t i = start; i < n; ++i) {
    raw.push_back(dataset_.points[i].p);
  }
  const std::vector<Vec2> fresh = loess_smooth(raw, params_.loess_span);
  smoothed_.resize(n);
  for (std::size_t i = start; i < n; ++i) {
    smoothed_[i] = fresh[i - start];
  }
  frozen_ = start;
  if (n < 2) {
    return;
  }

  std::vector<Vec2> waypoints = resample_uniform(smoothed_, params_.spacing);
  if (waypoints.size() >= 3 &&
      (waypoints.back() - waypoints[waypoints.size() - 2]).norm() < 0.25 * params_.spacing) {
    waypoints.erase(waypoints.end() - 2);
  }
  if (waypoints.size() < 2) {
    return;
  }

  // Waypoints placed on the frozen part of the smoothed polyline are final.
  const std::vector<double> u = arc_length_abscissa(smoothed_);
  const double frozen_length = frozen_ > 0 ? u[frozen_ - 1] : 0.0;
  std::size_t stable = 0;
  while (stable + 2 < waypoints.size() && static_cast<double>(stable) * params_.spacing <= frozen_length) {
    ++stable;
  }

  // Keep segments that end at a waypoint that was already final at the
  // previous build; refit the rest starting from the last kept state.
  std::vector<ClothoidSegment> segments;
  std::optional<StartConstraint> constraint;
  std::vector<Vec2> tail = waypoints;
  if (snapshot_ && snapshot_->stable_waypoints >= 2) {
    const auto & prev = snapshot_->spline.segments();
    std::size_t keep = std::min(snapshot_->stable_waypoints - 2, prev.size());
    while (keep > 0 && keep + 2 >= waypoints.size()) {
      --keep;
    }
    if (keep > 0) {
      segments.assign(prev.begin(), prev.begin() + static_cast<std::ptrdiff_t>(keep));
      const ClothoidSegment & last = segments.back();
      constraint = StartConstraint{last.theta_at(last.length), last.kappa_at(last.length)};
      tail.assign(waypoints.begin() + static_cast<std::ptrdiff_t>(keep), waypoints.end());
      tail.front() = last.end();
    }
  }
  try {
    const ClothoidSpline fit = build_g2_spline(tail, constraint);
    segments.insert(segments.end(), fit.segments().begin(), fit.segments().end());
  } catch (const G2FitError &) {
    ++fit_failures_;
    return;
  } catch (const std::invalid_argument &) {
    return;
  }
  auto snap = std::make_shared<PathSnapshot>();
  snap->spline = ClothoidSpline(std::move(segments));
  snap->waypoints = std::move(waypoints);
  snap->version = next_version_++;
  snap->stable_waypoints = stable;
  snapshot_ = std::move(snap);
}

nlohmann::json spline_to_json(const ClothoidSpline & spline)
{
  nlohmann::json out = nlohmann::json::array();
  for (const auto & s : spline.segments()) {
    out.push_back(
      {{"x0", s.x0}, {"y0", s.y0}, {"theta0", s.theta0}, {"kappa0", s.kappa0}, {"dkappa", s.dkappa}, {"L", s.length}});
  }
  return out;
}

ClothoidSpline spline_from_json(const nlohmann::json & j)
{
  std::vector<ClothoidSegment> segs;
  for (const auto & e : j) {
    ClothoidSegment s;
    s.x0 = e.at("x0").get<double>();
    s.y0 = e.at("y0").get<double>();
    s.theta0 = e.at("theta0").get<double>();
    s.kappa0 = e.at("kappa0").get<double>();
    s.dkappa = e.at("dkappa").get<double>();
    s.length = e.at("L").get<double>();
    segs.push_back(s);
  }
  return ClothoidSpline(std::move(segs));
}

}  // namespace hpf
