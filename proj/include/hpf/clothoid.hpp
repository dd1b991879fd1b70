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

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpf
{
struct FresnelCS
{
  double c{0.0};
  double s{0.0};
};

/// Normalised Fresnel integrals C(x) = ∫0^x cos(pi u^2 / 2) du and
/// S(x) = ∫0^x sin(pi u^2 / 2) du.
///
/// Power series for |x| <= 1.5, complex continued fraction (modified Lentz)
/// for the complementary error function beyond that. Both branches converge
/// to full double precision.
FresnelCS fresnel(double x);

/// Moments I_k(a, b) = ∫0^1 t^k exp(i (a t^2 / 2 + b t)) dt for k = 0, 1, 2.
///
/// For |a| >= 0.1 the quadratic phase is completed to a square and I_0 is
/// expressed with two Fresnel evaluations; I_1 and I_2 follow by integration
/// by parts. For small |a| the exp(i a t^2 / 2) factor is expanded in a
/// Taylor series over the moments of exp(i b t).
std::array<std::complex<double>, 3> fresnel_moments(double a, double b);

/// Clothoid arc: curvature varies linearly with arc length,
/// kappa(s) = kappa0 + dkappa * s for s in [0, length].
struct ClothoidSegment
{
  double x0{0.0};
  double y0{0.0};
  double theta0{0.0};
  double kappa0{0.0};
  double dkappa{0.0};
  double length{0.0};

  Pose2D pose_at(double s) const;
  double theta_at(double s) const { return theta0 + s * (kappa0 + 0.5 * dkappa * s); }
  double kappa_at(double s) const { return kappa0 + dkappa * s; }
  Vec2 start() const { return {x0, y0}; }
  Vec2 end() const;
};

class ClothoidFitError : public std::runtime_error
{
public:
  ClothoidFitError(const std::string & what, double residual)
  : std::runtime_error(what), residual_(residual)
  {
  }
  double residual() const { return residual_; }

private:
  double residual_;
};

/// G1 Hermite interpolation: the clothoid leaving p0 with heading theta0 and
/// reaching p1 with heading theta1.
///
/// The problem is reduced to a scalar root in the "curvature rate" parameter
/// A (with kappa0 = (delta - A) / L and dkappa = 2 A / L^2, delta the
/// normalised heading change); the root is found by damped Newton iteration
/// from a polynomial initial guess that is exact for the straight line and
/// the circular arc. Throws ClothoidFitError if p0 == p1 or the iteration
/// does not converge within 100 steps.
ClothoidSegment clothoid_g1_fit(const Vec2 & p0, double theta0, const Vec2 & p1, double theta1);

struct SplineSample
{
  Pose2D pose;
  double kappa{0.0};
  bool clamped{false};
};

/// Piecewise clothoid path, arc-length parametrised from 0.
class ClothoidSpline
{
public:
  ClothoidSpline() = default;
  explicit ClothoidSpline(std::vector<ClothoidSegment> segments);

  const std::vector<ClothoidSegment> & segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  double length() const { return offsets_.empty() ? 0.0 : offsets_.back(); }

  /// Pose and curvature at arc length s; out-of-range s is clamped and flagged.
  SplineSample eval(double s) const;

  /// Index of the segment containing s (clamped).
  std::size_t segment_index(double s) const;
  double segment_offset(std::size_t i) const { return offsets_[i]; }

private:
  std::vector<ClothoidSegment> segments_;
  std::vector<double> offsets_;  // size = segments + 1
};

SplineSample eval_spline(const ClothoidSpline & spline, double s);

/// Heading and curvature imposed at the first waypoint, used when a new
/// stretch of spline is appended to frozen segments.
struct StartConstraint
{
  double theta{0.0};
  double kappa{0.0};
};

struct G2Options
{
  int max_sweeps{50};
  double tolerance{1e-10};      // target joint curvature mismatch
  double accept_mismatch{1e-6};  // larger mismatch after max_sweeps is an error
};

class G2FitError : public std::runtime_error
{
public:
  G2FitError(const std::string & what, double max_mismatch)
  : std::runtime_error(what), max_mismatch_(max_mismatch)
  {
  }
  double max_mismatch() const { return max_mismatch_; }

private:
  double max_mismatch_;
};

/// Builds a G2 clothoid spline through the waypoints.
///
/// Each pair of consecutive waypoints is joined by a G1 clothoid; the
/// headings at the waypoints are the unknowns, chosen so that curvature is
/// continuous at every interior joint. Without a start constraint the two end
/// headings are fixed to the tangents of the circles through the first and
/// last three waypoints; with one, the first heading and curvature are
/// imposed, the last heading is still the circle tangent, and the second
/// waypoint may slide along the normal of the chord joining its neighbours
/// to absorb the extra equation. The joint equations are solved by damped
/// Newton sweeps starting from chord-bisector headings.
ClothoidSpline build_g2_spline(
  std::span<const Vec2> waypoints, const std::optional<StartConstraint> & start = std::nullopt,
  const G2Options & options = {});

/// Largest joint mismatches over a spline: position (m), heading (rad), curvature (1/m).
struct JointMismatch
{
  double position{0.0};
  double heading{0.0};
  double curvature{0.0};
};
JointMismatch joint_mismatch(const ClothoidSpline & spline);

}  // namespace hpf
