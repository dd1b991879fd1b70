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

#include "hpf/clothoid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hpf
{
namespace
{
using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

FresnelCS fresnel_series(double ax)
{
  // Alternating series; odd terms feed S, even terms feed C.
  const double fact = 0.5 * kPi * ax * ax;
  double sum_c = ax;
  double sum_s = 0.0;
  double term = ax;
  double sign = 1.0;
  bool odd = true;
  double n = 3.0;
  for (int k = 1; k < 200; ++k) {
    term *= fact / k;
    const double contribution = sign * term / n;
    if (odd) {
      sum_s += contribution;
      sign = -sign;
    } else {
      sum_c += contribution;
    }
    if (term < kEps * std::max(std::abs(sum_c), std::abs(sum_s)) * 1e-2) {
      break;
    }
    odd = !odd;
    n += 2.0;
  }
  return {sum_c, sum_s};
}

FresnelCS fresnel_continued_fraction(double ax)
{
  constexpr double kTiny = 1e-300;
  const double pix2 = kPi * ax * ax;
  cplx b(1.0, -pix2);
  cplx cc(1.0 / kTiny, 0.0);
  cplx d = 1.0 / b;
  cplx h = d;
  double n = -1.0;
  for (int k = 2; k < 500; ++k) {
    n += 2.0;
    const double a = -n * (n + 1.0);
    b += 4.0;
    d = 1.0 / (a * d + b);
    cc = b + a / cc;
    const cplx del = cc * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps) {
      break;
    }
  }
  h *= cplx(ax, -ax);
  const cplx cs = cplx(0.5, 0.5) * (1.0 - cplx(std::cos(0.5 * pix2), std::sin(0.5 * pix2)) * h);
  return {cs.real(), cs.imag()};
}

// M_j(b) = ∫0^1 t^j exp(i b t) dt for j = 0..jmax.
std::vector<cplx> exp_moments(double b, int jmax)
{
  std::vector<cplx> m(static_cast<std::size_t>(jmax) + 1);
  if (std::abs(b) < 8.0) {
    for (int j = 0; j <= jmax; ++j) {
      cplx sum = 0.0;
      cplx term = 1.0;  // (i b)^k / k!
      for (int k = 0; k < 200; ++k) {
        const cplx add = term / static_cast<double>(j + k + 1);
        sum += add;
        if (k > 2 && std::abs(add) < 1e-18) {
          break;
        }
        term *= cplx(0.0, b) / static_cast<double>(k + 1);
      }
      m[static_cast<std::size_t>(j)] = sum;
    }
  } else {
    const cplx ib(0.0, b);
    const cplx e = std::exp(ib);
    m[0] = (e - 1.0) / ib;
    for (int j = 1; j <= jmax; ++j) {
      m[static_cast<std::size_t>(j)] = (e - static_cast<double>(j) * m[static_cast<std::size_t>(j) - 1]) / ib;
    }
  }
  return m;
}

constexpr double kSmallA = 0.1;
constexpr int kSmallATerms = 10;

cplx moment0_large_a(double a, double b)
{
  const double s = a > 0.0 ? 1.0 : -1.0;
  const double absa = std::abs(a);
  const double z = std::sqrt(absa / kPi);
  const double ell = s * b / std::sqrt(kPi * absa);
  const double g = -0.5 * s * b * b / absa;
  const FresnelCS fl = fresnel(ell);
  const FresnelCS fz = fresnel(ell + z);
  const double dc = fz.c - fl.c;
  const double ds = fz.s - fl.s;
  const double cg = std::cos(g) / z;
  const double sg = std::sin(g) / z;
  return {cg * dc - s * sg * ds, sg * dc + s * cg * ds};
}

std::array<cplx, 3> moments_small_a(double a, double b, int nk)
{
  const auto m = exp_moments(b, 2 * kSmallATerms + 2);
  std::array<cplx, 3> out{};
  for (int k = 0; k < nk; ++k) {
    cplx sum = 0.0;
    cplx coeff = 1.0;  // (i a / 2)^n / n!
    for (int n = 0; n <= kSmallATerms; ++n) {
      sum += coeff * m[static_cast<std::size_t>(2 * n + k)];
      coeff *= cplx(0.0, 0.5 * a) / static_cast<double>(n + 1);
    }
    out[static_cast<std::size_t>(k)] = sum;
  }
  return out;
}

cplx moment0(double a, double b)
{
  if (std::abs(a) < kSmallA) {
    return moments_small_a(a, b, 1)[0];
  }
  return moment0_large_a(a, b);
}

}  // namespace

FresnelCS fresnel(double x)
{
  const double ax = std::abs(x);
  FresnelCS r;
  if (ax < 1e-150) {
    r = {ax, 0.0};
  } else if (ax <= 1.5) {
    r = fresnel_series(ax);
  } else {
    r = fresnel_continued_fraction(ax);
  }
  if (x < 0.0) {
    r.c = -r.c;
    r.s = -r.s;
  }
  return r;
}

std::array<std::complex<double>, 3> fresnel_moments(double a, double b)
{
  if (std::abs(a) < kSmallA) {
    return moments_small_a(a, b, 3);
  }
  const cplx i(0.0, 1.0);
  const cplx e1 = std::exp(i * (0.5 * a + b));
  const cplx m0 = moment0_large_a(a, b);
  const cplx m1 = (-i * (e1 - 1.0) - b * m0) / a;
  const cplx m2 = (-i * e1 + i * m0 - b * m1) / a;
  return {m0, m1, m2};
}

Pose2D ClothoidSegment::pose_at(double s) const
{
  const cplx rel = s * std::polar(1.0, theta0) * moment0(dkappa * s * s, kappa0 * s);
  return make_pose(x0 + rel.real(), y0 + rel.imag(), theta_at(s));
}

Vec2 ClothoidSegment::end() const
{
  return pose_at(length).position();
}

ClothoidSegment clothoid_g1_fit(const Vec2 & p0, double theta0, const Vec2 & p1, double theta1)
{
  const Vec2 d = p1 - p0;
  const double r = d.norm();
  if (!(r > 0.0)) {
    throw ClothoidFitError("clothoid_g1_fit: coincident end points", 0.0);
  }
  const double phi = std::atan2(d.y(), d.x());
  const double phi0 = normalize_angle(theta0 - phi);
  const double phi1 = normalize_angle(theta1 - phi);
  const double delta = phi1 - phi0;

  // Fitted initial guess; exact (A = 0) for straight lines and circular arcs.
  constexpr std::array<double, 6> cf = {2.989696028701907, 0.716228953608281, -0.458969738821509,
                                        -0.502821153340377, 0.261062141752652, -0.045854475238709};
  const double xn = phi0 / kPi;
  const double yn = phi1 / kPi;
  const double xy = xn * yn;
  const double x2 = xn * xn;
  const double y2 = yn * yn;
  double A = (phi0 + phi1) *
             (cf[0] + xy * (cf[1] + xy * cf[2]) + (cf[3] + xy * cf[4]) * (x2 + y2) + cf[5] * (x2 * x2 + y2 * y2));

  const cplx rot = std::polar(1.0, phi0);
  auto residual = [&](double a_param) { return (rot * moment0(2.0 * a_param, delta - a_param)).imag(); };

  double g = residual(A);
  bool converged = std::abs(g) < 1e-14;
  for (int iter = 0; iter < 100 && !converged; ++iter) {
    const auto m = fresnel_moments(2.0 * A, delta - A);
    const double dg = (rot * (m[2] - m[1])).real();
    if (dg == 0.0 || !std::isfinite(dg)) {
      break;
    }
    double step = -g / dg;
    double a_next = A + step;
    double g_next = residual(a_next);
    for (int halving = 0; halving < 30 && !(std::abs(g_next) < std::abs(g)); ++halving) {
      step *= 0.5;
      a_next = A + step;
      g_next = residual(a_next);
    }
    if (!(std::abs(g_next) <= std::abs(g))) {
      break;
    }
    A = a_next;
    g = g_next;
    converged = std::abs(g) < 1e-14;
  }
  if (!converged && !(std::abs(g) < 1e-10)) {
    throw ClothoidFitError("clothoid_g1_fit: Newton iteration did not converge", std::abs(g));
  }

  const double x_int = (rot * moment0(2.0 * A, delta - A)).real();
  if (!(x_int > 0.0)) {
    throw ClothoidFitError("clothoid_g1_fit: degenerate solution", std::abs(g));
  }
  const double length = r / x_int;
  ClothoidSegment seg;
  seg.x0 = p0.x();
  seg.y0 = p0.y();
  seg.theta0 = normalize_angle(theta0);
  seg.length = length;
  seg.kappa0 = (delta - A) / length;
  seg.dkappa = 2.0 * A / (length * length);
  return seg;
}

ClothoidSpline::ClothoidSpline(std::vector<ClothoidSegment> segments) : segments_(std::move(segments))
{
  offsets_.reserve(segments_.size() + 1);
  offsets_.push_back(0.0);
  for (const auto & seg : segments_) {
    offsets_.push_back(offsets_.back() + seg.length);
  }
}

std::size_t ClothoidSpline::segment_index(double s) const
{
  const auto it = std::upper_bound(offsets_.begin() + 1, offsets_.end() - 1, s);
  return static_cast<std::size_t>(std::distance(offsets_.begin() + 1, it));
}

SplineSample ClothoidSpline::eval(double s) const
{
  SplineSample out;
  if (segments_.empty()) {
    out.clamped = true;
    return out;
  }
  if (s < 0.0 || s > length()) {
    out.clamped = true;
    s = std::clamp(s, 0.0, length());
  }
  const std::size_t i = segment_index(s);
  const auto & seg = segments_[i];
  const double local = std::clamp(s - offsets_[i], 0.0, seg.length);
  out.pose = seg.pose_at(local);
  out.kappa = seg.kappa_at(local);
  return out;
}

SplineSample eval_spline(const ClothoidSpline & spline, double s)
{
  return spline.eval(s);
}

namespace
{
double chord_direction(const Vec2 & a, const Vec2 & b)
{
  return std::atan2(b.y() - a.y(), b.x() - a.x());
}

// Tangent heading at `at` of the circle through p, q, r, oriented along `travel`.
double circle_tangent(const Vec2 & p, const Vec2 & q, const Vec2 & r, const Vec2 & at, const Vec2 & travel)
{
  const Vec2 a = q - p;
  const Vec2 b = r - p;
  const double cross = a.x() * b.y() - a.y() * b.x();
  if (std::abs(cross) <= 1e-12 * a.norm() * b.norm()) {
    return std::atan2(travel.y(), travel.x());
  }
  const Vec2 center =
    p + Vec2(b.y() * a.squaredNorm() - a.y() * b.squaredNorm(), a.x() * b.squaredNorm() - b.x() * a.squaredNorm()) /
          (2.0 * cross);
  const Vec2 radial = at - center;
  Vec2 tangent(-radial.y(), radial.x());
  if (tangent.dot(travel) < 0.0) {
    tangent = -tangent;
  }
  return std::atan2(tangent.y(), tangent.x());
}

// Value of `angle` shifted by multiples of 2 pi to lie within pi of `reference`.
double unwrap_near(double angle, double reference)
{
  return reference + normalize_angle(angle - reference);
}

// Unknowns are the free waypoint headings and, with a start constraint, the
// offset of the second waypoint along the normal of its neighbouring chord.
class G2Problem
{
public:
  G2Problem(std::vector<Vec2> pts, std::optional<StartConstraint> start) : pts_(std::move(pts)), start_(start)
  {
    const std::size_t n = pts_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = chord_direction(pts_[i], pts_[i + 1]);
      chords_.push_back(chords_.empty() ? d : unwrap_near(d, chords_.back()));
    }
    slide_ = start_.has_value() && n >= 3;
    const std::size_t last_free = (start_ && n == 2) ? 1 : n - 2;
    for (std::size_t i = 1; i <= last_free && i < n; ++i) {
      free_.push_back(i);
    }
    if (slide_) {
      const Vec2 chord = pts_[2] - pts_[0];
      normal_ = Vec2(-chord.y(), chord.x()).normalized();
    }
  }

  std::size_t size() const { return pts_.size(); }
  std::size_t unknowns() const { return free_.size() + (slide_ ? 1 : 0); }

  std::vector<double> initial_headings() const
  {
    const std::size_t n = pts_.size();
    std::vector<double> theta(n);
    if (start_) {
      theta[0] = unwrap_near(start_->theta, chords_[0]);
    } else if (n >= 3) {
      theta[0] = unwrap_near(circle_tangent(pts_[0], pts_[1], pts_[2], pts_[0], pts_[1] - pts_[0]), chords_[0]);
    } else {
      theta[0] = chords_[0];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      theta[i] = 0.5 * (chords_[i - 1] + chords_[i]);
    }
    if (n >= 3) {
      theta[n - 1] = unwrap_near(
        circle_tangent(pts_[n - 3], pts_[n - 2], pts_[n - 1], pts_[n - 1], pts_[n - 1] - pts_[n - 2]),
        chords_[n - 2]);
    } else {
      theta[n - 1] = chords_[n - 2];
    }
    return theta;
  }

  Eigen::VectorXd pack(const std::vector<double> & theta, double offset) const
  {
    Eigen::VectorXd x(static_cast<Eigen::Index>(unknowns()));
    for (std::size_t c = 0; c < free_.size(); ++c) {
      x(static_cast<Eigen::Index>(c)) = theta[free_[c]];
    }
    if (slide_) {
      x(x.size() - 1) = offset;
    }
    return x;
  }

  void unpack(const Eigen::VectorXd & x, std::vector<double> & theta, double & offset) const
  {
    for (std::size_t c = 0; c < free_.size(); ++c) {
      theta[free_[c]] = x(static_cast<Eigen::Index>(c));
    }
    offset = slide_ ? x(x.size() - 1) : 0.0;
  }

  Vec2 point(std::size_t i, double offset) const { return (slide_ && i == 1) ? Vec2(pts_[1] + offset * normal_) : pts_[i]; }

  ClothoidSegment fit(const std::vector<double> & theta, double offset, std::size_t i) const
  {
    return clothoid_g1_fit(point(i, offset), theta[i], point(i + 1, offset), theta[i + 1]);
  }

  std::vector<ClothoidSegment> fit_all(const std::vector<double> & theta, double offset) const
  {
    std::vector<ClothoidSegment> segs;
    segs.reserve(pts_.size() - 1);
    for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
      segs.push_back(fit(theta, offset, i));
    }
    return segs;
  }

  /// Segments influenced by unknown c.
  std::vector<std::size_t> touched(std::size_t c) const
  {
    const std::size_t j = c < free_.size() ? free_[c] : 1;
    std::vector<std::size_t> out;
    if (j >= 1) {
      out.push_back(j - 1);
    }
    if (j + 1 < pts_.size()) {
      out.push_back(j);
    }
    return out;
  }

  Eigen::VectorXd residual(const std::vector<ClothoidSegment> & segs) const
  {
    const std::size_t n = pts_.size();
    Eigen::VectorXd r(static_cast<Eigen::Index>(unknowns()));
    Eigen::Index row = 0;
    if (start_) {
      r(row++) = segs[0].kappa0 - start_->kappa;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      r(row++) = segs[i - 1].kappa_at(segs[i - 1].length) - segs[i].kappa0;
    }
    return r;
  }

private:
  std::vector<Vec2> pts_;
  std::optional<StartConstraint> start_;
  std::vector<double> chords_;
  std::vector<std::size_t> free_;
  bool slide_{false};
  Vec2 normal_{Vec2::Zero()};
};

}  // namespace

ClothoidSpline build_g2_spline(
  std::span<const Vec2> waypoints, const std::optional<StartConstraint> & start, const G2Options & options)
{
  std::vector<Vec2> pts;
  for (const auto & p : waypoints) {
    if (pts.empty() || (p - pts.back()).norm() > 1e-9) {
      pts.push_back(p);
    }
  }
  if (pts.size() < 2) {
    throw std::invalid_argument("build_g2_spline: need at least two distinct waypoints");
  }

  G2Problem problem(pts, start);
  std::vector<double> theta = problem.initial_headings();
  double offset = 0.0;
  const auto m = static_cast<Eigen::Index>(problem.unknowns());
  std::vector<ClothoidSegment> segs = problem.fit_all(theta, offset);
  if (m == 0) {
    return ClothoidSpline(std::move(segs));
  }

  Eigen::VectorXd r = problem.residual(segs);
  double err = r.cwiseAbs().maxCoeff();
  constexpr double h = 1e-6;

  for (int sweep = 0; sweep < options.max_sweeps && err > options.tolerance; ++sweep) {
    // Each unknown only influences its two adjacent segments.
    const Eigen::VectorXd x = problem.pack(theta, offset);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index col = 0; col < m; ++col) {
      std::vector<ClothoidSegment> plus = segs;
      std::vector<ClothoidSegment> minus = segs;
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(col) += h;
      xm(col) -= h;
      std::vector<double> tp = theta;
      std::vector<double> tm = theta;
      double op = offset;
      double om = offset;
      problem.unpack(xp, tp, op);
      problem.unpack(xm, tm, om);
      try {
        for (std::size_t i : problem.touched(static_cast<std::size_t>(col))) {
          plus[i] = problem.fit(tp, op, i);
          minus[i] = problem.fit(tm, om, i);
        }
      } catch (const ClothoidFitError &) {
        throw G2FitError("build_g2_spline: segment fit failed while differentiating", err);
      }
      jac.col(col) = (problem.residual(plus) - problem.residual(minus)) / (2.0 * h);
    }

    const Eigen::VectorXd step = jac.fullPivLu().solve(-r);
    if (!step.allFinite()) {
      break;
    }
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 20; ++halving, lambda *= 0.5) {
      std::vector<double> trial = theta;
      double trial_offset = offset;
      problem.unpack(x + lambda * step, trial, trial_offset);
      try {
        auto trial_segs = problem.fit_all(trial, trial_offset);
        const Eigen::VectorXd trial_r = problem.residual(trial_segs);
        if (trial_r.norm() < r.norm()) {
          theta = std::move(trial);
          offset = trial_offset;
          segs = std::move(trial_segs);
          r = trial_r;
          err = r.cwiseAbs().maxCoeff();
          improved = true;
          break;
        }
      } catch (const ClothoidFitError &) {
        // shrink the step
      }
    }
    if (!improved) {
      break;
    }
  }

  if (!(err <= options.accept_mismatch)) {
    throw G2FitError("build_g2_spline: joint curvature mismatch did not converge", err);
  }
  return ClothoidSpline(std::move(segs));
}

JointMismatch joint_mismatch(const ClothoidSpline & spline)
{
  JointMismatch jm;
  const auto & segs = spline.segments();
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const Pose2D end = segs[i].pose_at(segs[i].length);
    const auto & next = segs[i + 1];
    jm.position = std::max(jm.position, std::hypot(end.x - next.x0, end.y - next.y0));
    jm.heading = std::max(jm.heading, std::abs(normalize_angle(end.theta - next.theta0)));
    jm.curvature = std::max(jm.curvature, std::abs(segs[i].kappa_at(segs[i].length) - next.kappa0));
  }
  return jm;
}

}  // namespace hpf
