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

#include "hpf/tracker.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>

namespace hpf
{
namespace
{
template <typename M>
M symmetrize(const M & m)
{
  return 0.5 * (m + m.transpose());
}

template <typename M>
void require_psd(const M & m, const char * what)
{
  if (!m.allFinite() || min_eigenvalue(m) < -1e-9) {
    throw NumericalFault(what);
  }
}
}  // namespace

double min_eigenvalue(const Eigen::MatrixXd & m)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double gaussian_log_density(const Vec2 & innovation, const Mat2 & S)
{
  const double det = S.determinant();
  const double maha = innovation.dot(S.inverse() * innovation);
  return -0.5 * maha - 0.5 * std::log(det) - std::log(2.0 * std::numbers::pi);
}

Mat4 cv_transition(double dt)
{
  Mat4 a = Mat4::Identity();
  a(0, 2) = dt;
  a(1, 3) = dt;
  return a;
}

Eigen::Matrix<double, 4, 2> cv_noise_input(double dt)
{
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  b(0, 0) = 0.5 * dt * dt;
  b(1, 1) = 0.5 * dt * dt;
  b(2, 0) = dt;
  b(3, 1) = dt;
  return b;
}

CvState cv_predict(const CvState & s, double dt, const Mat2 & Q)
{
  const Mat4 a = cv_transition(dt);
  const auto b = cv_noise_input(dt);
  CvState out;
  out.mean = a * s.mean;
  out.cov = symmetrize(Mat4(a * s.cov * a.transpose() + b * Q * b.transpose()));
  return out;
}

Updated<CvState> cv_update(const CvState & s, const Measurement & m)
{
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Vec2 innovation = m.z - s.mean.head<2>();
  const Mat2 S = symmetrize(Mat2(h * s.cov * h.transpose() + m.R));
  const Eigen::Matrix<double, 4, 2> k = s.cov * h.transpose() * S.inverse();
  const Mat4 ikh = Mat4::Identity() - k * h;

  Updated<CvState> out;
  out.state.mean = s.mean + k * innovation;
  out.state.cov = symmetrize(Mat4(ikh * s.cov * ikh.transpose() + k * m.R * k.transpose()));
  require_psd(out.state.cov, "cv_update: covariance lost positive semi-definiteness");
  out.log_likelihood = gaussian_log_density(innovation, S);
  out.likelihood = std::exp(out.log_likelihood);
  return out;
}

Vec5 uni_transition(const Vec5 & h, double dt)
{
  Vec5 out = h;
  out(0) += dt * h(3) * std::cos(h(2));
  out(1) += dt * h(3) * std::sin(h(2));
  out(2) += dt * h(4);
  return out;
}

Mat5 uni_jacobian(const Vec5 & h, double dt)
{
  Mat5 f = Mat5::Identity();
  const double c = std::cos(h(2));
  const double s = std::sin(h(2));
  f(0, 2) = -dt * h(3) * s;
  f(0, 3) = dt * c;
  f(1, 2) = dt * h(3) * c;
  f(1, 3) = dt * s;
  f(2, 4) = dt;
  return f;
}

Eigen::Matrix<double, 5, 2> uni_noise_input(double dt)
{
  Eigen::Matrix<double, 5, 2> b = Eigen::Matrix<double, 5, 2>::Zero();
  b(3, 0) = dt;
  b(4, 1) = dt;
  return b;
}

UniState uni_predict(const UniState & s, double dt, const Mat2 & E)
{
  const Mat5 f = uni_jacobian(s.mean, dt);
  const auto b = uni_noise_input(dt);
  UniState out;
  out.mean = uni_transition(s.mean, dt);
  out.mean(2) = normalize_angle(out.mean(2));
  out.cov = symmetrize(Mat5(f * s.cov * f.transpose() + b * E * b.transpose()));
  return out;
}

Updated<UniState> uni_update(const UniState & s, const Measurement & m)
{
  Eigen::Matrix<double, 2, 5> h = Eigen::Matrix<double, 2, 5>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Vec2 innovation = m.z - s.mean.head<2>();
  const Mat2 S = symmetrize(Mat2(h * s.cov * h.transpose() + m.R));
  const Eigen::Matrix<double, 5, 2> k = s.cov * h.transpose() * S.inverse();
  const Mat5 ikh = Mat5::Identity() - k * h;

  Updated<UniState> out;
  out.state.mean = s.mean + k * innovation;
  out.state.mean(2) = normalize_angle(out.state.mean(2));
  out.state.cov = symmetrize(Mat5(ikh * s.cov * ikh.transpose() + k * m.R * k.transpose()));
  require_psd(out.state.cov, "uni_update: covariance lost positive semi-definiteness");
  out.log_likelihood = gaussian_log_density(innovation, S);
  out.likelihood = std::exp(out.log_likelihood);
  return out;
}

namespace
{
// Unicycle posterior mapped to [x, y, vx, vy] by linearisation.
CvState uni_to_common(const UniState & u)
{
  const double th = u.mean(2);
  const double v = u.mean(3);
  CvState out;
  out.mean << u.mean(0), u.mean(1), v * std::cos(th), v * std::sin(th);
  Eigen::Matrix<double, 4, 5> j = Eigen::Matrix<double, 4, 5>::Zero();
  j(0, 0) = 1.0;
  j(1, 1) = 1.0;
  j(2, 2) = -v * std::sin(th);
  j(2, 3) = std::cos(th);
  j(3, 2) = v * std::cos(th);
  j(3, 3) = std::sin(th);
  out.cov = symmetrize(Mat4(j * u.cov * j.transpose()));
  return out;
}

// Unicycle prior built from the fused [x, y, vx, vy] Gaussian. Heading and
// speed come from the fused velocity; omega keeps its previous conditional
// distribution given the other four states.
UniState rebase_uni(const CvState & common, const UniState & prev, const MmParams & params)
{
  const double vx = common.mean(2);
  const double vy = common.mean(3);
  const double speed = std::hypot(vx, vy);
  const double prev_theta = prev.mean(2);

  Eigen::Vector4d s_new;
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  bool keep_heading = speed < params.min_heading_speed;
  if (!keep_heading) {
    const double th = prev_theta + normalize_angle(std::atan2(vy, vx) - prev_theta);
    s_new << common.mean(0), common.mean(1), th, speed;
    g(2, 2) = -vy / (speed * speed);
    g(2, 3) = vx / (speed * speed);
    g(3, 2) = vx / speed;
    g(3, 3) = vy / speed;
  } else {
    const double c = std::cos(prev_theta);
    const double s = std::sin(prev_theta);
    s_new << common.mean(0), common.mean(1), prev_theta, c * vx + s * vy;
    g(3, 2) = c;
    g(3, 3) = s;
  }
  Eigen::Matrix4d c4 = g * common.cov * g.transpose();
  if (keep_heading) {
    c4(2, 2) = prev.cov(2, 2);
  }

  const Eigen::Matrix4d s_prev = prev.cov.topLeftCorner<4, 4>();
  const Eigen::Vector4d c_prev = prev.cov.block<4, 1>(0, 4);
  Eigen::RowVector4d k = Eigen::RowVector4d::Zero();
  const Eigen::LDLT<Eigen::Matrix4d> ldlt(s_prev);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Eigen::Vector4d sol = ldlt.solve(c_prev);
    if (sol.allFinite()) {
      k = sol.transpose();
    }
  }
  Eigen::Vector4d ds = s_new - prev.mean.head<4>();
  ds(2) = normalize_angle(ds(2));
  const double residual_var = std::max(0.0, prev.cov(4, 4) - k.dot(c_prev));

  UniState out;
  out.mean.head<4>() = s_new;
  out.mean(2) = normalize_angle(s_new(2));
  out.mean(4) = prev.mean(4) + k.dot(ds);
  out.cov.topLeftCorner<4, 4>() = c4;
  const Eigen::Vector4d cross = c4 * k.transpose();
  out.cov.block<4, 1>(0, 4) = cross;
  out.cov.block<1, 4>(4, 0) = cross.transpose();
  out.cov(4, 4) = residual_var + k * c4 * k.transpose();
  out.cov = symmetrize(out.cov);
  return out;
}

void fuse_outputs(MmEstimate & est)
{
  const Vec2 p_cv = est.cv.mean.head<2>();
  const Vec2 p_uni = est.uni.mean.head<2>();
  const double m0 = est.mu(0);
  const double m1 = est.mu(1);
  est.fused_position = m0 * p_cv + m1 * p_uni;
  const Vec2 d_cv = p_cv - est.fused_position;
  const Vec2 d_uni = p_uni - est.fused_position;
  est.fused_cov_pos = symmetrize(Mat2(
    m0 * (est.cv.cov.topLeftCorner<2, 2>() + d_cv * d_cv.transpose()) +
    m1 * (est.uni.cov.topLeftCorner<2, 2>() + d_uni * d_uni.transpose())));
  const Vec2 v_uni(est.uni.mean(3) * std::cos(est.uni.mean(2)), est.uni.mean(3) * std::sin(est.uni.mean(2)));
  est.fused_velocity = m0 * est.cv.mean.tail<2>() + m1 * v_uni;
}
}  // namespace

MmEstimate mm_initialize(const Measurement & m, const MmParams & params)
{
  MmEstimate est;
  const double sv2 = params.init_speed_sigma * params.init_speed_sigma;
  est.cv.mean << m.z.x(), m.z.y(), 0.0, 0.0;
  est.cv.cov = Mat4::Zero();
  est.cv.cov.topLeftCorner<2, 2>() = m.R;
  est.cv.cov(2, 2) = sv2;
  est.cv.cov(3, 3) = sv2;

  est.uni.mean << m.z.x(), m.z.y(), 0.0, 0.0, 0.0;
  est.uni.cov = Mat5::Zero();
  est.uni.cov.topLeftCorner<2, 2>() = m.R;
  est.uni.cov(2, 2) = std::numbers::pi * std::numbers::pi;
  est.uni.cov(3, 3) = sv2;
  est.uni.cov(4, 4) = params.init_omega_sigma * params.init_omega_sigma;

  // Steady-state probabilities of the transition matrix.
  const Mat2 & t = params.transition;
  const double a = t(1, 0);
  const double b = t(0, 1);
  est.mu = (a + b) > 0.0 ? Eigen::Vector2d(a / (a + b), b / (a + b)) : Eigen::Vector2d(0.5, 0.5);
  fuse_outputs(est);
  return est;
}

CvState mm_fused_common(const MmEstimate & est)
{
  const CvState u = uni_to_common(est.uni);
  const double m0 = est.mu(0);
  const double m1 = est.mu(1);
  CvState out;
  out.mean = m0 * est.cv.mean + m1 * u.mean;
  const Vec4 d_cv = est.cv.mean - out.mean;
  const Vec4 d_uni = u.mean - out.mean;
  out.cov = symmetrize(Mat4(m0 * (est.cv.cov + d_cv * d_cv.transpose()) + m1 * (u.cov + d_uni * d_uni.transpose())));
  return out;
}

MmEstimate gpb1_step(const MmEstimate & est, const std::optional<Measurement> & z, double dt, const MmParams & params)
{
  const CvState common = mm_fused_common(est);
  MmEstimate next;
  next.cv = cv_predict(common, dt, params.cv_Q());
  next.uni = uni_predict(rebase_uni(common, est.uni, params), dt, params.uni_E());

  const Eigen::Vector2d mu_prior = params.transition.transpose() * est.mu;
  next.mu = mu_prior;
  if (z) {
    const auto cv_up = cv_update(next.cv, *z);
    const auto uni_up = uni_update(next.uni, *z);
    next.cv = cv_up.state;
    next.uni = uni_up.state;
    next.cv_log_likelihood = cv_up.log_likelihood;
    next.uni_log_likelihood = uni_up.log_likelihood;
    next.updated = true;
    if (cv_up.likelihood > 0.0 || uni_up.likelihood > 0.0) {
      // Normalise in the log domain.
      const double l0 = mu_prior(0) > 0.0 ? std::log(mu_prior(0)) + cv_up.log_likelihood
                                          : -std::numeric_limits<double>::infinity();
      const double l1 = mu_prior(1) > 0.0 ? std::log(mu_prior(1)) + uni_up.log_likelihood
                                          : -std::numeric_limits<double>::infinity();
      const double lmax = std::max(l0, l1);
      if (std::isfinite(lmax)) {
        const double w0 = std::exp(l0 - lmax);
        const double w1 = std::exp(l1 - lmax);
        next.mu = Eigen::Vector2d(w0, w1) / (w0 + w1);
      }
    }
  }
  fuse_outputs(next);
  return next;
}

FaultStatus check_fault(const MmEstimate & est, double limit)
{
  const Mat2 & p = est.fused_cov_pos;
  const double tr = 0.5 * (p(0, 0) + p(1, 1));
  const double disc = std::sqrt(std::max(0.0, 0.25 * (p(0, 0) - p(1, 1)) * (p(0, 0) - p(1, 1)) + p(0, 1) * p(1, 0)));
  const double max_eig = tr + disc;
  return std::sqrt(std::max(0.0, max_eig)) > limit ? FaultStatus::Fault : FaultStatus::Ok;
}

}  // namespace hpf
