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

#include <Eigen/Core>

#include <optional>
#include <stdexcept>

namespace hpf
{
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Mat2 = Eigen::Matrix2d;

/// Constant-velocity state [x, y, vx, vy].
struct CvState
{
  Vec4 mean{Vec4::Zero()};
  Mat4 cov{Mat4::Identity()};
};

/// Unicycle state [x, y, theta, v, omega].
struct UniState
{
  Vec5 mean{Vec5::Zero()};
  Mat5 cov{Mat5::Identity()};
};

struct Measurement
{
  Vec2 z{Vec2::Zero()};
  Mat2 R{Mat2::Identity() * 0.05 * 0.05};
  double timestamp{0.0};
};

class NumericalFault : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

template <typename State>
struct Updated
{
  State state;
  double likelihood{0.0};
  double log_likelihood{0.0};
};

/// Gaussian log density of a 2-vector innovation with covariance S.
double gaussian_log_density(const Vec2 & innovation, const Mat2 & S);

Mat4 cv_transition(double dt);
Eigen::Matrix<double, 4, 2> cv_noise_input(double dt);
CvState cv_predict(const CvState & s, double dt, const Mat2 & Q);
Updated<CvState> cv_update(const CvState & s, const Measurement & m);

Vec5 uni_transition(const Vec5 & h, double dt);
/// Analytic Jacobian of uni_transition with respect to the state.
Mat5 uni_jacobian(const Vec5 & h, double dt);
Eigen::Matrix<double, 5, 2> uni_noise_input(double dt);
UniState uni_predict(const UniState & s, double dt, const Mat2 & E);
Updated<UniState> uni_update(const UniState & s, const Measurement & m);

struct MmParams
{
  Mat2 transition{(Mat2() << 0.95, 0.05, 0.05, 0.95).finished()};  // row i: P(next model | model i)
  double cv_accel_sigma{0.8};    // m/s^2
  double uni_accel_sigma{0.8};   // m/s^2
  double uni_angular_sigma{1.0};  // rad/s^2
  double init_speed_sigma{1.0};  // m/s
  double init_omega_sigma{1.0};  // rad/s
  double min_heading_speed{0.1};  // below this the fused velocity does not define a heading

  Mat2 cv_Q() const { return Mat2::Identity() * cv_accel_sigma * cv_accel_sigma; }
  Mat2 uni_E() const
  {
    Mat2 e = Mat2::Zero();
    e(0, 0) = uni_accel_sigma * uni_accel_sigma;
    e(1, 1) = uni_angular_sigma * uni_angular_sigma;
    return e;
  }
};

struct MmEstimate
{
  CvState cv;
  UniState uni;
  Eigen::Vector2d mu{0.5, 0.5};  // [cv, uni]
  Vec2 fused_position{Vec2::Zero()};
  Mat2 fused_cov_pos{Mat2::Identity()};
  Vec2 fused_velocity{Vec2::Zero()};
  double cv_log_likelihood{0.0};
  double uni_log_likelihood{0.0};
  bool updated{false};
};

MmEstimate mm_initialize(const Measurement & m, const MmParams & params);

/// Moment-matched [x, y, vx, vy] mixture of the two model posteriors.
CvState mm_fused_common(const MmEstimate & est);

/// First-order generalised pseudo-Bayesian step: both filters restart from
/// the single fused Gaussian, run predict (and update when z is present), and
/// the model probabilities are reweighted by the measurement likelihoods.
/// If both likelihoods underflow the probabilities keep the transition prior.
MmEstimate gpb1_step(const MmEstimate & est, const std::optional<Measurement> & z, double dt, const MmParams & params);

enum class FaultStatus { Ok, Fault };

FaultStatus check_fault(const MmEstimate & est, double limit);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd & m);

}  // namespace hpf
