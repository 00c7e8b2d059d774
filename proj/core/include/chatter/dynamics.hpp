/* Copyright 2026 The Chatter Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cmath>

#include <Eigen/Core>

namespace chatter {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Cost multiplier of normal extremals. Abnormal extremals (p0 = 0) never
/// reach the target optimally, so they are not propagated anywhere.
inline constexpr double kNormalMultiplier = -0.5;

inline constexpr double kDefaultNormTol = 1e-10;

/// Coupling constant and control bound of the reduced three-level model.
/// Time is normalized so that u_max = 1.
struct ModelParams {
  double delta = 10.0;
  double u_max = 1.0;

  /// Throws PreconditionError when delta <= 0 or u_max != 1.
  void validate() const;
};

/// Point on the unit sphere: the real amplitudes (x1, x2, x3) of the
/// reduced state. The unchecked constructor is used inside integrators,
/// `checked` at API boundaries.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(const Vec3& v) : v_(v) {}
  StateVector(double x1, double x2, double x3) : v_(x1, x2, x3) {}

  static StateVector checked(const Vec3& v, double norm_tol = kDefaultNormTol);
  /// Projects an arbitrary non-zero vector onto the sphere.
  static StateVector normalized(const Vec3& v);

  static StateVector target() { return {0.0, 0.0, 1.0}; }

  const Vec3& vec() const { return v_; }
  double x1() const { return v_[0]; }
  double x2() const { return v_[1]; }
  double x3() const { return v_[2]; }

  double sphere_defect() const;

 private:
  Vec3 v_ = Vec3(0.0, 0.0, 1.0);
};

/// Costate of the maximum principle. Only the component tangent to the
/// sphere carries information; `reduced` strips the normal component.
class AdjointVector {
 public:
  AdjointVector() = default;
  explicit AdjointVector(const Vec3& p) : p_(p) {}
  AdjointVector(double p1, double p2, double p3) : p_(p1, p2, p3) {}

  const Vec3& vec() const { return p_; }
  double p1() const { return p_[0]; }
  double p2() const { return p_[1]; }
  double p3() const { return p_[2]; }

  /// P - (P.X) X
  AdjointVector reduced(const StateVector& x) const;
  double gauge(const StateVector& x) const { return p_.dot(x.vec()); }

 private:
  Vec3 p_ = Vec3::Zero();
};

/// Scalar control value. `checked` enforces |u| <= u_max.
struct Control {
  double value = 0.0;

  static Control checked(double u, const ModelParams& params);
  static Control bang(int sign) { return Control{sign >= 0 ? 1.0 : -1.0}; }
};

/// Real and imaginary parts of the three complex amplitudes,
/// c1 = x1 + i x4, c2 = x5 - i x2, c3 = x3 + i x6.
struct FullQuantumState {
  Vec6 x = Vec6::Zero();

  static FullQuantumState embed(const StateVector& s);
  StateVector projected() const { return StateVector(x.head<3>()); }
  double norm_defect() const { return std::abs(x.squaredNorm() - 1.0); }
};

/// (Delta*Omega3 + u*Omega1) X
Vec3 dynamics_rhs(const StateVector& x, Control u, const ModelParams& params);

/// Normal-case costate equation -dH/dX with p0 = -1/2.
Vec3 adjoint_rhs(const StateVector& x, const AdjointVector& p, Control u,
                 const ModelParams& params);

double pontryagin_hamiltonian(const StateVector& x, const AdjointVector& p,
                              Control u, const ModelParams& params,
                              double p0 = kNormalMultiplier);

/// Phi = P . Omega1 X = p3 x2 - p2 x3
double switching_fn(const StateVector& x, const AdjointVector& p);

struct SwitchingDerivatives {
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double d4 = 0.0;
};

/// Closed-form Phi and its first four time derivatives along the normal
/// flow. d3 and d4 assume u is held constant (bang arc).
SwitchingDerivatives switching_derivatives(const StateVector& x,
                                           const AdjointVector& p, Control u,
                                           const ModelParams& params);

/// Six-dimensional real form of the Schrodinger equation. The first three
/// components reproduce `dynamics_rhs`; see docs/model.md for the
/// derivation and the sign convention of the (2,3) coupling.
Vec6 full_schrodinger_rhs(const FullQuantumState& psi, Control u,
                          const ModelParams& params);

}  // namespace chatter
