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

#include "chatter/dynamics.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "chatter/errors.hpp"

namespace chatter {

void ModelParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw PreconditionError("ModelParams: delta must be positive and finite");
  }
  if (u_max != 1.0) {
    throw PreconditionError("ModelParams: u_max must be normalized to 1");
  }
}

StateVector StateVector::checked(const Vec3& v, double norm_tol) {
  if (!v.allFinite()) throw PreconditionError("StateVector: non-finite entry");
  const double defect = std::abs(v.squaredNorm() - 1.0);
  if (defect > norm_tol) {
    std::ostringstream os;
    os << "StateVector: |x|^2 - 1 = " << defect << " exceeds " << norm_tol;
    throw PreconditionError(os.str());
  }
  return StateVector(v);
}

StateVector StateVector::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw PreconditionError("StateVector: cannot normalize zero vector");
  }
  return StateVector(v / n);
}

double StateVector::sphere_defect() const {
  return std::abs(v_.norm() - 1.0);
}

AdjointVector AdjointVector::reduced(const StateVector& x) const {
  return AdjointVector(p_ - p_.dot(x.vec()) * x.vec());
}

Control Control::checked(double u, const ModelParams& params) {
  if (!std::isfinite(u) || std::abs(u) > params.u_max) {
    throw PreconditionError("Control: |u| exceeds the control bound");
  }
  return Control{u};
}

FullQuantumState FullQuantumState::embed(const StateVector& s) {
  FullQuantumState psi;
  psi.x.head<3>() = s.vec();
  return psi;
}

Vec3 dynamics_rhs(const StateVector& x, Control u, const ModelParams& params) {
  const double d = params.delta;
  return {-d * x.x2(), d * x.x1() - u.value * x.x3(), u.value * x.x2()};
}

Vec3 adjoint_rhs(const StateVector& x, const AdjointVector& p, Control u,
                 const ModelParams& params) {
  const double d = params.delta;
  return {-d * p.p2() + x.x1(), d * p.p1() - u.value * p.p3(),
          u.value * p.p2()};
}

double pontryagin_hamiltonian(const StateVector& x, const AdjointVector& p,
                              Control u, const ModelParams& params,
                              double p0) {
  const double drift = params.delta * (p.p2() * x.x1() - p.p1() * x.x2());
  return drift + u.value * switching_fn(x, p) + p0 * x.x1() * x.x1();
}

double switching_fn(const StateVector& x, const AdjointVector& p) {
  return p.p3() * x.x2() - p.p2() * x.x3();
}

SwitchingDerivatives switching_derivatives(const StateVector& x,
                                           const AdjointVector& p, Control u,
                                           const ModelParams& params) {
  const double d = params.delta;
  const double d2 = d * d;
  const double uu = u.value;
  const double x1 = x.x1(), x2 = x.x2(), x3 = x.x3();
  const double p1 = p.p1(), p2 = p.p2(), p3 = p.p3();

  SwitchingDerivatives s;
  s.phi = p3 * x2 - p2 * x3;
  s.d1 = d * (x1 * p3 - x3 * p1);
  s.d2 = -d2 * s.phi + d * uu * (x1 * p2 - x2 * p1) - d * x1 * x3;
  s.d3 = -(d2 + 1.0) * s.d1 - 2.0 * d * uu * x1 * x2 + d2 * x2 * x3;
  s.d4 = -(d2 + 1.0) * s.d2 + d * (d2 + 2.0) * x1 * x3 +
         d2 * uu * (3.0 * x2 * x2 - 2.0 * x1 * x1 - x3 * x3);
  return s;
}

Vec6 full_schrodinger_rhs(const FullQuantumState& psi, Control u,
                          const ModelParams& params) {
  using C = std::complex<double>;
  const double d = params.delta;
  const double uu = u.value;
  const auto& x = psi.x;
  const C c1(x[0], x[3]);
  const C c2(x[4], -x[1]);
  const C c3(x[2], x[5]);
  // i dc/dt = H c with the pump coupling Delta on (1,2) and the Stokes
  // coupling -u on (2,3). The sign of the Stokes term is the one for which
  // the (x1, x2, x3) block equals dynamics_rhs.
  const C minus_i(0.0, -1.0);
  const C dc1 = minus_i * (d * c2);
  const C dc2 = minus_i * (d * c1 - uu * c3);
  const C dc3 = minus_i * (-uu * c2);
  Vec6 r;
  r << dc1.real(), -dc2.imag(), dc3.real(), dc1.imag(), dc2.real(),
      dc3.imag();
  return r;
}

}  // namespace chatter
