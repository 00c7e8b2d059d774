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

#include <array>

#include <Eigen/Core>

namespace chatter {

// Dormand-Prince 5(4) coefficients, with the continuous extension of
// Hairer, Norsett & Wanner (DOPRI5 dense output, order 4).
namespace dopri5 {

inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                        c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                        a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

}  // namespace dopri5

/// Interpolant of one accepted step on [t0, t0 + h] (h may be negative).
template <typename State>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State, 5> r;

  double t1() const { return t0 + h; }

  State operator()(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return r[0] + s * (r[1] + s1 * (r[2] + s * (r[3] + s1 * r[4])));
  }
};

template <typename State>
struct DopriStep {
  State y;      // fifth-order solution at t + h
  State f_end;  // f(t + h, y), reused as the first stage of the next step
  State err;    // embedded error estimate
  DenseSegment<State> dense;
};

/// One explicit Dormand-Prince step. `f0` is f(t, y0). Works for any
/// Eigen vector type and for scalar-like types used in forward-mode
/// differentiation.
template <typename State, typename Rhs>
DopriStep<State> dopri5_step(const Rhs& f, double t, const State& y0,
                             const State& f0, double h) {
  using namespace dopri5;
  const State k1 = f0;
  const State k2 = f(t + c2 * h, State(y0 + h * (a21 * k1)));
  const State k3 = f(t + c3 * h, State(y0 + h * (a31 * k1 + a32 * k2)));
  const State k4 =
      f(t + c4 * h, State(y0 + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const State k5 = f(t + c5 * h, State(y0 + h * (a51 * k1 + a52 * k2 +
                                                 a53 * k3 + a54 * k4)));
  const State k6 = f(t + h, State(y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                            a64 * k4 + a65 * k5)));
  DopriStep<State> out;
  out.y = y0 + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  const State k7 = f(t + h, out.y);
  out.f_end = k7;
  out.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

  auto& d = out.dense;
  d.t0 = t;
  d.h = h;
  d.r[0] = y0;
  d.r[1] = out.y - y0;
  d.r[2] = h * k1 - d.r[1];
  d.r[3] = d.r[1] - h * k7 - d.r[2];
  d.r[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return out;
}

}  // namespace chatter
