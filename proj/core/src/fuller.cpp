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

#include "chatter/fuller.hpp"

#include <algorithm>
#include <cmath>

#include "chatter/errors.hpp"

namespace chatter {
namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Integral over [0, T] of (a + b t + c t^2)^2.
double quadratic_square_integral(double a, double b, double c, double T) {
  const double T2 = T * T, T3 = T2 * T, T4 = T3 * T, T5 = T4 * T;
  return a * a * T + a * b * T2 + (b * b + 2.0 * a * c) * T3 / 3.0 +
         b * c * T4 / 2.0 + c * c * T5 / 5.0;
}

FullerConstants compute_constants() {
  FullerConstants c;
  c.xi = std::sqrt((std::sqrt(33.0) - 1.0) / 24.0);
  c.alpha = std::sqrt((1.0 + 2.0 * c.xi) / (1.0 - 2.0 * c.xi));
  return c;
}

// Cost of the first arc from (-xi, 1) divided by (1 - alpha^-5).
double unit_chattering_cost() {
  const auto& k = fuller_constants();
  const double T = 1.0 + 1.0 / k.alpha;
  const double arc = quadratic_square_integral(-k.xi, 1.0, -0.5, T);
  return arc / (1.0 - std::pow(k.alpha, -5.0));
}

}  // namespace

double FullerConstants::quartic_residual() const {
  const double x2 = xi * xi;
  return 576.0 * x2 * x2 + 48.0 * x2 - 32.0;
}

const FullerConstants& fuller_constants() {
  static const FullerConstants constants = compute_constants();
  return constants;
}

double fuller_switching_curve(double y) {
  return -fuller_constants().xi * sgn(y) * y * y;
}

double fuller_final_time(double y0) {
  if (!(y0 > 0.0) || !std::isfinite(y0)) {
    throw PreconditionError("fuller_final_time: y0 must be positive");
  }
  const double a = fuller_constants().alpha;
  return (1.0 + a) / (a - 1.0) * y0;
}

double fuller_cost_from_curve(double y0) {
  const double m = std::abs(y0);
  return unit_chattering_cost() * m * m * m * m * m;
}

FullerState FullerArc::state_at(double t) const {
  const double s = t - t_start;
  return {start.x + start.y * s + 0.5 * u * s * s, start.y + u * s};
}

double FullerArc::cost() const {
  return quadratic_square_integral(start.x, start.y, 0.5 * u,
                                   t_end - t_start);
}

std::vector<double> FullerTrajectory::switching_times() const {
  std::vector<double> t;
  t.reserve(arcs.size());
  for (const auto& a : arcs) t.push_back(a.t_end);
  return t;
}

std::vector<FullerState> FullerTrajectory::switching_states() const {
  std::vector<FullerState> s;
  s.reserve(arcs.size());
  const double alpha = fuller_constants().alpha;
  for (const auto& a : arcs) {
    const double y = -a.start.y / alpha;
    s.push_back({fuller_switching_curve(y), y});
  }
  return s;
}

FullerState FullerTrajectory::state_at(double t) const {
  if (arcs.empty()) return {};
  if (t <= arcs.front().t_start) return arcs.front().start;
  for (const auto& a : arcs) {
    if (t <= a.t_end) return a.state_at(t);
  }
  return arcs.back().end_state();
}

FullerTrajectory FullerTrajectory::mirrored() const {
  FullerTrajectory m = *this;
  for (auto& a : m.arcs) {
    a.u = -a.u;
    a.start = {-a.start.x, -a.start.y};
  }
  return m;
}

FullerTrajectory FullerTrajectory::scaled(double lambda) const {
  if (!(lambda > 0.0)) {
    throw PreconditionError("FullerTrajectory::scaled: lambda must be positive");
  }
  FullerTrajectory s = *this;
  for (auto& a : s.arcs) {
    a.t_start *= lambda;
    a.t_end *= lambda;
    a.start = {lambda * lambda * a.start.x, lambda * a.start.y};
  }
  s.t_f *= lambda;
  s.cost = fuller_cost(s);
  return s;
}

FullerTrajectory fuller_trajectory(const FullerState& start, int n_arcs,
                                   double curve_tol) {
  if (n_arcs < 1) {
    throw PreconditionError("fuller_trajectory: n_arcs must be >= 1");
  }
  const double off = std::abs(start.x - fuller_switching_curve(start.y));
  if (off > curve_tol * std::max(1.0, start.y * start.y)) {
    throw PreconditionError("fuller_trajectory: start is off the switching curve");
  }
  const double a = fuller_constants().alpha;

  FullerTrajectory traj;
  traj.arcs.reserve(static_cast<std::size_t>(n_arcs));
  FullerState s = start;
  double t = 0.0;
  for (int k = 0; k < n_arcs; ++k) {
    FullerArc arc;
    arc.start = s;
    arc.u = s.y > 0.0 ? -1 : 1;
    arc.t_start = t;
    arc.t_end = t + std::abs(s.y) * (1.0 + 1.0 / a);
    traj.arcs.push_back(arc);
    // Off-curve errors grow by alpha^2 per arc relative to x, so the next
    // start is placed on the curve instead of taken from arc.end_state().
    const double y = -s.y / a;
    s = {fuller_switching_curve(y), y};
    t = arc.t_end;
  }
  traj.t_f = start.y == 0.0 ? 0.0 : fuller_final_time(std::abs(start.y));
  traj.cost = fuller_cost(traj);
  return traj;
}

double fuller_cost(const FullerTrajectory& traj) {
  if (traj.arcs.empty()) return 0.0;
  double c = 0.0;
  for (const auto& a : traj.arcs) c += a.cost();
  return c + fuller_cost_from_curve(traj.arcs.back().end_state().y);
}

FullerState nilpotent_map(double x1, double x2, const ModelParams& params) {
  return {-x1 / params.delta, x2};
}

Vec3 nilpotent_inverse(const FullerState& s, const ModelParams& params) {
  const double x1 = -params.delta * s.x;
  const double x2 = s.y;
  return {x1, x2, std::sqrt(std::max(0.0, 1.0 - x1 * x1 - x2 * x2))};
}

NilpotentResiduals nilpotent_residuals(double x, double y,
                                       const ModelParams& params) {
  NilpotentResiduals r;
  r.phi_y1 = -params.delta * x;
  // sqrt(1 - a) - 1 written without cancellation.
  const double a = x * x + y * y;
  r.phi_y2 = -a / (1.0 + std::sqrt(std::max(0.0, 1.0 - a)));
  return r;
}

DilationRatios dilation_ratios(double x, double y,
                               const std::vector<double>& kappas,
                               const ModelParams& params) {
  DilationRatios out;
  for (double k : kappas) {
    const auto r = nilpotent_residuals(k * k * x, k * y, params);
    out.kappa.push_back(k);
    out.x_ratio.push_back(std::max(std::abs(r.phi_x1), std::abs(r.phi_x2)) / k);
    out.y1_ratio.push_back(std::abs(r.phi_y1) / (k * k));
    out.y2_ratio.push_back(std::abs(r.phi_y2) / (k * k));
  }
  return out;
}

}  // namespace chatter
