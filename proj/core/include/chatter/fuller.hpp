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

#include <vector>

#include "chatter/dynamics.hpp"

namespace chatter {

/// Chattering constants of the Fuller synthesis.
///   xi^2  = (sqrt(33) - 1) / 24      (switching curve x = -xi sign(y) y^2)
///   alpha = sqrt((1 + 2 xi) / (1 - 2 xi))   (geometric switching ratio)
/// xi^2 is the positive root of 36 s^2 + 3 s - 2 = 0, i.e. xi solves the
/// quartic 576 xi^4 + 48 xi^2 - 32 = 0.
struct FullerConstants {
  double xi = 0.0;
  double alpha = 0.0;

  double quartic_residual() const;
};

const FullerConstants& fuller_constants();

/// Double-integrator state: x' = y, y' = u.
struct FullerState {
  double x = 0.0;
  double y = 0.0;
};

/// x = -xi sign(y) y^2
double fuller_switching_curve(double y);

/// Time to reach the origin from (-xi y0^2, y0), y0 > 0.
double fuller_final_time(double y0);

/// Cost of the full chattering trajectory from the curve point with
/// ordinate y0 (either sign).
double fuller_cost_from_curve(double y0);

struct FullerArc {
  double t_start = 0.0;
  double t_end = 0.0;
  int u = 1;
  FullerState start;

  FullerState state_at(double t) const;
  FullerState end_state() const { return state_at(t_end); }
  /// Exact integral of x^2 over the arc.
  double cost() const;
};

/// Truncated chattering trajectory. `t_f` and `cost` include the
/// geometric tail beyond the last enumerated arc.
struct FullerTrajectory {
  std::vector<FullerArc> arcs;
  double t_f = 0.0;
  double cost = 0.0;

  double truncation_time() const { return arcs.empty() ? 0.0 : arcs.back().t_end; }
  /// Switching instants t_1 < t_2 < ... (ends of each enumerated arc).
  std::vector<double> switching_times() const;
  std::vector<FullerState> switching_states() const;
  FullerState state_at(double t) const;

  /// (x, y, u) -> (-x, -y, -u)
  FullerTrajectory mirrored() const;
  /// (x(t), y(t)) -> (l^2 x(t/l), l y(t/l)), cost scales as l^5.
  FullerTrajectory scaled(double lambda) const;
};

/// Optimal trajectory from a point of the switching curve, enumerating
/// `n_arcs` parabolic arcs. Throws PreconditionError when the start is off
/// the curve (relative tolerance `curve_tol`) or n_arcs < 1.
FullerTrajectory fuller_trajectory(const FullerState& start, int n_arcs,
                                   double curve_tol = 1e-9);

/// Sum of exact arc costs plus the analytic tail from the last arc end.
double fuller_cost(const FullerTrajectory& traj);

/// Quantum coordinates near |3> to Fuller coordinates:
/// (x1, x2) -> (-x1 / delta, x2). The Fuller control is the negated
/// quantum control.
FullerState nilpotent_map(double x1, double x2, const ModelParams& params);
/// Inverse of nilpotent_map.
Vec3 nilpotent_inverse(const FullerState& s, const ModelParams& params);

/// Higher-order terms separating the planar model
///   x' = delta y,  y' = u + phi_y1(x, y) + u phi_y2(x, y)
/// (coordinates x = -x1, y = x2, control v = -u) from its Fuller part.
/// phi_x1 = phi_x2 = 0 for this model.
struct NilpotentResiduals {
  double phi_x1 = 0.0;
  double phi_x2 = 0.0;
  double phi_y1 = 0.0;
  double phi_y2 = 0.0;
};

NilpotentResiduals nilpotent_residuals(double x, double y,
                                       const ModelParams& params);

/// |phi_x_i(g_k)| / k and |phi_y_i(g_k)| / k^2 under the dilation
/// g_k(x, y) = (k^2 x, k y), one entry per kappa.
struct DilationRatios {
  std::vector<double> kappa;
  std::vector<double> x_ratio;   // max over i of |phi_x_i| / kappa
  std::vector<double> y1_ratio;  // |phi_y1| / kappa^2
  std::vector<double> y2_ratio;  // |phi_y2| / kappa^2
};

DilationRatios dilation_ratios(double x, double y,
                               const std::vector<double>& kappas,
                               const ModelParams& params);

}  // namespace chatter
