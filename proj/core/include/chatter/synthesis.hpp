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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chatter/dynamics.hpp"
#include "chatter/integrator.hpp"

namespace chatter {

/// Point of the local switching curve x1 = sign(x2) xi delta x2^2 together
/// with the costate fixed by Phi = 0, H_P = 0 and P.X = 0.
struct SeedPoint {
  double x20 = 0.0;
  StateVector x;
  AdjointVector p;
  /// Forward-time control on the arc arriving at the seed.
  double u_incoming = -1.0;
};

/// Solves {Phi = 0, delta (p2 x1 - p1 x2) = x1^2 / 2, P.X = 0} for P.
/// At x1 = 0 the unique solution is P = 0. Throws PreconditionError when
/// the system is singular (x2 = 0).
AdjointVector adjoint_from_switching_conditions(const StateVector& x,
                                                const ModelParams& params);

/// Throws PreconditionError for x20 = 0 or when the seed leaves the
/// northern cap (x1^2 + x2^2 >= 1).
SeedPoint seed_adjoint(double x20, const ModelParams& params);

/// Backward extremal from the seed; stops on `stop` or max_switchings.
ExtremalTrajectory backward_from_seed(const SeedPoint& seed,
                                      const StopCriteria& stop,
                                      const IntegratorSettings& settings,
                                      const ModelParams& params);

/// Point of a trajectory nearest to a reference state.
struct ClosestApproach {
  double t = 0.0;
  StateVector x;
  double distance = 0.0;
  /// distance signed by the side of the trajectory the reference lies on
  /// (component along X x dX/dt).
  double signed_distance = 0.0;
  double cost = 0.0;
  std::size_t arc_index = 0;
};

ClosestApproach closest_approach(const ExtremalTrajectory& traj,
                                 const StateVector& target,
                                 const ModelParams& params);

struct ShootingOptions {
  /// Radius around |3> inside which results are not flagged extrapolated.
  double validated_radius = 0.1;
  /// Backward duration cap.
  double max_duration = 8.0;
  /// Grid points per period alpha^2 of the seed scan.
  int scan_points = 24;
  /// Bracket search stops here; Newton stops on |miss| < miss_tol.
  double miss_tol = 1e-11;
  int max_newton_iterations = 60;
};

struct ShootingResult {
  double x20_star = 0.0;
  double tau = 0.0;
  double t_f = 0.0;
  double tail_time = 0.0;
  double terminal_miss = 0.0;
  double cost = 0.0;
  double tail_cost = 0.0;
  int n_switchings = 0;
  bool extrapolated = false;
  int newton_iterations = 0;
  int bisection_steps = 0;
  SeedPoint seed;
  /// Backward trajectory from the seed; the optimal path is the part with
  /// t in [-tau, 0].
  ExtremalTrajectory trajectory;
};

/// Finds the largest seed offset x20 <= precision whose backward extremal
/// passes through `x_init`. Newton with central differences on the signed
/// miss, bisection fallback. Throws NumericalError when no bracket exists.
ShootingResult shoot(const StateVector& x_init, double precision,
                     const ModelParams& params,
                     const IntegratorSettings& settings,
                     const ShootingOptions& options = {});

/// Backward extremal from a prescribed seed offset, evaluated at its
/// closest approach to `x_init`; terminal_miss reports how far it passes.
ShootingResult shoot_fixed_seed(const StateVector& x_init, double x20,
                                const ModelParams& params,
                                const IntegratorSettings& settings,
                                const ShootingOptions& options = {});

/// Control of the optimal path in forward time, t in [0, tau]; zero
/// beyond tau + tail (the path rests at |3>).
double optimal_control_at(const ShootingResult& r, double t);

enum class Branch { Upper, Lower };
std::string to_string(Branch b);

struct CurveSample {
  Branch branch = Branch::Upper;
  double x20_seed = 0.0;
  int switch_index = 0;  // 1 = first switch before the seed
  StateVector x;
  double u_before = 0.0;
  double u_after = 0.0;
};

struct SwitchingCurve {
  double delta = 0.0;
  std::vector<CurveSample> samples;
  /// Seeds whose backward integration failed (sweep continues).
  std::vector<std::pair<double, std::string>> failures;

  std::vector<CurveSample> branch(Branch b) const;
};

struct CurveOptions {
  /// Backward integration stops once x3 drops below this value.
  double min_x3 = -0.3;
  double max_duration = 8.0;
  double dedup_tol = 1e-8;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Collects all switching points of backward extremals seeded at
/// `x20_grid` (positive values) and mirrors them onto the x20 < 0 branch.
SwitchingCurve build_switching_curve(std::span<const double> x20_grid,
                                     const ModelParams& params,
                                     const IntegratorSettings& settings,
                                     const CurveOptions& options = {});

/// Geometric seed grid covering `periods` periods of alpha^2 above x20_min.
std::vector<double> seed_grid(double x20_min, int points_per_period,
                              double periods = 1.0);

/// Least-squares lambda in x1 = lambda x2^2 over samples with
/// 0 < sign * x2 <= max_abs_x2 and |x1| <= max_abs_x2, x3 > 0
/// (sign = +1 upper side, -1 lower side).
std::optional<double> fit_curve_coefficient(std::span<const CurveSample> samples,
                                            int side, double max_abs_x2);

/// Forward-time switching sign rule: x2 x3 > 0 switches -1 -> +1 and
/// x2 x3 < 0 switches +1 -> -1.
bool obeys_sign_rule(const CurveSample& s);
bool obeys_sign_rule(const SwitchPoint& s);

struct ChatteringReport {
  std::vector<double> ratios;
  double limit_estimate = 0.0;
  double expected = 0.0;
  bool inconclusive = false;
  bool passed = false;
};

/// Ratios (T - t_k) / (T - t_{k-1}) of forward-ordered switching times.
/// Without T the interval ratios (t_k - t_{k-1}) / (t_{k-1} - t_{k-2}) are
/// used, which coincide for a geometric progression.
ChatteringReport verify_chattering_asymptotics(
    std::span<const double> switch_times,
    std::optional<double> accumulation_time, double rel_tol = 0.05);

/// Backward trajectory from a seed: switching times in forward order,
/// the seed (t = 0) included as last switch, T = Fuller tail time.
ChatteringReport verify_chattering_asymptotics(const ExtremalTrajectory& traj,
                                               const SeedPoint& seed,
                                               double rel_tol = 0.05);

}  // namespace chatter
