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

#include <span>
#include <vector>

#include "chatter/dynamics.hpp"

namespace chatter {

struct ShootingResult;

/// Fixed-horizon problem with N piecewise-constant controls:
///   J(u) = int_0^tf x1^2 dt + mu |X(tf) - |3>|^2,  |u_k| <= 1.
struct DirectProblem {
  double t_f = 2.59;
  int n_steps = 100;
  double mu = 1e3;
  StateVector x_init = StateVector(0.0, 1.0, 0.0);
  ModelParams params;
  /// Each control interval is integrated with ceil(h / max_substep) fixed
  /// Dormand-Prince steps.
  double max_substep = 5e-3;

  void validate() const;
  double step() const { return t_f / n_steps; }
};

struct ObjectiveEvaluation {
  double objective = 0.0;
  double cost_running = 0.0;
  double terminal_distance = 0.0;
  std::vector<double> gradient;
};

/// Objective and its exact gradient through the discrete adjoint of the
/// fixed-step propagation (step Jacobians by forward-mode differentiation).
ObjectiveEvaluation objective_and_gradient(std::span<const double> controls,
                                           const DirectProblem& problem);

/// Objective only (no gradient), same discretization.
ObjectiveEvaluation evaluate_objective(std::span<const double> controls,
                                       const DirectProblem& problem);

/// Clamp onto [-1, 1]^N.
std::vector<double> project_box(std::span<const double> u);

struct DirectOptions {
  int max_iterations = 4000;
  /// Stop when max_k |P(u - g) - u|_k < tolerance.
  double tolerance = 1e-9;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  /// L-BFGS pairs kept for the free coordinates.
  int memory = 10;
  /// Bound-proximity width of the active-set estimate.
  double active_width = 1e-3;
};

struct DirectSolution {
  int n_steps = 0;
  double mu = 0.0;
  std::vector<double> controls;
  double objective = 0.0;
  double cost_running = 0.0;
  double terminal_distance = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// Two-metric projected quasi-Newton: L-BFGS directions on the free
/// coordinates, plain gradient on the estimated active set, monotone Armijo
/// backtracking along the projection arc. Non-convergence is reported in
/// the solution, never thrown.
DirectSolution solve_direct(const DirectProblem& problem,
                            std::span<const double> initial_controls,
                            const DirectOptions& options = {});

/// u == 0 initialization.
DirectSolution solve_direct(const DirectProblem& problem,
                            const DirectOptions& options = {});

/// PMP control sampled at interval midpoints on [0, t_f].
std::vector<double> sample_pmp_controls(const ShootingResult& reference,
                                        const DirectProblem& problem);

/// Number of k in [begin, end - 1) with u_k u_{k+1} < 0.
int count_sign_changes(std::span<const double> u, std::size_t begin,
                       std::size_t end);

struct ComparisonRow {
  int n_steps = 0;
  double mu = 0.0;
  double cost = 0.0;
  double terminal_distance = 0.0;
  double reference_cost = 0.0;
  double cost_gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ComparisonReport {
  double reference_cost = 0.0;
  double reference_t_f = 0.0;
  std::vector<ComparisonRow> rows;
};

ComparisonReport compare_to_pmp(std::span<const DirectSolution> solutions,
                                const ShootingResult& reference);

}  // namespace chatter
