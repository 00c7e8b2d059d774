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

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "chatter/dopri5.hpp"
#include "chatter/dynamics.hpp"

namespace chatter {

/// Tolerances for propagating the extremal flow. The costate block uses a
/// purely relative error scale: near |3> the costate is O(x1^2), many
/// orders of magnitude below abs_tol.
struct IntegratorSettings {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = 0.05;
  double initial_step = 1e-5;
  double min_step = 1e-16;
  /// |Phi| at a located switch, relative to |P~|.
  double event_tol_phi = 1e-12;
  double event_tol_time = 1e-13;
  int max_switchings = 200;
  double norm_tol = kDefaultNormTol;
  double hamiltonian_tol = 1e-9;
  long max_steps_per_arc = 5'000'000;

  void validate() const;
};

enum class Direction { Forward, Backward };

inline double direction_sign(Direction d) {
  return d == Direction::Forward ? 1.0 : -1.0;
}

/// Combined (X, P, running cost) state of the normal extremal flow.
using FlowState = Eigen::Matrix<double, 7, 1>;

/// Right-hand side of the normal extremal flow for fixed control. The cost
/// component grows in the integration direction.
FlowState extremal_flow_rhs(const FlowState& z, double u,
                            const ModelParams& params, Direction dir);

struct ExtremalSample {
  double t = 0.0;
  StateVector x;
  AdjointVector p;
  double cost = 0.0;  // accumulated from the trajectory start
};

ExtremalSample to_sample(double t, const FlowState& z);
FlowState to_flow_state(const StateVector& x, const AdjointVector& p,
                        double cost);

enum class ArcEvent {
  PhiZero,        // switching function changed sign; arc cut at the zero
  MaxTime,        // duration cap reached
  TargetReached,  // entered the target ball
  StopRequested,  // user predicate fired
  Degenerate,     // Phi vanished over a whole step (possible singular arc)
};

std::string_view to_string(ArcEvent e);

/// One constant-control arc with its accepted-step nodes and interpolants.
struct BangArc {
  double u = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<ExtremalSample> samples;
  std::vector<DenseSegment<FlowState>> dense;

  /// Dense evaluation, t inside [t_start, t_end] in either orientation.
  ExtremalSample at(double t) const;
  bool contains(double t) const;
};

/// Termination controls for a single arc or a concatenation.
struct StopCriteria {
  /// Duration cap measured along the integration direction.
  double max_duration = 10.0;
  /// Stop once |X - |3>| < target_radius (0 disables).
  double target_radius = 0.0;
  /// Evaluated at every accepted step; returning true stops integration.
  std::function<bool(const ExtremalSample&)> predicate;
};

struct ArcResult {
  BangArc arc;
  ArcEvent event = ArcEvent::MaxTime;
  /// |Phi| / |P~| at the located switch (PhiZero only).
  double phi_residual = 0.0;
};

/// Integrates X and P with fixed u from (t0, X0, P0) until the first sign
/// change of Phi, localized by bisection on the dense output and polished
/// by Newton iterations on re-taken steps.
///
/// Throws PreconditionError when u is inconsistent with the sign of Phi at
/// the start, NumericalError on step-size underflow or a non-finite state.
ArcResult integrate_bang_arc(const StateVector& x0, const AdjointVector& p0,
                             double u, Direction dir,
                             const IntegratorSettings& settings,
                             const ModelParams& params,
                             const StopCriteria& stop = {}, double t0 = 0.0,
                             double cost0 = 0.0);

struct SwitchPoint {
  double t = 0.0;
  StateVector x;
  AdjointVector p;
  double phi = 0.0;
  /// Controls on either side of the switch in forward time.
  double u_before = 0.0;
  double u_after = 0.0;
};

struct ExtremalTrajectory {
  std::vector<BangArc> arcs;
  std::vector<SwitchPoint> switch_points;
  Direction direction = Direction::Forward;
  double cost_accumulated = 0.0;
  ArcEvent termination = ArcEvent::MaxTime;
  /// max_switchings exhausted before a stop condition.
  bool truncated = false;

  double t_start() const { return arcs.empty() ? 0.0 : arcs.front().t_start; }
  double t_end() const { return arcs.empty() ? 0.0 : arcs.back().t_end; }
  const BangArc& arc_at(double t) const;
  ExtremalSample at(double t) const;

  /// Largest |H_P| and sphere defect over all accepted-step nodes.
  double max_hamiltonian(const ModelParams& params) const;
  double max_sphere_defect() const;
};

struct ExtremalSeed {
  StateVector x;
  AdjointVector p;
  double u = 1.0;
  double t0 = 0.0;
};

/// Chains bang arcs, flipping the control at every Phi zero, until a stop
/// criterion fires or settings.max_switchings switches have been taken.
ExtremalTrajectory concatenate_extremal(const ExtremalSeed& seed,
                                        Direction dir,
                                        const StopCriteria& stop,
                                        const IntegratorSettings& settings,
                                        const ModelParams& params);

}  // namespace chatter
