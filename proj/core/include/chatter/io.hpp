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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chatter/direct.hpp"
#include "chatter/fuller.hpp"
#include "chatter/integrator.hpp"
#include "chatter/synthesis.hpp"

namespace chatter {

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, std::string_view text);

// --- Fuller ---------------------------------------------------------------

/// Header `t,x,y,u`; `samples_per_arc` points per arc plus each switch.
std::string fuller_trajectory_csv(const FullerTrajectory& traj,
                                  int samples_per_arc = 32);
/// {"xi", "alpha", "quartic_residual", "t_f", "cost", "y0"}
std::string fuller_constants_json(const FullerTrajectory& traj);

// --- extremal trajectories ------------------------------------------------

/// Header `t,x1,x2,x3,p1,p2,p3,u,phi,event`. Rows are accepted-step nodes
/// and located switches (event = 1), in increasing forward time. Only
/// nodes with original time in [t_lo, t_hi] are written; `time_shift` is
/// added to every written time.
std::string trajectory_csv(const ExtremalTrajectory& traj, double t_lo,
                           double t_hi, double time_shift);
std::string trajectory_csv(const ExtremalTrajectory& traj);
/// The optimal path of a shooting result in forward time t in [0, tau].
std::string trajectory_csv(const ShootingResult& result);

/// {"x20_star", "tau", "t_f", "terminal_miss", "cost", "n_switchings"}
std::string shooting_json(const ShootingResult& result);

// --- switching curves -----------------------------------------------------

/// Header `branch,x20_seed,switch_index,x1,x2,x3`.
std::string switching_curve_csv(const SwitchingCurve& curve);

// --- direct method --------------------------------------------------------

/// Header `N,mu,cost,terminal_distance,iterations,converged`.
std::string direct_study_csv(std::span<const DirectSolution> solutions);
/// Header `k,t_k,u_k`; t_k is the left end of interval k.
std::string control_csv(const DirectSolution& solution, double t_f);
/// Header `N,mu,cost,terminal_distance,reference_cost,cost_gap`.
std::string comparison_csv(const ComparisonReport& report);

// --- plots ----------------------------------------------------------------

/// Minimal static SVG line plot with automatic bounds.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add_line(std::vector<std::pair<double, double>> points,
                std::string color, double width = 1.5, bool dashed = false);
  void add_points(std::vector<std::pair<double, double>> points,
                  std::string color, double radius = 1.5);
  /// Forces equal scaling of both axes.
  void set_equal_aspect(bool on) { equal_aspect_ = on; }

  std::string render(int width = 640, int height = 480) const;

 private:
  struct Series {
    std::vector<std::pair<double, double>> points;
    std::string color;
    double width;
    bool dashed;
    bool markers;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  bool equal_aspect_ = false;
};

// --- run configuration ----------------------------------------------------

struct DirectRunSettings {
  double t_f = 2.59;
  std::vector<int> n_steps = {50, 100, 200, 400};
  double mu = 1e3;
  int max_iterations = 4000;
  double tolerance = 1e-9;
  std::string init = "zero";  // "zero" | "pmp"
};

struct CurveRunSettings {
  std::vector<double> deltas = {6.0, 10.0, 14.0};
  double x20_min = 1e-4;
  int points_per_period = 160;
  double periods = 1.0;
  double min_x3 = -0.3;
};

struct FullerRunSettings {
  double y0 = 1.0;
  int n_arcs = 12;
};

/// Everything a CLI run needs. Loaded from JSON; unknown keys are errors.
struct RunConfig {
  double delta = 10.0;
  std::optional<double> x20;  // nullopt = solve by shooting
  Vec3 x_init = Vec3(0.0, 1.0, 0.0);
  double precision = 1e-3;
  IntegratorSettings integrator;
  DirectRunSettings direct;
  CurveRunSettings curve;
  FullerRunSettings fuller;
  std::string out_dir = "out";

  void validate() const;
  ModelParams model() const;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_json(const RunConfig& config);

}  // namespace chatter
