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

// chatter: command-line front end.
//
//   chatter fuller      Fuller trajectory, phase plot, constants
//   chatter synthesize  shooting from x_init, optimal path
//   chatter curve       switching curves for several delta
//   chatter direct      piecewise-constant direct study
//   chatter verify      invariant suite
//
// Exit codes: 0 success, 1 verification failure, 2 usage or configuration
// error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chatter/direct.hpp"
#include "chatter/errors.hpp"
#include "chatter/fuller.hpp"
#include "chatter/io.hpp"
#include "chatter/synthesis.hpp"
#include "chatter/verify.hpp"

namespace fs = std::filesystem;
using namespace chatter;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::optional<double> delta;
  std::string x20;
  std::optional<double> precision;
  std::vector<int> n_steps;
  std::string out_dir;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.delta) c.delta = *o.delta;
  if (!o.x20.empty()) {
    if (o.x20 == "auto") {
      c.x20.reset();
    } else {
      try {
        std::size_t pos = 0;
        c.x20 = std::stod(o.x20, &pos);
        if (pos != o.x20.size()) throw std::invalid_argument(o.x20);
      } catch (const std::exception&) {
        throw ConfigError("--x20 expects a number or 'auto', got '" + o.x20 + "'");
      }
    }
  }
  if (o.precision) c.precision = *o.precision;
  if (!o.n_steps.empty()) c.direct.n_steps = o.n_steps;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  c.validate();
  return c;
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void emit(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  std::cout << "wrote " << path.string() << '\n';
}

int cmd_fuller(const RunConfig& c) {
  const fs::path out = c.out_dir;
  const double y0 = c.fuller.y0;
  const auto traj = fuller_trajectory({fuller_switching_curve(y0), y0}, c.fuller.n_arcs);
  emit(out / "fuller_traj.csv", fuller_trajectory_csv(traj));
  emit(out / "fuller_constants.json", fuller_constants_json(traj));

  SvgPlot plot("Fuller synthesis", "x", "y");
  std::vector<std::pair<double, double>> upper, lower, path;
  for (int i = 0; i <= 200; ++i) {
    const double y = 1.2 * y0 * i / 200.0;
    upper.emplace_back(fuller_switching_curve(y), y);
    lower.emplace_back(fuller_switching_curve(-y), -y);
  }
  for (const auto& a : traj.arcs) {
    for (int i = 0; i <= 64; ++i) {
      const auto s = a.state_at(a.t_start + (a.t_end - a.t_start) * i / 64.0);
      path.emplace_back(s.x, s.y);
    }
  }
  plot.add_line(upper, "#d62728", 1.2, true);
  plot.add_line(lower, "#1f77b4", 1.2, true);
  plot.add_line(path, "black", 1.5);
  emit(out / "fuller_phase.svg", plot.render());
  return kExitOk;
}

int cmd_synthesize(const RunConfig& c) {
  const fs::path out = c.out_dir;
  const ModelParams params = c.model();
  const StateVector x_init = StateVector::checked(c.x_init, c.integrator.norm_tol);
  const ShootingResult r = c.x20 ? shoot_fixed_seed(x_init, *c.x20, params, c.integrator)
                                 : shoot(x_init, c.precision, params, c.integrator);
  emit(out / "trajectory.csv", trajectory_csv(r));
  emit(out / "shooting.json", shooting_json(r));

  SvgPlot plot("Optimal path, projection on (x1, x2)", "x1", "x2");
  std::vector<std::pair<double, double>> path, switches, curve;
  for (const auto& arc : r.trajectory.arcs) {
    for (const auto& seg : arc.dense) {
      for (int i = 0; i <= 8; ++i) {
        const double t = seg.t0 + seg.h * i / 8.0;
        if (t < -r.tau) continue;
        const auto z = seg(t);
        path.emplace_back(z[0], z[1]);
      }
    }
  }
  for (const auto& sp : r.trajectory.switch_points) {
    if (sp.t >= -r.tau) switches.emplace_back(sp.x.x1(), sp.x.x2());
  }
  switches.emplace_back(r.seed.x.x1(), r.seed.x.x2());
  const double xi = fuller_constants().xi;
  for (int i = -100; i <= 100; ++i) {
    const double x2 = 0.25 * i / 100.0;
    curve.emplace_back((x2 > 0 ? 1.0 : -1.0) * xi * params.delta * x2 * x2, x2);
  }
  plot.add_line(curve, "#999999", 1.0, true);
  plot.add_line(path, "black", 1.2);
  plot.add_points(switches, "#d62728", 2.5);
  plot.set_equal_aspect(true);
  emit(out / "sphere_projection.svg", plot.render());

  std::cout << shooting_json(r);
  if (r.extrapolated) {
    std::cout << "note: x_init lies outside the validated neighbourhood of |3>\n";
  }
  return kExitOk;
}

int cmd_curve(const RunConfig& c, bool delta_from_flag) {
  const fs::path out = c.out_dir;
  const std::vector<double> deltas =
      delta_from_flag ? std::vector<double>{c.delta} : c.curve.deltas;
  const auto grid = seed_grid(c.curve.x20_min, c.curve.points_per_period, c.curve.periods);
  CurveOptions opts;
  opts.min_x3 = c.curve.min_x3;

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  SvgPlot plot("Switching curves", "x1", "x2");
  int status = kExitOk;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    ModelParams params;
    params.delta = deltas[i];
    const auto curve = build_switching_curve(grid, params, c.integrator, opts);
    emit(out / ("switching_curve_delta_" + fmt_g(deltas[i]) + ".csv"),
         switching_curve_csv(curve));
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : curve.samples) pts.emplace_back(s.x.x1(), s.x.x2());
    plot.add_points(pts, colors[i % 5], 1.2);
    for (const auto& [x20, why] : curve.failures) {
      std::cerr << "delta " << fmt_g(deltas[i]) << ", seed " << x20 << ": " << why << '\n';
      status = kExitNumerical;
    }
  }
  plot.set_equal_aspect(true);
  emit(out / "switching_curves.svg", plot.render());
  return status;
}

int cmd_direct(const RunConfig& c) {
  const fs::path out = c.out_dir;
  const ModelParams params = c.model();
  const StateVector x_init = StateVector::checked(c.x_init, c.integrator.norm_tol);

  std::optional<ShootingResult> reference;
  std::string reference_error;
  try {
    reference = c.x20 ? shoot_fixed_seed(x_init, *c.x20, params, c.integrator)
                      : shoot(x_init, c.precision, params, c.integrator);
  } catch (const NumericalError& e) {
    reference_error = e.what();
  }
  if (c.direct.init == "pmp" && !reference) {
    throw NumericalError("PMP initialization requested but shooting failed: " +
                         reference_error);
  }

  DirectOptions opts;
  opts.max_iterations = c.direct.max_iterations;
  opts.tolerance = c.direct.tolerance;
  std::vector<std::future<DirectSolution>> jobs;
  for (int n : c.direct.n_steps) {
    DirectProblem pr;
    pr.t_f = c.direct.t_f;
    pr.n_steps = n;
    pr.mu = c.direct.mu;
    pr.x_init = x_init;
    pr.params = params;
    std::vector<double> init(static_cast<std::size_t>(n), 0.0);
    if (c.direct.init == "pmp") init = sample_pmp_controls(*reference, pr);
    jobs.push_back(std::async(std::launch::async, [pr, init, opts] {
      return solve_direct(pr, init, opts);
    }));
  }
  std::vector<DirectSolution> sols;
  for (auto& j : jobs) sols.push_back(j.get());

  emit(out / "direct_study.csv", direct_study_csv(sols));
  for (const auto& s : sols) {
    const std::string stem = "control_N" + std::to_string(s.n_steps);
    emit(out / (stem + ".csv"), control_csv(s, c.direct.t_f));
    SvgPlot plot("Direct control, N = " + std::to_string(s.n_steps), "t", "u");
    std::vector<std::pair<double, double>> steps;
    const double h = c.direct.t_f / s.n_steps;
    for (std::size_t k = 0; k < s.controls.size(); ++k) {
      steps.emplace_back(h * k, s.controls[k]);
      steps.emplace_back(h * (k + 1), s.controls[k]);
    }
    if (reference) {
      std::vector<std::pair<double, double>> pmp;
      for (int i = 0; i <= 4000; ++i) {
        const double t = c.direct.t_f * i / 4000.0;
        pmp.emplace_back(t, optimal_control_at(*reference, t));
      }
      plot.add_line(pmp, "#999999", 1.0, true);
    }
    plot.add_line(steps, "#1f77b4", 1.4);
    emit(out / (stem + ".svg"), plot.render());
    if (!s.converged) {
      std::cerr << "N = " << s.n_steps << ": not converged after " << s.iterations
                << " iterations (projected gradient " << s.projected_gradient_norm << ")\n";
    }
  }
  if (!reference) {
    std::cerr << "no PMP reference: " << reference_error << '\n';
    return kExitNumerical;
  }
  emit(out / "direct_comparison.csv", comparison_csv(compare_to_pmp(sols, *reference)));
  return kExitOk;
}

int cmd_verify(const RunConfig& c) {
  VerifyOptions opts;
  opts.params = c.model();
  opts.settings = c.integrator;
  const auto results = run_invariant_suite(opts);
  const std::string report = format_report(results);
  std::cout << report;
  write_text_file(fs::path(c.out_dir) / "verify_report.txt", report);
  return all_passed(results) ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chattering synthesis for a three-level quantum system"};
  app.require_subcommand(1);
  Overrides o;
  double delta = 0.0, precision = 0.0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--delta", delta, "coupling constant");
    sub->add_option("--x20", o.x20, "seed offset, or 'auto' to shoot");
    sub->add_option("--precision", precision, "largest seed offset");
    sub->add_option("--n-steps", o.n_steps, "direct-method step counts")->delimiter(',');
    sub->add_option("--out-dir", o.out_dir, "output directory");
  };
  auto* fuller = app.add_subcommand("fuller", "Fuller trajectory and phase plot");
  auto* synth = app.add_subcommand("synthesize", "optimal path by shooting");
  auto* curve = app.add_subcommand("curve", "switching curves");
  auto* direct = app.add_subcommand("direct", "direct-method study");
  auto* verify = app.add_subcommand("verify", "invariant suite");
  for (auto* s : {fuller, synth, curve, direct, verify}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--delta")) o.delta = delta;
  if (sub->count("--precision")) o.precision = precision;

  try {
    const RunConfig c = resolve_config(o);
    if (sub == fuller) return cmd_fuller(c);
    if (sub == synth) return cmd_synthesize(c);
    if (sub == curve) return cmd_curve(c, o.delta.has_value());
    if (sub == direct) return cmd_direct(c);
    return cmd_verify(c);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
