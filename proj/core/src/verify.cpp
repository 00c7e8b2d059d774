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

#include "chatter/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>

#include "chatter/direct.hpp"
#include "chatter/dopri5.hpp"
#include "chatter/fuller.hpp"
#include "chatter/synthesis.hpp"

namespace chatter {
namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

double rel_err(double a, double b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

CheckResult check_fuller_constants() {
  const auto& k = fuller_constants();
  const double xi2 = (std::sqrt(33.0) - 1.0) / 24.0;
  const double res = k.quartic_residual();
  const double e_xi = std::abs(k.xi * k.xi - xi2);
  const double alpha = std::sqrt((1.0 + 2.0 * k.xi) / (1.0 - 2.0 * k.xi));
  const bool ok = res < 1e-12 && e_xi < 1e-15 && rel_err(alpha, k.alpha) < 1e-15;
  return {"fuller.constants", ok,
          "xi=" + sci(k.xi) + " alpha=" + sci(k.alpha) + " quartic=" + sci(res)};
}

CheckResult check_fuller_recursions() {
  const auto& k = fuller_constants();
  const auto traj = fuller_trajectory({-k.xi, 1.0}, 10);
  const auto times = traj.switching_times();
  const auto states = traj.switching_states();
  double worst = 0.0;
  FullerState prev{-k.xi, 1.0};
  double prev_len = times.front();
  for (std::size_t i = 0; i < states.size(); ++i) {
    worst = std::max(worst, rel_err(states[i].x / prev.x, -1.0 / (k.alpha * k.alpha)));
    worst = std::max(worst, rel_err(states[i].y / prev.y, -1.0 / k.alpha));
    if (i > 0) {
      const double len = times[i] - times[i - 1];
      worst = std::max(worst, rel_err(len / prev_len, 1.0 / k.alpha));
      prev_len = len;
    }
    prev = states[i];
  }
  const double t_err = rel_err(traj.t_f, (1.0 + k.alpha) / (k.alpha - 1.0));
  return {"fuller.recursions", worst < 1e-9 && t_err < 1e-8,
          "max ratio error " + sci(worst) + ", t_f error " + sci(t_err)};
}

CheckResult check_fuller_symmetries() {
  const auto& k = fuller_constants();
  const auto base = fuller_trajectory({-k.xi, 1.0}, 12);
  const double lambda = 0.37;
  const auto scaled = base.scaled(lambda);
  const auto direct = fuller_trajectory({-k.xi * lambda * lambda, lambda}, 12);
  const double e_scale = rel_err(fuller_cost(scaled), std::pow(lambda, 5) * fuller_cost(base));
  const double e_direct = rel_err(fuller_cost(direct), fuller_cost(scaled));
  const auto mirror = base.mirrored();
  double e_mirror = 0.0;
  for (double t : {0.1, 0.7, 1.2, 1.6}) {
    const auto a = base.state_at(t), b = mirror.state_at(t);
    e_mirror = std::max({e_mirror, std::abs(a.x + b.x), std::abs(a.y + b.y)});
  }
  const double e_tail = rel_err(fuller_cost(base), fuller_cost_from_curve(1.0));
  const bool ok = e_scale < 1e-12 && e_direct < 1e-12 && e_mirror < 1e-15 && e_tail < 1e-12;
  return {"fuller.symmetries", ok,
          "dilation " + sci(e_scale) + ", mirror " + sci(e_mirror) + ", tail " + sci(e_tail)};
}

CheckResult check_dilation(const ModelParams& params) {
  const std::vector<double> kappas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  bool ok = true;
  for (const auto& [x, y] : {std::pair{0.02, 0.1}, std::pair{-0.01, 0.2}, std::pair{0.005, -0.15}}) {
    const auto r = dilation_ratios(x, y, kappas, params);
    // Bounded: non-increasing once kappa <= 1e-2.
    for (std::size_t i = 2; i < kappas.size(); ++i) {
      ok = ok && r.x_ratio[i] <= r.x_ratio[i - 1] * (1.0 + 1e-12);
      ok = ok && r.y1_ratio[i] <= r.y1_ratio[i - 1] * (1.0 + 1e-12);
      ok = ok && r.y2_ratio[i] <= r.y2_ratio[i - 1] * (1.0 + 1e-12);
    }
  }
  return {"fuller.dilation", ok, "higher-order terms shrink under (k^2 x, k y)"};
}

CheckResult check_skew(const ModelParams& params, std::mt19937_64& rng) {
  double worst = 0.0;
  std::uniform_real_distribution<double> uu(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const StateVector x(random_unit(rng));
    const double u = uu(rng);
    worst = std::max(worst, std::abs(x.vec().dot(dynamics_rhs(x, Control{u}, params))));
  }
  return {"dynamics.skew", worst < 1e-13, "max |X.dX/dt| = " + sci(worst)};
}

CheckResult check_adjoint_gradient(const ModelParams& params, std::mt19937_64& rng) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 20; ++i) {
    const StateVector x(random_unit(rng));
    const AdjointVector p(random_unit(rng));
    const Control u{i % 2 ? 1.0 : -1.0};
    const Vec3 rhs = adjoint_rhs(x, p, u, params);
    for (int j = 0; j < 3; ++j) {
      Vec3 a = x.vec(), b = x.vec();
      a[j] += h;
      b[j] -= h;
      const double dh = (pontryagin_hamiltonian(StateVector(a), p, u, params) -
                         pontryagin_hamiltonian(StateVector(b), p, u, params)) /
                        (2.0 * h);
      worst = std::max(worst, std::abs(rhs[j] + dh));
    }
  }
  return {"dynamics.adjoint_gradient", worst < 1e-7, "max |dP/dt + dH/dX| = " + sci(worst)};
}

CheckResult check_switching_derivatives(const ModelParams& params, std::mt19937_64& rng) {
  const double h = 1e-3;
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    const StateVector x(random_unit(rng));
    const AdjointVector p = AdjointVector(random_unit(rng)).reduced(x);
    const double u = trial % 2 ? 1.0 : -1.0;
    const auto f = [&](double, const FlowState& z) {
      return extremal_flow_rhs(z, u, params, Direction::Forward);
    };
    // States at -2h, -h, 0, h, 2h by single Dormand-Prince steps.
    std::array<SwitchingDerivatives, 5> d;
    const FlowState z0 = to_flow_state(x, p, 0.0);
    for (int k = -2; k <= 2; ++k) {
      FlowState z = z0;
      if (k != 0) z = dopri5_step(f, 0.0, z0, f(0.0, z0), k * h).y;
      const auto s = to_sample(0.0, z);
      d[static_cast<std::size_t>(k + 2)] = switching_derivatives(s.x, s.p, Control{u}, params);
    }
    const auto fd = [&](auto get) {
      return (get(d[0]) - 8.0 * get(d[1]) + 8.0 * get(d[3]) - get(d[4])) / (12.0 * h);
    };
    const auto& c = d[2];
    const double scale = params.delta;
    const double e1 = std::abs(fd([](const auto& s) { return s.phi; }) - c.d1) /
                      std::max(std::abs(c.d1), 1e-3 * scale);
    const double e2 = std::abs(fd([](const auto& s) { return s.d1; }) - c.d2) /
                      std::max(std::abs(c.d2), 1e-3 * scale * scale);
    const double e3 = std::abs(fd([](const auto& s) { return s.d2; }) - c.d3) /
                      std::max(std::abs(c.d3), 1e-3 * std::pow(scale, 3));
    const double e4 = std::abs(fd([](const auto& s) { return s.d3; }) - c.d4) /
                      std::max(std::abs(c.d4), 1e-3 * std::pow(scale, 4));
    worst = std::max({worst, e1, e2, e3, e4});
  }
  return {"switching.derivatives", worst < 1e-6, "max relative FD error " + sci(worst)};
}

CheckResult check_switching_target(const ModelParams& params) {
  double worst = 0.0;
  for (double u : {1.0, -1.0}) {
    const auto d = switching_derivatives(StateVector::target(), AdjointVector(), Control{u}, params);
    worst = std::max({worst, std::abs(d.phi), std::abs(d.d1), std::abs(d.d2), std::abs(d.d3),
                      std::abs(d.d4 + u * params.delta * params.delta)});
  }
  return {"switching.target_order", worst < 1e-9, "max deviation " + sci(worst)};
}

CheckResult check_decoupling(const ModelParams& params, std::mt19937_64& rng) {
  double worst = 0.0, worst_norm = 0.0;
  const int n = 1000;
  const double h = 1.0 / n;
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector x0(random_unit(rng));
    FullQuantumState psi = FullQuantumState::embed(x0);
    Vec3 x = x0.vec();
    for (int k = 0; k < n; ++k) {
      // Control switches every 0.1 time units.
      const double u = ((k / 100 + trial) % 2) ? 1.0 : -1.0;
      const auto f6 = [&](double, const Vec6& y) {
        return full_schrodinger_rhs(FullQuantumState{y}, Control{u}, params);
      };
      const auto f3 = [&](double, const Vec3& y) {
        return dynamics_rhs(StateVector(y), Control{u}, params);
      };
      psi.x = dopri5_step(f6, 0.0, psi.x, f6(0.0, psi.x), h).y;
      x = dopri5_step(f3, 0.0, x, f3(0.0, x), h).y;
    }
    worst = std::max({worst, (psi.x.head<3>() - x).norm(), psi.x.tail<3>().norm()});
    worst_norm = std::max(worst_norm, psi.norm_defect());
  }
  return {"dynamics.decoupling", worst < 1e-10,
          "max 6D/3D deviation " + sci(worst) + ", norm defect " + sci(worst_norm)};
}

CheckResult check_conservation(const ShootingResult& r, const ModelParams& params) {
  const double hmax = r.trajectory.max_hamiltonian(params);
  const double defect = r.trajectory.max_sphere_defect();
  return {"integrator.conservation", hmax < 1e-9 && defect < 1e-10,
          "max |H_P| " + sci(hmax) + ", max sphere defect " + sci(defect)};
}

CheckResult check_sign_rule(const ShootingResult& r, const ModelParams& params,
                            const IntegratorSettings& settings) {
  int bad = 0, total = 0;
  for (const auto& sp : r.trajectory.switch_points) {
    ++total;
    if (!obeys_sign_rule(sp)) ++bad;
  }
  const auto grid = seed_grid(2e-4, 12, 1.0);
  CurveOptions opts;
  opts.threads = 1;
  const auto curve = build_switching_curve(grid, params, settings, opts);
  for (const auto& s : curve.samples) {
    ++total;
    if (!obeys_sign_rule(s)) ++bad;
  }
  return {"synthesis.sign_rule", bad == 0 && total > 0,
          std::to_string(bad) + " violations among " + std::to_string(total) + " switches"};
}

CheckResult check_chattering(const ShootingResult& r) {
  const auto rep = verify_chattering_asymptotics(r.trajectory, r.seed);
  std::string detail = "limit " + sci(rep.limit_estimate) + " vs 1/alpha " + sci(rep.expected);
  return {"synthesis.chattering_ratio", rep.passed && !rep.inconclusive, detail};
}

CheckResult check_mirror(const ModelParams& params, const IntegratorSettings& settings) {
  StopCriteria stop;
  stop.max_duration = 1.5;
  const auto a = backward_from_seed(seed_adjoint(3e-4, params), stop, settings, params);
  const auto b = backward_from_seed(seed_adjoint(-3e-4, params), stop, settings, params);
  double worst = 0.0;
  const std::size_t n = std::min(a.switch_points.size(), b.switch_points.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = a.switch_points[i];
    const auto& q = b.switch_points[i];
    worst = std::max({worst, std::abs(p.t - q.t), std::abs(p.x.x1() + q.x.x1()),
                      std::abs(p.x.x2() + q.x.x2()), std::abs(p.x.x3() - q.x.x3()),
                      std::abs(p.u_after + q.u_after)});
  }
  const bool ok = n > 0 && a.switch_points.size() == b.switch_points.size() && worst < 1e-9;
  return {"synthesis.mirror_symmetry", ok,
          std::to_string(n) + " switch pairs, max deviation " + sci(worst)};
}

CheckResult check_gradient(std::mt19937_64& rng) {
  DirectProblem pr;
  pr.n_steps = 20;
  std::uniform_real_distribution<double> uu(-0.9, 0.9);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> u(20);
    for (double& v : u) v = uu(rng);
    const auto ev = objective_and_gradient(u, pr);
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double h = 1e-5;
      auto a = u, b = u;
      a[k] += h;
      b[k] -= h;
      const double fd =
          (evaluate_objective(a, pr).objective - evaluate_objective(b, pr).objective) / (2.0 * h);
      const double scale = std::max(std::abs(fd), 1e-3);
      worst = std::max(worst, std::abs(fd - ev.gradient[k]) / scale);
    }
  }
  return {"direct.gradient", worst < 1e-6, "max relative FD error " + sci(worst)};
}

CheckResult check_projection(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uu(-3.0, 3.0);
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(30), b(30);
    for (double& v : a) v = uu(rng);
    for (double& v : b) v = uu(rng);
    const auto pa = project_box(a), pb = project_box(b);
    ok = ok && project_box(pa) == pa;
    double d_in = 0.0, d_out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      d_in += (a[i] - b[i]) * (a[i] - b[i]);
      d_out += (pa[i] - pb[i]) * (pa[i] - pb[i]);
      ok = ok && std::abs(pa[i]) <= 1.0;
    }
    ok = ok && d_out <= d_in;
  }
  return {"direct.projection", ok, "idempotent, non-expansive, inside the box"};
}

CheckResult check_determinism(const ModelParams& params, const IntegratorSettings& settings) {
  const auto a = shoot(StateVector(0.0, 1.0, 0.0), 1e-3, params, settings);
  const auto b = shoot(StateVector(0.0, 1.0, 0.0), 1e-3, params, settings);
  DirectProblem pr;
  pr.n_steps = 16;
  DirectOptions opt;
  opt.max_iterations = 30;
  const auto c = solve_direct(pr, opt);
  const auto d = solve_direct(pr, opt);
  const bool ok = a.x20_star == b.x20_star && a.t_f == b.t_f && a.cost == b.cost &&
                  c.controls == d.controls && c.objective == d.objective;
  return {"determinism", ok, "repeated shooting and direct runs are bit-identical"};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options) {
  const auto& params = options.params;
  const auto& settings = options.settings;
  std::mt19937_64 rng(options.seed);
  std::vector<CheckResult> out;

  const auto guarded = [&](const std::string& name, const std::function<CheckResult()>& f) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };

  guarded("fuller.constants", [] { return check_fuller_constants(); });
  guarded("fuller.recursions", [] { return check_fuller_recursions(); });
  guarded("fuller.symmetries", [] { return check_fuller_symmetries(); });
  guarded("fuller.dilation", [&] { return check_dilation(params); });
  guarded("dynamics.skew", [&] { return check_skew(params, rng); });
  guarded("dynamics.adjoint_gradient", [&] { return check_adjoint_gradient(params, rng); });
  guarded("dynamics.decoupling", [&] { return check_decoupling(params, rng); });
  guarded("switching.derivatives", [&] { return check_switching_derivatives(params, rng); });
  guarded("switching.target_order", [&] { return check_switching_target(params); });

  std::optional<ShootingResult> shot;
  guarded("synthesis.shooting", [&] {
    shot = shoot(StateVector(0.0, 1.0, 0.0), 1e-3, params, settings);
    return CheckResult{"synthesis.shooting", shot->terminal_miss < 1e-9,
                       "x20*=" + sci(shot->x20_star) + " t_f=" + sci(shot->t_f) +
                           " miss=" + sci(shot->terminal_miss)};
  });
  if (shot) {
    guarded("integrator.conservation", [&] { return check_conservation(*shot, params); });
    guarded("synthesis.sign_rule", [&] { return check_sign_rule(*shot, params, settings); });
    guarded("synthesis.chattering_ratio", [&] { return check_chattering(*shot); });
  }
  guarded("synthesis.mirror_symmetry", [&] { return check_mirror(params, settings); });
  guarded("direct.gradient", [&] { return check_gradient(rng); });
  guarded("direct.projection", [&] { return check_projection(rng); });
  guarded("determinism", [&] { return check_determinism(params, settings); });
  return out;
}

std::string format_report(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
  return os.str();
}

bool all_passed(const std::vector<CheckResult>& results) {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

}  // namespace chatter
