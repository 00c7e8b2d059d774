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

#include "chatter/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "chatter/errors.hpp"
#include "chatter/fuller.hpp"

namespace chatter {
namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double distance(const StateVector& a, const StateVector& b) {
  return (a.vec() - b.vec()).norm();
}

// Golden-section minimization of a unimodal function on [a, b].
template <typename F>
double golden_min(const F& f, double a, double b, int iters = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && std::abs(b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

struct MissEvaluation {
  double x20 = 0.0;
  double signed_miss = 0.0;
  ClosestApproach approach;
  ExtremalTrajectory trajectory;
};

}  // namespace

AdjointVector adjoint_from_switching_conditions(const StateVector& x,
                                                const ModelParams& params) {
  const double d = params.delta;
  Eigen::Matrix3d a;
  a << 0.0, -x.x3(), x.x2(),
       -d * x.x2(), d * x.x1(), 0.0,
       x.x1(), x.x2(), x.x3();
  const Vec3 b(0.0, 0.5 * x.x1() * x.x1(), 0.0);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  if (!lu.isInvertible() || x.x2() == 0.0) {
    throw PreconditionError(
        "adjoint_from_switching_conditions: singular system (x2 = 0)");
  }
  return AdjointVector(Vec3(lu.solve(b)));
}

SeedPoint seed_adjoint(double x20, const ModelParams& params) {
  params.validate();
  if (x20 == 0.0 || !std::isfinite(x20)) {
    throw PreconditionError(
        "seed_adjoint: x20 = 0 gives the degenerate costate P~ = 0");
  }
  const double xi = fuller_constants().xi;
  const double x1 = sgn(x20) * xi * params.delta * x20 * x20;
  const double r2 = x1 * x1 + x20 * x20;
  if (!(r2 < 1.0)) {
    throw PreconditionError("seed_adjoint: seed leaves the northern cap");
  }
  SeedPoint s;
  s.x20 = x20;
  s.x = StateVector(x1, x20, std::sqrt(1.0 - r2));
  s.p = adjoint_from_switching_conditions(s.x, params);
  s.u_incoming = -sgn(x20);
  return s;
}

ExtremalTrajectory backward_from_seed(const SeedPoint& seed,
                                      const StopCriteria& stop,
                                      const IntegratorSettings& settings,
                                      const ModelParams& params) {
  ExtremalSeed es;
  es.x = seed.x;
  es.p = seed.p;
  es.u = seed.u_incoming;
  return concatenate_extremal(es, Direction::Backward, stop, settings, params);
}

ClosestApproach closest_approach(const ExtremalTrajectory& traj,
                                 const StateVector& target,
                                 const ModelParams& params) {
  if (traj.arcs.empty()) {
    throw PreconditionError("closest_approach: empty trajectory");
  }
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_arc = 0;
  double best_t = traj.arcs.front().t_start;
  double lo = best_t, hi = best_t;

  for (std::size_t ai = 0; ai < traj.arcs.size(); ++ai) {
    const auto& arc = traj.arcs[ai];
    if (arc.dense.empty()) {
      const double dd = distance(arc.samples.front().x, target);
      if (dd < best) {
        best = dd;
        best_arc = ai;
        best_t = lo = hi = arc.samples.front().t;
      }
      continue;
    }
    for (const auto& seg : arc.dense) {
      constexpr int kProbes = 8;
      for (int k = 0; k <= kProbes; ++k) {
        const double t = seg.t0 + seg.h * k / kProbes;
        const double dd = (seg(t).head<3>() - target.vec()).norm();
        if (dd < best) {
          best = dd;
          best_arc = ai;
          best_t = t;
          const double w = std::abs(seg.h) / kProbes;
          lo = std::max(t - w, std::min(arc.t_start, arc.t_end));
          hi = std::min(t + w, std::max(arc.t_start, arc.t_end));
        }
      }
    }
  }

  const auto& arc = traj.arcs[best_arc];
  double t_star = best_t;
  if (hi > lo) {
    t_star = golden_min(
        [&](double t) { return (arc.at(t).x.vec() - target.vec()).norm(); },
        lo, hi);
    if ((arc.at(t_star).x.vec() - target.vec()).norm() > best) t_star = best_t;
  }

  ClosestApproach ca;
  const ExtremalSample s = arc.dense.empty() ? arc.samples.front() : arc.at(t_star);
  ca.t = t_star;
  ca.x = s.x;
  ca.cost = s.cost;
  ca.arc_index = best_arc;
  ca.distance = distance(s.x, target);
  const Vec3 v = dynamics_rhs(s.x, Control{arc.u}, params);
  const Vec3 n = s.x.vec().cross(v);
  const double side = (target.vec() - s.x.vec()).dot(n);
  ca.signed_distance = side < 0.0 ? -ca.distance : ca.distance;
  return ca;
}

namespace {

MissEvaluation evaluate_seed(const StateVector& x_init, double x20,
                             const ModelParams& params,
                             const IntegratorSettings& settings,
                             const ShootingOptions& options) {
  const double x3_floor = x_init.x3() - 0.5;
  StopCriteria stop;
  stop.max_duration = options.max_duration;
  stop.predicate = [x3_floor](const ExtremalSample& s) {
    return s.x.x3() < x3_floor;
  };
  MissEvaluation e;
  e.x20 = x20;
  const SeedPoint s = seed_adjoint(x20, params);
  e.trajectory = backward_from_seed(s, stop, settings, params);
  e.approach = closest_approach(e.trajectory, x_init, params);
  e.signed_miss = e.approach.signed_distance;
  return e;
}

void assemble(MissEvaluation cur, const ModelParams& params,
              ShootingResult& result) {
  result.seed = seed_adjoint(cur.x20, params);
  result.x20_star = cur.x20;
  result.tau = -cur.approach.t;
  result.terminal_miss = cur.approach.distance;
  result.tail_time = fuller_final_time(std::abs(cur.x20));
  result.t_f = result.tau + result.tail_time;
  result.tail_cost =
      params.delta * params.delta * fuller_cost_from_curve(cur.x20);
  result.cost = cur.approach.cost + result.tail_cost;
  int switches = 1;  // the seed
  for (const auto& sp : cur.trajectory.switch_points) {
    if (sp.t > cur.approach.t) ++switches;
  }
  result.n_switchings = switches;
  result.trajectory = std::move(cur.trajectory);
}

}  // namespace

ShootingResult shoot(const StateVector& x_init, double precision,
                     const ModelParams& params,
                     const IntegratorSettings& settings,
                     const ShootingOptions& options) {
  params.validate();
  settings.validate();
  if (!(precision > 0.0)) {
    throw PreconditionError("shoot: precision must be positive");
  }
  StateVector::checked(x_init.vec(), settings.norm_tol);
  const auto& k = fuller_constants();

  ShootingResult result;
  result.extrapolated =
      distance(x_init, StateVector::target()) > options.validated_radius;

  // X_init already on the local switching curve: zero backward time.
  if (x_init.x2() != 0.0 && std::abs(x_init.x2()) <= precision &&
      x_init.x3() > 0.0) {
    const SeedPoint s = seed_adjoint(x_init.x2(), params);
    if (distance(s.x, x_init) <= 1e-12) {
      result.x20_star = s.x20;
      result.seed = s;
      BangArc arc;
      arc.u = s.u_incoming;
      arc.samples.push_back({0.0, s.x, s.p, 0.0});
      result.trajectory.arcs.push_back(arc);
      result.trajectory.direction = Direction::Backward;
      result.tail_time = fuller_final_time(std::abs(s.x20));
      result.t_f = result.tail_time;
      result.tail_cost = params.delta * params.delta *
                         fuller_cost_from_curve(s.x20);
      result.cost = result.tail_cost;
      result.n_switchings = 1;
      return result;
    }
  }

  auto evaluate = [&](double x20) {
    return evaluate_seed(x_init, x20, params, settings, options);
  };

  // Scan one alpha^2 period below `precision`, largest seeds first.
  const double period = k.alpha * k.alpha;
  const int n = std::max(4, options.scan_points);
  std::vector<double> grid(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        precision * std::pow(period, -1.1 * static_cast<double>(i) / n);
  }
  std::optional<std::pair<double, double>> bracket;
  double m_hi = 0.0, m_lo = 0.0;
  double prev_x = grid[0];
  double prev_m = evaluate(prev_x).signed_miss;
  constexpr double kContinuityBound = 0.2;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double m = evaluate(grid[i]).signed_miss;
    if (sgn(m) != sgn(prev_m) && std::abs(m) < kContinuityBound &&
        std::abs(prev_m) < kContinuityBound) {
      bracket = std::make_pair(grid[i], prev_x);
      m_lo = m;
      m_hi = prev_m;
      break;
    }
    prev_x = grid[i];
    prev_m = m;
  }
  if (!bracket) {
    throw NumericalError("shoot: no sign change of the miss distance found");
  }

  double lo = bracket->first, hi = bracket->second;
  double x = std::abs(m_lo) < std::abs(m_hi) ? lo : hi;
  MissEvaluation cur = evaluate(x);
  for (int it = 0; it < options.max_newton_iterations; ++it) {
    if (std::abs(cur.signed_miss) < options.miss_tol) break;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;

    const double fd = 1e-6 * x;
    const double slope =
        (evaluate(x + fd).signed_miss - evaluate(x - fd).signed_miss) /
        (2.0 * fd);
    double next = x - cur.signed_miss / slope;
    bool newton_ok = std::isfinite(next) && next > lo && next < hi;
    MissEvaluation cand;
    if (newton_ok) {
      cand = evaluate(next);
      newton_ok = std::abs(cand.signed_miss) < 0.5 * std::abs(cur.signed_miss);
      ++result.newton_iterations;
    }
    if (!newton_ok) {
      next = 0.5 * (lo + hi);
      cand = evaluate(next);
      ++result.bisection_steps;
    }
    if (sgn(cand.signed_miss) == sgn(m_lo)) {
      lo = next;
      m_lo = cand.signed_miss;
    } else {
      hi = next;
      m_hi = cand.signed_miss;
    }
    x = next;
    cur = std::move(cand);
  }

  assemble(cur, params, result);
  return result;
}

ShootingResult shoot_fixed_seed(const StateVector& x_init, double x20,
                                const ModelParams& params,
                                const IntegratorSettings& settings,
                                const ShootingOptions& options) {
  params.validate();
  settings.validate();
  StateVector::checked(x_init.vec(), settings.norm_tol);
  ShootingResult result;
  result.extrapolated =
      distance(x_init, StateVector::target()) > options.validated_radius;
  assemble(evaluate_seed(x_init, x20, params, settings, options), params,
           result);
  return result;
}

double optimal_control_at(const ShootingResult& r, double t) {
  if (t < 0.0) return r.trajectory.arcs.front().u;
  if (t <= r.tau) return r.trajectory.arc_at(t - r.tau).u;
  // Inside the chattering tail: Fuller synthesis from the seed, with the
  // Fuller control being the negated quantum control.
  static constexpr int kTailArcs = 40;
  const FullerState start{fuller_switching_curve(r.seed.x20), r.seed.x20};
  const FullerTrajectory tail = fuller_trajectory(start, kTailArcs);
  const double s = t - r.tau;
  for (const auto& a : tail.arcs) {
    if (s <= a.t_end) return -static_cast<double>(a.u);
  }
  return 0.0;
}

std::string to_string(Branch b) { return b == Branch::Upper ? "upper" : "lower"; }

std::vector<CurveSample> SwitchingCurve::branch(Branch b) const {
  std::vector<CurveSample> out;
  for (const auto& s : samples) {
    if (s.branch == b) out.push_back(s);
  }
  return out;
}

std::vector<double> seed_grid(double x20_min, int points_per_period,
                              double periods) {
  if (!(x20_min > 0.0) || points_per_period < 1 || !(periods > 0.0)) {
    throw PreconditionError("seed_grid: invalid arguments");
  }
  const double a2 = std::pow(fuller_constants().alpha, 2.0);
  const int n = static_cast<int>(std::ceil(points_per_period * periods));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g.push_back(x20_min * std::pow(a2, static_cast<double>(i) / points_per_period));
  }
  return g;
}

SwitchingCurve build_switching_curve(std::span<const double> x20_grid,
                                     const ModelParams& params,
                                     const IntegratorSettings& settings,
                                     const CurveOptions& options) {
  params.validate();
  settings.validate();
  for (double x : x20_grid) {
    if (!(x > 0.0)) {
      throw PreconditionError(
          "build_switching_curve: grid values must be positive; the lower "
          "branch is generated by mirror symmetry");
    }
  }

  struct SeedOutcome {
    std::vector<CurveSample> samples;
    std::optional<std::string> error;
  };

  StopCriteria stop;
  stop.max_duration = options.max_duration;
  const double floor = options.min_x3;
  stop.predicate = [floor](const ExtremalSample& s) { return s.x.x3() < floor; };

  auto run_seed = [&](double x20) {
    SeedOutcome o;
    try {
      const SeedPoint seed = seed_adjoint(x20, params);
      const auto traj = backward_from_seed(seed, stop, settings, params);
      int idx = 0;
      for (const auto& sp : traj.switch_points) {
        CurveSample c;
        c.branch = Branch::Upper;
        c.x20_seed = x20;
        c.switch_index = ++idx;
        c.x = sp.x;
        c.u_before = sp.u_before;
        c.u_after = sp.u_after;
        o.samples.push_back(c);
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    return o;
  };

  unsigned workers = options.threads != 0 ? options.threads
                                          : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, x20_grid.size())));
  std::vector<SeedOutcome> outcomes(x20_grid.size());
  {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < x20_grid.size(); i += workers) {
          outcomes[i] = run_seed(x20_grid[i]);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  SwitchingCurve curve;
  curve.delta = params.delta;
  std::vector<CurveSample> upper;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].error) {
      curve.failures.emplace_back(x20_grid[i], *outcomes[i].error);
      continue;
    }
    for (const auto& s : outcomes[i].samples) {
      // A seed -alpha x20 continues the x20 extremal after one switch, so
      // mirrored images count as duplicates too.
      const Vec3 m(-s.x.x1(), -s.x.x2(), s.x.x3());
      const bool duplicate = std::any_of(
          upper.begin(), upper.end(), [&](const CurveSample& o) {
            return (o.x.vec() - s.x.vec()).norm() < options.dedup_tol ||
                   (o.x.vec() - m).norm() < options.dedup_tol;
          });
      if (!duplicate) upper.push_back(s);
    }
  }
  const Vec3 e3 = StateVector::target().vec();
  std::stable_sort(upper.begin(), upper.end(),
                   [&](const CurveSample& a, const CurveSample& b) {
                     return (a.x.vec() - e3).norm() < (b.x.vec() - e3).norm();
                   });
  for (const auto& s : upper) curve.samples.push_back(s);
  for (const auto& s : upper) {
    CurveSample m = s;
    m.branch = Branch::Lower;
    m.x20_seed = -s.x20_seed;
    m.x = StateVector(-s.x.x1(), -s.x.x2(), s.x.x3());
    m.u_before = -s.u_before;
    m.u_after = -s.u_after;
    curve.samples.push_back(m);
  }
  return curve;
}

std::optional<double> fit_curve_coefficient(std::span<const CurveSample> samples,
                                            int side, double max_abs_x2) {
  double num = 0.0, den = 0.0;
  for (const auto& s : samples) {
    if (s.switch_index < 1) continue;
    const double y = side * s.x.x2();
    if (!(y > 0.0) || y > max_abs_x2) continue;
    // Far-field points with small x2 (near (+-1, 0, 0)) are not part of
    // the local parabola.
    if (s.x.x3() <= 0.0 || std::abs(s.x.x1()) > max_abs_x2) continue;
    const double y2 = s.x.x2() * s.x.x2();
    num += s.x.x1() * y2;
    den += y2 * y2;
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

namespace {
bool sign_rule(double x2, double x3, double before, double after) {
  const double q = x2 * x3;
  if (q > 0.0) return before < 0.0 && after > 0.0;
  if (q < 0.0) return before > 0.0 && after < 0.0;
  return true;
}
}  // namespace

bool obeys_sign_rule(const CurveSample& s) {
  return sign_rule(s.x.x2(), s.x.x3(), s.u_before, s.u_after);
}

bool obeys_sign_rule(const SwitchPoint& s) {
  return sign_rule(s.x.x2(), s.x.x3(), s.u_before, s.u_after);
}

ChatteringReport verify_chattering_asymptotics(
    std::span<const double> switch_times,
    std::optional<double> accumulation_time, double rel_tol) {
  ChatteringReport r;
  r.expected = 1.0 / fuller_constants().alpha;
  if (switch_times.size() < 6) {
    r.inconclusive = true;
    return r;
  }
  const auto& t = switch_times;
  if (accumulation_time) {
    const double T = *accumulation_time;
    for (std::size_t k = 1; k < t.size(); ++k) {
      r.ratios.push_back((T - t[k]) / (T - t[k - 1]));
    }
  } else {
    for (std::size_t k = 2; k < t.size(); ++k) {
      r.ratios.push_back((t[k] - t[k - 1]) / (t[k - 1] - t[k - 2]));
    }
  }
  const std::size_t n = r.ratios.size();
  double mean = 0.0;
  bool ok = true;
  for (std::size_t i = n - 3; i < n; ++i) {
    mean += r.ratios[i] / 3.0;
    ok = ok && std::abs(r.ratios[i] - r.expected) <= rel_tol * r.expected;
  }
  r.limit_estimate = mean;
  r.passed = ok;
  return r;
}

ChatteringReport verify_chattering_asymptotics(const ExtremalTrajectory& traj,
                                               const SeedPoint& seed,
                                               double rel_tol) {
  std::vector<double> times;
  for (const auto& sp : traj.switch_points) times.push_back(sp.t);
  times.push_back(0.0);
  std::sort(times.begin(), times.end());
  return verify_chattering_asymptotics(
      times, fuller_final_time(std::abs(seed.x20)), rel_tol);
}

}  // namespace chatter
