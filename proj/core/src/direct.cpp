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

#include "chatter/direct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

#include "chatter/dopri5.hpp"
#include "chatter/errors.hpp"
#include "chatter/synthesis.hpp"

namespace chatter {
namespace {

// Forward-mode dual number with kDirs tangent directions: the four
// propagated components (x1, x2, x3, cost) and the interval control.
constexpr int kDirs = 5;

struct Dual {
  double v = 0.0;
  std::array<double, kDirs> d{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant promotion

  static Dual variable(double value, int dir) {
    Dual x(value);
    x.d[static_cast<std::size_t>(dir)] = 1.0;
    return x;
  }
};

Dual operator+(const Dual& a, const Dual& b) {
  Dual r(a.v + b.v);
  for (int i = 0; i < kDirs; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}
Dual operator-(const Dual& a, const Dual& b) {
  Dual r(a.v - b.v);
  for (int i = 0; i < kDirs; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}
Dual operator*(const Dual& a, const Dual& b) {
  Dual r(a.v * b.v);
  for (int i = 0; i < kDirs; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}
Dual operator*(double s, const Dual& a) {
  Dual r(s * a.v);
  for (int i = 0; i < kDirs; ++i) r.d[i] = s * a.d[i];
  return r;
}

template <typename T>
using Z = std::array<T, 4>;

template <typename T>
Z<T> rhs(const Z<T>& z, const T& u, double delta) {
  return {-delta * z[1], delta * z[0] - u * z[2], u * z[1], z[0] * z[0]};
}

template <typename T>
Z<T> axpy(const Z<T>& y, double h, std::initializer_list<std::pair<double, const Z<T>*>> terms) {
  Z<T> out = y;
  for (int i = 0; i < 4; ++i) {
    T acc(0.0);
    for (const auto& [c, k] : terms) acc = acc + c * (*k)[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i)] + h * acc;
  }
  return out;
}

// Fifth-order Dormand-Prince solution, fixed step (no error control).
template <typename T>
Z<T> dp5_fixed_step(const Z<T>& y, const T& u, double h, double delta) {
  using namespace dopri5;
  const Z<T> k1 = rhs(y, u, delta);
  const Z<T> k2 = rhs(axpy(y, h, {{a21, &k1}}), u, delta);
  const Z<T> k3 = rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}), u, delta);
  const Z<T> k4 = rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}), u, delta);
  const Z<T> k5 = rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}),
                      u, delta);
  const Z<T> k6 = rhs(
      axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}),
      u, delta);
  return axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
}

int substeps(const DirectProblem& p) {
  return std::max(1, static_cast<int>(std::ceil(p.step() / p.max_substep - 1e-12)));
}

void check_controls(std::span<const double> u, const DirectProblem& p) {
  if (static_cast<int>(u.size()) != p.n_steps) {
    throw PreconditionError("direct method: control vector length != N");
  }
  for (double v : u) {
    if (!std::isfinite(v) || std::abs(v) > 1.0) {
      throw PreconditionError("direct method: control outside the box");
    }
  }
}

ObjectiveEvaluation finish(const Z<double>& z, const DirectProblem& p) {
  ObjectiveEvaluation e;
  const Vec3 d(z[0], z[1], z[2] - 1.0);
  e.cost_running = z[3];
  e.terminal_distance = d.norm();
  e.objective = z[3] + p.mu * d.squaredNorm();
  return e;
}

}  // namespace

void DirectProblem::validate() const {
  params.validate();
  if (!(t_f > 0.0)) throw PreconditionError("DirectProblem: t_f must be > 0");
  if (n_steps < 2) throw PreconditionError("DirectProblem: N must be >= 2");
  if (!(mu >= 0.0)) throw PreconditionError("DirectProblem: mu must be >= 0");
  if (!(max_substep > 0.0)) {
    throw PreconditionError("DirectProblem: max_substep must be > 0");
  }
  StateVector::checked(x_init.vec());
}

ObjectiveEvaluation evaluate_objective(std::span<const double> controls,
                                       const DirectProblem& problem) {
  problem.validate();
  check_controls(controls, problem);
  const int m = substeps(problem);
  const double hs = problem.step() / m;
  Z<double> z{problem.x_init.x1(), problem.x_init.x2(), problem.x_init.x3(), 0.0};
  for (double u : controls) {
    for (int s = 0; s < m; ++s) z = dp5_fixed_step(z, u, hs, problem.params.delta);
  }
  return finish(z, problem);
}

ObjectiveEvaluation objective_and_gradient(std::span<const double> controls,
                                           const DirectProblem& problem) {
  problem.validate();
  check_controls(controls, problem);
  const int m = substeps(problem);
  const double hs = problem.step() / m;
  const std::size_t n = controls.size();

  // Per-interval Jacobians: jz[k](i, j) = dz_{k+1,i}/dz_{k,j}, ju[k](i).
  std::vector<std::array<std::array<double, 4>, 4>> jz(n);
  std::vector<std::array<double, 4>> ju(n);

  Z<double> z{problem.x_init.x1(), problem.x_init.x2(), problem.x_init.x3(), 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    Z<Dual> zd;
    for (int i = 0; i < 4; ++i) zd[static_cast<std::size_t>(i)] = Dual::variable(z[static_cast<std::size_t>(i)], i);
    const Dual ud = Dual::variable(controls[k], 4);
    for (int s = 0; s < m; ++s) zd = dp5_fixed_step(zd, ud, hs, problem.params.delta);
    for (std::size_t i = 0; i < 4; ++i) {
      z[i] = zd[i].v;
      for (std::size_t j = 0; j < 4; ++j) jz[k][i][j] = zd[i].d[j];
      ju[k][i] = zd[i].d[4];
    }
  }

  ObjectiveEvaluation e = finish(z, problem);
  std::array<double, 4> lambda{2.0 * problem.mu * z[0], 2.0 * problem.mu * z[1],
                               2.0 * problem.mu * (z[2] - 1.0), 1.0};
  e.gradient.assign(n, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    double g = 0.0;
    for (std::size_t i = 0; i < 4; ++i) g += lambda[i] * ju[k][i];
    e.gradient[k] = g;
    std::array<double, 4> prev{};
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t i = 0; i < 4; ++i) prev[j] += jz[k][i][j] * lambda[i];
    }
    lambda = prev;
  }
  return e;
}

std::vector<double> project_box(std::span<const double> u) {
  std::vector<double> p(u.begin(), u.end());
  for (double& v : p) v = std::clamp(v, -1.0, 1.0);
  return p;
}

namespace {

double projected_gradient_norm(std::span<const double> x,
                               std::span<const double> g) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m = std::max(m, std::abs(std::clamp(x[i] - g[i], -1.0, 1.0) - x[i]));
  }
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Limited-memory inverse Hessian restricted to the free coordinates.
struct LbfgsMemory {
  std::size_t capacity = 10;
  std::deque<std::vector<double>> s, y;

  void push(std::vector<double> ds, std::vector<double> dy) {
    s.push_back(std::move(ds));
    y.push_back(std::move(dy));
    if (s.size() > capacity) {
      s.pop_front();
      y.pop_front();
    }
  }
  void clear() {
    s.clear();
    y.clear();
  }

  // Returns -H g with every vector masked to `free`.
  std::vector<double> direction(const std::vector<double>& g,
                                const std::vector<char>& free) const {
    const std::size_t n = g.size(), m = s.size();
    auto masked = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double r = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (free[i]) r += a[i] * b[i];
      }
      return r;
    };
    std::vector<double> q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) q[i] = free[i] ? g[i] : 0.0;
    std::vector<double> alpha(m, 0.0), rho(m, 0.0);
    for (std::size_t j = m; j-- > 0;) {
      const double sy = masked(s[j], y[j]);
      if (!(sy > 0.0)) continue;
      rho[j] = 1.0 / sy;
      alpha[j] = rho[j] * masked(s[j], q);
      for (std::size_t i = 0; i < n; ++i) {
        if (free[i]) q[i] -= alpha[j] * y[j][i];
      }
    }
    double gamma = 1.0;
    if (m > 0) {
      const double yy = masked(y[m - 1], y[m - 1]);
      const double sy = masked(s[m - 1], y[m - 1]);
      if (yy > 0.0 && sy > 0.0) gamma = sy / yy;
    }
    for (double& v : q) v *= gamma;
    for (std::size_t j = 0; j < m; ++j) {
      if (rho[j] == 0.0) continue;
      const double beta = rho[j] * masked(y[j], q);
      for (std::size_t i = 0; i < n; ++i) {
        if (free[i]) q[i] += s[j][i] * (alpha[j] - beta);
      }
    }
    for (double& v : q) v = -v;
    return q;
  }
};

}  // namespace

DirectSolution solve_direct(const DirectProblem& problem,
                            std::span<const double> initial_controls,
                            const DirectOptions& options) {
  problem.validate();
  if (initial_controls.size() != static_cast<std::size_t>(problem.n_steps)) {
    throw PreconditionError("solve_direct: initial controls must have N entries");
  }
  DirectSolution sol;
  sol.n_steps = problem.n_steps;
  sol.mu = problem.mu;

  const std::size_t n = initial_controls.size();
  std::vector<double> u = project_box(initial_controls);
  ObjectiveEvaluation cur = objective_and_gradient(u, problem);
  sol.objective_history.push_back(cur.objective);
  sol.projected_gradient_norm = projected_gradient_norm(u, cur.gradient);

  LbfgsMemory memory;
  memory.capacity = static_cast<std::size_t>(std::max(1, options.memory));
  int it = 0;
  while (it < options.max_iterations) {
    if (sol.projected_gradient_norm < options.tolerance) {
      sol.converged = true;
      break;
    }
    ++it;

    // Two-metric projection: coordinates at a bound with the gradient
    // pointing outward move by the plain gradient, the rest by L-BFGS.
    const double eps = std::min(options.active_width, sol.projected_gradient_norm);
    std::vector<char> free(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = cur.gradient[i];
      if ((u[i] <= -1.0 + eps && g > 0.0) || (u[i] >= 1.0 - eps && g < 0.0)) {
        free[i] = 0;
      }
    }
    std::vector<double> d = memory.direction(cur.gradient, free);
    for (std::size_t i = 0; i < n; ++i) {
      if (!free[i]) d[i] = -cur.gradient[i];
    }
    if (!(dot(d, cur.gradient) < 0.0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -cur.gradient[i];
    }
    double s = 1.0;
    if (memory.s.empty()) {
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      if (dmax > 0.0) s = std::min(1.0, 0.1 / dmax);
    }

    std::vector<double> trial(n);
    ObjectiveEvaluation next;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      double descent = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = std::clamp(u[i] + s * d[i], -1.0, 1.0);
        descent += cur.gradient[i] * (trial[i] - u[i]);
      }
      next = evaluate_objective(trial, problem);
      if (descent < 0.0 &&
          next.objective <= cur.objective + options.armijo_c * descent) {
        accepted = true;
        break;
      }
      s *= options.backtrack;
    }
    if (!accepted) {
      if (memory.s.empty()) break;
      memory.clear();
      continue;
    }

    next = objective_and_gradient(trial, problem);
    std::vector<double> ds(n), dy(n);
    for (std::size_t i = 0; i < n; ++i) {
      ds[i] = trial[i] - u[i];
      dy[i] = next.gradient[i] - cur.gradient[i];
    }
    if (dot(ds, dy) > 1e-12 * std::sqrt(dot(ds, ds) * dot(dy, dy))) {
      memory.push(std::move(ds), std::move(dy));
    }

    u = std::move(trial);
    cur = std::move(next);
    sol.objective_history.push_back(cur.objective);
    sol.projected_gradient_norm = projected_gradient_norm(u, cur.gradient);
  }

  sol.iterations = it;
  sol.controls = std::move(u);
  sol.objective = cur.objective;
  sol.cost_running = cur.cost_running;
  sol.terminal_distance = cur.terminal_distance;
  if (sol.projected_gradient_norm < options.tolerance) sol.converged = true;
  return sol;
}

DirectSolution solve_direct(const DirectProblem& problem,
                            const DirectOptions& options) {
  const std::vector<double> zero(static_cast<std::size_t>(problem.n_steps), 0.0);
  return solve_direct(problem, zero, options);
}

std::vector<double> sample_pmp_controls(const ShootingResult& reference,
                                        const DirectProblem& problem) {
  problem.validate();
  std::vector<double> u(static_cast<std::size_t>(problem.n_steps));
  const double h = problem.step();
  for (int k = 0; k < problem.n_steps; ++k) {
    u[static_cast<std::size_t>(k)] = optimal_control_at(reference, (k + 0.5) * h);
  }
  return u;
}

int count_sign_changes(std::span<const double> u, std::size_t begin,
                       std::size_t end) {
  end = std::min(end, u.size());
  int c = 0;
  for (std::size_t k = begin; k + 1 < end; ++k) {
    if (u[k] * u[k + 1] < 0.0) ++c;
  }
  return c;
}

ComparisonReport compare_to_pmp(std::span<const DirectSolution> solutions,
                                const ShootingResult& reference) {
  ComparisonReport r;
  r.reference_cost = reference.cost;
  r.reference_t_f = reference.t_f;
  for (const auto& s : solutions) {
    ComparisonRow row;
    row.n_steps = s.n_steps;
    row.mu = s.mu;
    row.cost = s.cost_running;
    row.terminal_distance = s.terminal_distance;
    row.reference_cost = reference.cost;
    row.cost_gap = s.cost_running - reference.cost;
    row.iterations = s.iterations;
    row.converged = s.converged;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace chatter
