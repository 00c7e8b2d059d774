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

#include <algorithm>
#include <cmath>

#include "chatter/errors.hpp"
#include "chatter/fuller.hpp"
#include "chatter/synthesis.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chatter;
using doctest::Approx;

namespace {

const ModelParams kParams{10.0, 1.0};
const IntegratorSettings kSettings{};
constexpr double kXi = 0.44462356018593736;
constexpr double kAlpha = 4.1301599497208576;

const ShootingResult& default_shot() {
  static const ShootingResult r = shoot(StateVector(0.0, 1.0, 0.0), 1e-3, kParams, kSettings);
  return r;
}

Vec3 rk4_state(Vec3 x, double u, double dt) {
  const std::function<Vec3(const Vec3&)> f = [&](const Vec3& y) {
    return Vec3(-10.0 * y[1], 10.0 * y[0] - u * y[2], u * y[1]);
  };
  const int n = std::max(4, static_cast<int>(std::abs(dt) / 1e-4));
  return oracle::rk4<Vec3>(f, x, dt, n);
}

}  // namespace

TEST_CASE("seed construction") {
  const SeedPoint s = seed_adjoint(6.9e-4, kParams);
  const double x1 = kXi * 10.0 * 6.9e-4 * 6.9e-4;
  CHECK(x1 == Approx(2.1168e-6).epsilon(1e-4));
  CHECK(s.x.x1() == Approx(x1).epsilon(1e-14));
  CHECK(s.x.x2() == 6.9e-4);
  CHECK(s.x.x3() == Approx(std::sqrt(1 - x1 * x1 - 6.9e-4 * 6.9e-4)).epsilon(1e-15));
  CHECK(s.u_incoming == -1.0);
  CHECK(std::abs(switching_fn(s.x, s.p)) < 1e-12);
  for (double u : {1.0, -1.0}) {
    CHECK(std::abs(pontryagin_hamiltonian(s.x, s.p, Control{u}, kParams)) < 1e-12);
  }
  CHECK(std::abs(s.p.gauge(s.x)) < 1e-12);

  const SeedPoint m = seed_adjoint(-6.9e-4, kParams);
  CHECK(m.x.x1() == -s.x.x1());
  CHECK(m.u_incoming == 1.0);

  CHECK_THROWS_AS(seed_adjoint(0.0, kParams), PreconditionError);
  CHECK_THROWS_AS(seed_adjoint(0.9, kParams), PreconditionError);
}

TEST_CASE("costate from the switching conditions") {
  // x1 = 0 forces the reduced costate to vanish.
  const AdjointVector p0 = adjoint_from_switching_conditions(StateVector(0.0, 0.6, 0.8), kParams);
  CHECK(p0.vec().norm() < 1e-15);
  CHECK_THROWS_AS(adjoint_from_switching_conditions(StateVector(0.6, 0.0, 0.8), kParams),
                  PreconditionError);

  const StateVector x = StateVector::normalized(Vec3(0.1, -0.2, 0.9));
  const AdjointVector p = adjoint_from_switching_conditions(x, kParams);
  CHECK(std::abs(switching_fn(x, p)) < 1e-15);
  CHECK(std::abs(p.gauge(x)) < 1e-15);
  CHECK(10.0 * (p.p2() * x.x1() - p.p1() * x.x2()) == Approx(0.5 * x.x1() * x.x1()));
}

TEST_CASE("shooting from (0, 1, 0)") {
  const auto& r = default_shot();
  CHECK(r.x20_star > 0.0);
  CHECK(r.x20_star <= 1e-3);
  CHECK(r.terminal_miss < 1e-9);
  CHECK(r.extrapolated);
  CHECK(r.tail_time == Approx(fuller_final_time(r.x20_star)).epsilon(1e-15));
  CHECK(r.t_f == Approx(r.tau + r.tail_time).epsilon(1e-15));
  CHECK(std::abs(r.t_f - 2.590) < 1e-2);
  CHECK(r.tail_cost == Approx(100.0 * fuller_cost_from_curve(r.x20_star)).epsilon(1e-14));
  CHECK(r.cost > r.tail_cost);
  CHECK(r.n_switchings >= 10);
  MESSAGE("x20* = " << r.x20_star << ", tau = " << r.tau << ", t_f = " << r.t_f
                    << ", cost = " << r.cost);

  SUBCASE("independent re-integration of the backward path") {
    // Integrate the state only, arc by arc, from the seed back to -tau.
    Vec3 x = r.seed.x.vec();
    double t = 0.0;
    for (const auto& a : r.trajectory.arcs) {
      const double stop = std::max(a.t_end, -r.tau);
      x = rk4_state(x, a.u, stop - t);
      t = stop;
      if (t <= -r.tau) break;
    }
    CHECK((x - Vec3(0.0, 1.0, 0.0)).norm() < 1e-6);
  }

  SUBCASE("forward simulation with the synthesized control") {
    // Piecewise integration on a fine grid; each cell uses the control at
    // its midpoint, cells straddling a switch are split.
    std::vector<double> cuts = {0.0};
    for (const auto& sp : r.trajectory.switch_points) {
      if (sp.t > -r.tau) cuts.push_back(sp.t + r.tau);
    }
    cuts.push_back(r.tau);
    std::sort(cuts.begin(), cuts.end());
    Vec3 x(0.0, 1.0, 0.0);
    double cost = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double u = optimal_control_at(r, 0.5 * (cuts[i] + cuts[i + 1]));
      const int n = std::max(8, static_cast<int>((cuts[i + 1] - cuts[i]) / 1e-4));
      const double h = (cuts[i + 1] - cuts[i]) / n;
      for (int k = 0; k < n; ++k) {
        const Vec3 a = x, b = rk4_state(x, u, 0.5 * h), c = rk4_state(x, u, h);
        cost += h / 6.0 * (a[0] * a[0] + 4 * b[0] * b[0] + c[0] * c[0]);
        x = c;
      }
    }
    CHECK((x - r.seed.x.vec()).norm() < 1e-6);
    const double tail = 100.0 * fuller_cost_from_curve(r.x20_star);
    CHECK(cost + tail == Approx(r.cost).epsilon(1e-7));
  }

  SUBCASE("optimal control at the extremes") {
    CHECK(optimal_control_at(r, 0.5 * r.tau) != 0.0);
    CHECK(optimal_control_at(r, r.t_f + 1.0) == 0.0);
    CHECK(std::abs(optimal_control_at(r, r.tau + 1e-9)) == 1.0);
  }
}

TEST_CASE("shooting from a seed point takes zero time") {
  const SeedPoint s = seed_adjoint(4e-4, kParams);
  const auto r = shoot(s.x, 1e-3, kParams, kSettings);
  CHECK(r.tau == 0.0);
  CHECK(r.x20_star == 4e-4);
  CHECK(r.trajectory.arcs.size() == 1);
  CHECK(r.t_f == Approx(fuller_final_time(4e-4)).epsilon(1e-15));
  CHECK_FALSE(r.extrapolated);
}

TEST_CASE("miss distance behaves around the solution") {
  const auto& r = default_shot();
  const StateVector x0(0.0, 1.0, 0.0);
  double prev = 0.0;
  for (double f : {1.0, 1.002, 1.005, 1.01}) {
    const double m = shoot_fixed_seed(x0, r.x20_star * f, kParams, kSettings).terminal_miss;
    CHECK(m >= prev);
    prev = m;
  }
  prev = 0.0;
  for (double f : {1.0, 0.998, 0.995, 0.99}) {
    const double m = shoot_fixed_seed(x0, r.x20_star * f, kParams, kSettings).terminal_miss;
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("shooting preconditions") {
  CHECK_THROWS_AS(shoot(StateVector(0.0, 1.0, 0.0), 0.0, kParams, kSettings), PreconditionError);
  CHECK_THROWS_AS(shoot(StateVector(0.0, 1.0, 0.1), 1e-3, kParams, kSettings), PreconditionError);
}

TEST_CASE("seed grid") {
  const auto g = seed_grid(1e-4, 10, 1.0);
  REQUIRE(g.size() == 10);
  CHECK(g.front() == Approx(1e-4));
  // Ten points per period alpha^2.
  CHECK(std::pow(g[1] / g[0], 10) == Approx(kAlpha * kAlpha).epsilon(1e-12));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == Approx(g[1] / g[0]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(seed_grid(0.0, 10, 1.0), PreconditionError);
}

TEST_CASE("switching curve near the target") {
  const auto grid = seed_grid(1e-4, 24, 1.0);
  CurveOptions opts;
  const auto curve = build_switching_curve(grid, kParams, kSettings, opts);
  CHECK(curve.failures.empty());
  CHECK(curve.delta == 10.0);
  const auto upper = curve.branch(Branch::Upper);
  const auto lower = curve.branch(Branch::Lower);
  REQUIRE(upper.size() == lower.size());
  REQUIRE(!upper.empty());

  SUBCASE("quadratic coefficient") {
    const auto up = fit_curve_coefficient(curve.samples, +1, 2e-3);
    const auto dn = fit_curve_coefficient(curve.samples, -1, 2e-3);
    REQUIRE(up.has_value());
    REQUIRE(dn.has_value());
    CHECK(std::abs(*up - kXi * 10) / (kXi * 10) < 0.05);
    CHECK(std::abs(*dn + kXi * 10) / (kXi * 10) < 0.05);
    CHECK_FALSE(fit_curve_coefficient({}, +1, 1e-3).has_value());
  }

  SUBCASE("sign rule and mirror branch") {
    for (const auto& s : curve.samples) {
      CHECK(obeys_sign_rule(s));
      CHECK(s.switch_index >= 1);
    }
    for (std::size_t i = 0; i < upper.size(); ++i) {
      CHECK(lower[i].x.x1() == -upper[i].x.x1());
      CHECK(lower[i].x.x2() == -upper[i].x.x2());
      CHECK(lower[i].x.x3() == upper[i].x.x3());
      CHECK(lower[i].x20_seed == -upper[i].x20_seed);
    }
  }

  SUBCASE("deduplicated") {
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
      for (std::size_t j = i + 1; j < curve.samples.size(); ++j) {
        CHECK((curve.samples[i].x.vec() - curve.samples[j].x.vec()).norm() > 1e-8);
      }
    }
  }

  SUBCASE("thread count does not change the result") {
    CurveOptions one = opts;
    one.threads = 1;
    CurveOptions four = opts;
    four.threads = 4;
    const auto a = build_switching_curve(grid, kParams, kSettings, one);
    const auto b = build_switching_curve(grid, kParams, kSettings, four);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].x.vec() == b.samples[i].x.vec());
      CHECK(a.samples[i].x20_seed == b.samples[i].x20_seed);
    }
  }

  SUBCASE("reaches (+-1, 0, 0)") {
    double best_p = 1.0, best_m = 1.0;
    for (const auto& s : curve.samples) {
      best_p = std::min(best_p, (s.x.vec() - Vec3(1, 0, 0)).norm());
      best_m = std::min(best_m, (s.x.vec() - Vec3(-1, 0, 0)).norm());
    }
    CHECK(best_p < 1e-2);
    CHECK(best_m < 1e-2);
  }
}

TEST_CASE("curve sweep rejects bad grids") {
  const std::vector<double> bad = {1e-4, -1e-4};
  CHECK_THROWS_AS(build_switching_curve(bad, kParams, kSettings), PreconditionError);
}

TEST_CASE("mirror symmetry of the synthesis") {
  StopCriteria stop;
  stop.max_duration = 2.5;
  const auto a = backward_from_seed(seed_adjoint(5e-4, kParams), stop, kSettings, kParams);
  const auto b = backward_from_seed(seed_adjoint(-5e-4, kParams), stop, kSettings, kParams);
  REQUIRE(a.switch_points.size() == b.switch_points.size());
  for (std::size_t i = 0; i < a.switch_points.size(); ++i) {
    const auto& p = a.switch_points[i];
    const auto& q = b.switch_points[i];
    CHECK(std::abs(p.t - q.t) < 1e-10);
    CHECK(std::abs(p.x.x1() + q.x.x1()) < 1e-10);
    CHECK(std::abs(p.x.x2() + q.x.x2()) < 1e-10);
    CHECK(std::abs(p.x.x3() - q.x.x3()) < 1e-10);
    CHECK(p.u_after == -q.u_after);
  }
}

TEST_CASE("chattering asymptotics") {
  SUBCASE("analytic Fuller trajectory") {
    const auto t = fuller_trajectory({-kXi, 1.0}, 12);
    const auto times = t.switching_times();
    const auto rep = verify_chattering_asymptotics(times, t.t_f);
    CHECK(rep.passed);
    CHECK_FALSE(rep.inconclusive);
    for (double q : rep.ratios) CHECK(q == Approx(1 / kAlpha).epsilon(1e-9));
    const auto no_t = verify_chattering_asymptotics(times, std::nullopt);
    CHECK(no_t.passed);
  }
  SUBCASE("quantum extremal") {
    const auto& r = default_shot();
    const auto rep = verify_chattering_asymptotics(r.trajectory, r.seed);
    CHECK(rep.passed);
    CHECK(rep.expected == Approx(1 / kAlpha));
    CHECK(std::abs(rep.limit_estimate - 1 / kAlpha) < 0.05 / kAlpha);
  }
  SUBCASE("too few switches") {
    const std::vector<double> two = {0.1, 0.5};
    const auto rep = verify_chattering_asymptotics(two, 1.0);
    CHECK(rep.inconclusive);
    CHECK_FALSE(rep.passed);
  }
  SUBCASE("wrong ratio fails") {
    std::vector<double> t;
    double rem = 1.0;
    for (int k = 0; k < 8; ++k) {
      rem *= 0.5;
      t.push_back(1.0 - rem);
    }
    const auto rep = verify_chattering_asymptotics(t, 1.0);
    CHECK_FALSE(rep.inconclusive);
    CHECK_FALSE(rep.passed);
  }
}

TEST_CASE("innermost arc follows the nilpotent model to third order") {
  // Fuller arc ending at the seed, run backward in time, versus the
  // quantum arc. The deviation scales like x20^3.
  std::vector<double> c;
  for (double x20 : {4e-4, 2e-4, 1e-4}) {
    const SeedPoint s = seed_adjoint(x20, kParams);
    const auto r = integrate_bang_arc(s.x, s.p, s.u_incoming, Direction::Backward, kSettings,
                                      kParams);
    REQUIRE(r.event == ArcEvent::PhiZero);
    const double v = -s.u_incoming;  // Fuller control
    const FullerState f0 = nilpotent_map(s.x.x1(), s.x.x2(), kParams);
    double dev = 0.0;
    for (const auto& seg : r.arc.dense) {
      for (int k = 0; k <= 4; ++k) {
        const double t = seg.t0 + seg.h * k / 4.0;
        const auto z = seg(t);
        const double y = f0.y + v * t;
        const double x = f0.x + f0.y * t + 0.5 * v * t * t;
        const Vec3 q = nilpotent_inverse({x, y}, kParams);
        dev = std::max({dev, std::abs(z[0] - q[0]), std::abs(z[1] - q[1])});
      }
    }
    c.push_back(dev / (x20 * x20 * x20));
  }
  MESSAGE("projection deviation / x20^3: " << c[0] << ", " << c[1] << ", " << c[2]);
  const double cmax = *std::max_element(c.begin(), c.end());
  const double cmin = *std::min_element(c.begin(), c.end());
  CHECK(cmax < 1.5 * cmin);
}
