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

#include <random>

#include "chatter/dynamics.hpp"
#include "chatter/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace chatter;
using Vec6d = Eigen::Matrix<double, 6, 1>;

namespace {
const ModelParams kParams{10.0, 1.0};
}

TEST_CASE("model parameters and checked constructors") {
  CHECK_NOTHROW(kParams.validate());
  CHECK_THROWS_AS((ModelParams{0.0, 1.0}).validate(), PreconditionError);
  CHECK_THROWS_AS((ModelParams{-2.0, 1.0}).validate(), PreconditionError);
  CHECK_THROWS_AS((ModelParams{10.0, 2.0}).validate(), PreconditionError);

  CHECK_NOTHROW(StateVector::checked(Vec3(0.6, 0.8, 0.0)));
  CHECK_THROWS_AS(StateVector::checked(Vec3(0.6, 0.8, 1e-4)), PreconditionError);
  CHECK(StateVector::checked(Vec3(0.6, 0.8, 1e-6), 1e-11 + 1e-12).sphere_defect() < 2e-12);
  CHECK(StateVector::normalized(Vec3(3.0, 0.0, 4.0)).x1() == doctest::Approx(0.6));

  CHECK_NOTHROW(Control::checked(1.0, kParams));
  CHECK_THROWS_AS(Control::checked(1.0001, kParams), PreconditionError);
  CHECK(Control::bang(-3).value == -1.0);
  CHECK(Control::bang(2).value == 1.0);
}

TEST_CASE("dynamics_rhs examples") {
  const Vec3 a = dynamics_rhs(StateVector(0, 0, 1), Control{0.0}, kParams);
  CHECK(a.norm() == 0.0);
  const Vec3 b = dynamics_rhs(StateVector(0, 1, 0), Control{1.0}, kParams);
  CHECK(b[0] == -10.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 1.0);
}

TEST_CASE("dynamics_rhs is tangent to the sphere") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uu(-1.0, 1.0), dd(0.1, 30.0);
  for (int i = 0; i < 500; ++i) {
    const StateVector x(oracle::random_unit(rng));
    const ModelParams p{dd(rng), 1.0};
    CHECK(std::abs(x.vec().dot(dynamics_rhs(x, Control{uu(rng)}, p))) < 1e-13 * p.delta);
  }
}

TEST_CASE("adjoint_rhs examples and gradient of H") {
  for (double u : {1.0, -1.0}) {
    CHECK(adjoint_rhs(StateVector(0, 0, 1), AdjointVector(), Control{u}, kParams).norm() == 0.0);
  }
  const Vec3 s = adjoint_rhs(StateVector(1, 0, 0), AdjointVector(), Control{0.0}, kParams);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.0);

  // dP/dt = -dH/dX by central differences.
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = oracle::random_unit(rng);
    const AdjointVector p(oracle::random_unit(rng));
    const Control u{i % 2 ? 0.7 : -1.0};
    const Vec3 rhs = adjoint_rhs(StateVector(x), p, u, kParams);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      Vec3 a = x, b = x;
      a[j] += h;
      b[j] -= h;
      const double g = (pontryagin_hamiltonian(StateVector(a), p, u, kParams) -
                        pontryagin_hamiltonian(StateVector(b), p, u, kParams)) /
                       (2 * h);
      CHECK(rhs[j] == doctest::Approx(-g).epsilon(1e-7).scale(10.0));
    }
  }
}

TEST_CASE("Hamiltonian examples") {
  for (double p3 : {-2.0, 0.0, 5.0}) {
    CHECK(pontryagin_hamiltonian(StateVector(0, 0, 1), AdjointVector(0, 0, p3), Control{0.0},
                                 kParams) == 0.0);
  }
  // Written out: delta (p2 x1 - p1 x2) + u (p3 x2 - p2 x3) + p0 x1^2.
  const StateVector x(0.36, 0.48, 0.8);
  const AdjointVector p(0.3, -1.1, 0.25);
  const double u = -0.4, d = 10.0;
  const double expect = d * (-1.1 * 0.36 - 0.3 * 0.48) + u * (0.25 * 0.48 + 1.1 * 0.8) -
                        0.5 * 0.36 * 0.36;
  CHECK(pontryagin_hamiltonian(x, p, Control{u}, kParams) == doctest::Approx(expect));
  CHECK(pontryagin_hamiltonian(x, p, Control{u}, kParams, 0.0) ==
        doctest::Approx(expect + 0.5 * 0.36 * 0.36));

  // On Phi = 0 the value does not depend on u.
  const AdjointVector q(0.3, 0.48 * 2.0, 0.8 * 2.0);
  REQUIRE(std::abs(switching_fn(x, q)) < 1e-15);
  CHECK(pontryagin_hamiltonian(x, q, Control{1.0}, kParams) ==
        doctest::Approx(pontryagin_hamiltonian(x, q, Control{-1.0}, kParams)));
}

TEST_CASE("switching function examples") {
  CHECK(switching_fn(StateVector(0, 0, 1), AdjointVector(0, 1, 0)) == -1.0);
  for (double u : {1.0, -1.0}) {
    const auto d = switching_derivatives(StateVector::target(), AdjointVector(), Control{u}, kParams);
    CHECK(d.phi == 0.0);
    CHECK(d.d1 == 0.0);
    CHECK(d.d2 == 0.0);
    CHECK(d.d3 == 0.0);
    CHECK(d.d4 == doctest::Approx(-u * 100.0).epsilon(1e-12));
  }
}

TEST_CASE("switching derivatives match finite differences of the flow") {
  // Oracle: RK4 with 200 substeps to t = +-h, +-2h, then a 5-point stencil
  // on each closed-form derivative to obtain the next one.
  std::mt19937_64 rng(3);
  const double h = 2e-3;
  for (int trial = 0; trial < 12; ++trial) {
    const double delta = trial < 6 ? 10.0 : 3.5;
    const ModelParams params{delta, 1.0};
    const double u = trial % 2 ? 1.0 : -1.0;
    Vec6d z0;
    z0.head<3>() = oracle::random_unit(rng);
    z0.tail<3>() = oracle::random_unit(rng);
    const std::function<Vec6d(const Vec6d&)> f = [&](const Vec6d& z) {
      return oracle::extremal_field(z, u, delta);
    };
    std::array<SwitchingDerivatives, 5> d;
    for (int k = -2; k <= 2; ++k) {
      const Vec6d z = k == 0 ? z0 : oracle::rk4<Vec6d>(f, z0, k * h, 200);
      d[k + 2] = switching_derivatives(StateVector(z.head<3>()), AdjointVector(z.tail<3>()),
                                       Control{u}, params);
    }
    auto fd = [&](auto get) {
      return (get(d[0]) - 8 * get(d[1]) + 8 * get(d[3]) - get(d[4])) / (12 * h);
    };
    const auto& c = d[2];
    const double s1 = delta, s2 = delta * delta, s3 = s2 * delta, s4 = s3 * delta;
    CHECK(std::abs(fd([](auto& s) { return s.phi; }) - c.d1) < 1e-6 * std::max(std::abs(c.d1), 1e-2 * s1));
    CHECK(std::abs(fd([](auto& s) { return s.d1; }) - c.d2) < 1e-6 * std::max(std::abs(c.d2), 1e-2 * s2));
    CHECK(std::abs(fd([](auto& s) { return s.d2; }) - c.d3) < 1e-6 * std::max(std::abs(c.d3), 1e-2 * s3));
    CHECK(std::abs(fd([](auto& s) { return s.d3; }) - c.d4) < 1e-6 * std::max(std::abs(c.d4), 1e-2 * s4));
  }
}

TEST_CASE("gauge component grows like the running cost") {
  // d(P.X)/dt = x1^2 along the normal flow.
  std::mt19937_64 rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const double u = trial % 2 ? 1.0 : -1.0;
    Vec6d z0;
    z0.head<3>() = oracle::random_unit(rng);
    z0.tail<3>() = oracle::random_unit(rng);
    const std::function<Vec6d(const Vec6d&)> f = [&](const Vec6d& z) {
      return oracle::extremal_field(z, u, 10.0);
    };
    const Vec6d a = oracle::rk4<Vec6d>(f, z0, h, 4), b = oracle::rk4<Vec6d>(f, z0, -h, 4);
    const auto gauge = [](const Vec6d& z) { return z.head<3>().dot(z.tail<3>()); };
    const double rate = (gauge(a) - gauge(b)) / (2 * h);
    CHECK(rate == doctest::Approx(z0[0] * z0[0]).epsilon(1e-6).scale(1e-2));

    const StateVector x(z0.head<3>());
    const AdjointVector p(z0.tail<3>());
    CHECK(std::abs(p.reduced(x).gauge(x)) < 1e-15);
    CHECK(switching_fn(x, p.reduced(x)) == doctest::Approx(switching_fn(x, p)));
  }
}

TEST_CASE("six-dimensional field is a block-diagonal rotation generator") {
  for (double u : {1.0, -1.0, 0.3}) {
    Eigen::Matrix<double, 6, 6> j;
    for (int c = 0; c < 6; ++c) {
      FullQuantumState e;
      e.x[c] = 1.0;
      j.col(c) = full_schrodinger_rhs(e, Control{u}, kParams);
    }
    CHECK((j + j.transpose()).norm() == 0.0);
    CHECK(j.block<3, 3>(0, 3).norm() == 0.0);
    CHECK(j.block<3, 3>(3, 0).norm() == 0.0);
    Eigen::Matrix3d top;
    top << 0, -10, 0, 10, 0, -u, 0, u, 0;
    CHECK((j.block<3, 3>(0, 0) - top).norm() == 0.0);
  }
}

TEST_CASE("six-dimensional propagation projects onto the reduced model") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 x0 = oracle::random_unit(rng);
    const double u = trial % 2 ? 1.0 : -1.0;
    const std::function<Vec6d(const Vec6d&)> f6 = [&](const Vec6d& y) {
      return full_schrodinger_rhs(FullQuantumState{y}, Control{u}, kParams);
    };
    const std::function<Vec3(const Vec3&)> f3 = [&](const Vec3& y) {
      return dynamics_rhs(StateVector(y), Control{u}, kParams);
    };
    const Vec6d y6 = oracle::rk4<Vec6d>(f6, FullQuantumState::embed(StateVector(x0)).x, 1.0, 4000);
    const Vec3 y3 = oracle::rk4<Vec3>(f3, x0, 1.0, 4000);
    CHECK((y6.head<3>() - y3).norm() < 1e-10);
    CHECK(y6.tail<3>().norm() < 1e-10);
    CHECK(std::abs(y6.squaredNorm() - 1.0) < 1e-10);
  }
}
