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

#include <benchmark/benchmark.h>

#include <vector>

#include "chatter/direct.hpp"
#include "chatter/fuller.hpp"
#include "chatter/integrator.hpp"
#include "chatter/synthesis.hpp"

namespace {

using namespace chatter;

void BM_BangArc(benchmark::State& state) {
  const ModelParams params;
  const IntegratorSettings settings;
  const SeedPoint seed = seed_adjoint(1e-3, params);
  for (auto _ : state) {
    auto r = integrate_bang_arc(seed.x, seed.p, seed.u_incoming, Direction::Backward,
                                settings, params);
    benchmark::DoNotOptimize(r.arc.t_end);
  }
}
BENCHMARK(BM_BangArc);

void BM_Shoot(benchmark::State& state) {
  const ModelParams params;
  const IntegratorSettings settings;
  for (auto _ : state) {
    auto r = shoot(StateVector(0.0, 1.0, 0.0), 1e-3, params, settings);
    benchmark::DoNotOptimize(r.x20_star);
  }
}
BENCHMARK(BM_Shoot)->Unit(benchmark::kMillisecond);

void BM_ObjectiveGradient(benchmark::State& state) {
  DirectProblem pr;
  pr.n_steps = static_cast<int>(state.range(0));
  std::vector<double> u(static_cast<std::size_t>(pr.n_steps));
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = (k % 3 == 0) ? 1.0 : -0.5;
  for (auto _ : state) {
    auto ev = objective_and_gradient(u, pr);
    benchmark::DoNotOptimize(ev.objective);
  }
}
BENCHMARK(BM_ObjectiveGradient)->Arg(50)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_FullerCost(benchmark::State& state) {
  const double xi = fuller_constants().xi;
  for (auto _ : state) {
    auto t = fuller_trajectory({-xi, 1.0}, 40);
    benchmark::DoNotOptimize(t.cost);
  }
}
BENCHMARK(BM_FullerCost);

}  // namespace

BENCHMARK_MAIN();
