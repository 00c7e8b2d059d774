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

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "chatter/errors.hpp"
#include "chatter/io.hpp"
#include "doctest.h"

using namespace chatter;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::size_t count_fields(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

const ShootingResult& default_shot() {
  static const ShootingResult r =
      shoot(StateVector(0.0, 1.0, 0.0), 1e-3, ModelParams{}, IntegratorSettings{});
  return r;
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.9e-4, 1e308}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("fuller outputs") {
  const auto& k = fuller_constants();
  const auto traj = fuller_trajectory({fuller_switching_curve(1.0), 1.0}, 5);
  const auto csv = lines(fuller_trajectory_csv(traj, 8));
  REQUIRE(csv.size() > 1);
  CHECK(csv.front() == "t,x,y,u");
  for (std::size_t i = 1; i < csv.size(); ++i) CHECK(count_fields(csv[i]) == 4);

  const json j = json::parse(fuller_constants_json(traj));
  CHECK(j.at("xi").get<double>() == k.xi);
  CHECK(j.at("alpha").get<double>() == k.alpha);
  CHECK(std::abs(j.at("quartic_residual").get<double>()) < 1e-12);
  CHECK(j.at("y0").get<double>() == 1.0);
}

TEST_CASE("trajectory and shooting outputs") {
  const auto& r = default_shot();
  const auto csv = lines(trajectory_csv(r));
  REQUIRE(csv.size() > 2);
  CHECK(csv.front() == "t,x1,x2,x3,p1,p2,p3,u,phi,event");
  double prev = -1.0;
  int events = 0;
  for (std::size_t i = 1; i < csv.size(); ++i) {
    REQUIRE(count_fields(csv[i]) == 10);
    const double t = std::stod(csv[i].substr(0, csv[i].find(',')));
    CHECK(t >= prev);
    CHECK(t >= -1e-12);
    CHECK(t <= r.tau + 1e-12);
    prev = t;
    if (csv[i].back() == '1') ++events;
  }
  // n_switchings also counts the seed, which ends the written path.
  CHECK(events + 1 == r.n_switchings);

  const json j = json::parse(shooting_json(r));
  for (const char* key : {"x20_star", "tau", "t_f", "terminal_miss", "cost", "n_switchings"}) {
    CHECK(j.contains(key));
  }
  CHECK(j.size() == 6);
  CHECK(j.at("x20_star").get<double>() == r.x20_star);
}

TEST_CASE("switching curve output") {
  const auto grid = seed_grid(2e-4, 4, 1.0);
  CurveOptions opt;
  opt.threads = 1;
  const auto curve = build_switching_curve(grid, ModelParams{}, IntegratorSettings{}, opt);
  const auto csv = lines(switching_curve_csv(curve));
  CHECK(csv.front() == "branch,x20_seed,switch_index,x1,x2,x3");
  CHECK(csv.size() == curve.samples.size() + 1);
  for (std::size_t i = 1; i < csv.size(); ++i) {
    CHECK(count_fields(csv[i]) == 6);
    CHECK((csv[i].rfind("upper,", 0) == 0 || csv[i].rfind("lower,", 0) == 0));
  }
}

TEST_CASE("direct outputs") {
  DirectProblem p;
  p.n_steps = 10;
  DirectOptions o;
  o.max_iterations = 5;
  const std::vector<DirectSolution> sols = {solve_direct(p, o)};
  auto study = lines(direct_study_csv(sols));
  REQUIRE(study.size() == 2);
  CHECK(study[0] == "N,mu,cost,terminal_distance,iterations,converged");
  CHECK(study[1].rfind("10,1000,", 0) == 0);

  auto ctl = lines(control_csv(sols[0], p.t_f));
  REQUIRE(ctl.size() == 11);
  CHECK(ctl[0] == "k,t_k,u_k");
  CHECK(ctl[1].rfind("0,0,", 0) == 0);

  const auto rep = compare_to_pmp(sols, default_shot());
  auto cmp = lines(comparison_csv(rep));
  REQUIRE(cmp.size() == 2);
  CHECK(cmp[0] == "N,mu,cost,terminal_distance,reference_cost,cost_gap");
  CHECK(count_fields(cmp[1]) == 6);
}

TEST_CASE("svg plot") {
  SvgPlot plot("title & <name>", "x", "y");
  plot.add_line({{0, 0}, {1, 2}, {2, 1}}, "black");
  plot.add_points({{0.5, 0.5}}, "red");
  const std::string s = plot.render();
  CHECK(s.find("<svg") != std::string::npos);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("<polyline") != std::string::npos);
  CHECK(s.find("<circle") != std::string::npos);
  CHECK(s.find("<name>") == std::string::npos);
  CHECK(s == plot.render());

  SvgPlot empty("e", "x", "y");
  CHECK_NOTHROW(empty.render());
}

TEST_CASE("run config parsing") {
  const RunConfig d = parse_run_config("{}");
  CHECK(d.delta == 10.0);
  CHECK_FALSE(d.x20.has_value());
  CHECK(d.precision == 1e-3);
  CHECK(d.x_init == Vec3(0, 1, 0));

  const RunConfig c = parse_run_config(
      R"({"delta": 6, "x20": 5e-4, "direct": {"n_steps": [20, 40], "init": "pmp"},
          "curve": {"deltas": [6]}, "out_dir": "o"})");
  CHECK(c.delta == 6.0);
  CHECK(c.x20 == 5e-4);
  CHECK(c.direct.n_steps == std::vector<int>{20, 40});
  CHECK(c.direct.init == "pmp");
  CHECK(c.out_dir == "o");
  CHECK(parse_run_config(R"({"x20": "auto"})").x20 == std::nullopt);
  CHECK(parse_run_config(R"({"x20": null})").x20 == std::nullopt);

  const char* bad[] = {
      "{",
      "[]",
      R"({"unknown": 1})",
      R"({"integrator": {"rtol": 1e-9}})",
      R"({"direct": {"extra": 0}})",
      R"({"delta": "ten"})",
      R"({"delta": -1})",
      R"({"x20": "sometimes"})",
      R"({"x20": 0})",
      R"({"x_init": [1, 1, 1]})",
      R"({"x_init": [0, 1]})",
      R"({"precision": 0})",
      R"({"direct": {"init": "random"}})",
      R"({"direct": {"n_steps": [1]}})",
      R"({"curve": {"deltas": []}})",
      R"({"integrator": {"rel_tol": -1}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_run_config(text), ConfigError);
  }
}

TEST_CASE("run config round trip") {
  RunConfig c = parse_run_config(R"({"delta": 14, "x20": 3e-4, "fuller": {"n_arcs": 7}})");
  const RunConfig back = parse_run_config(run_config_json(c));
  CHECK(run_config_json(back) == run_config_json(c));
  CHECK(back.delta == 14.0);
  CHECK(back.x20 == 3e-4);
  CHECK(back.fuller.n_arcs == 7);
  CHECK(back.integrator.rel_tol == c.integrator.rel_tol);
}
