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

#include "chatter/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "chatter/errors.hpp"
#include "json.hpp"

namespace chatter {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string fuller_trajectory_csv(const FullerTrajectory& traj,
                                  int samples_per_arc) {
  std::ostringstream os;
  os << "t,x,y,u\n";
  const int n = std::max(1, samples_per_arc);
  for (const auto& a : traj.arcs) {
    for (int i = 0; i <= n; ++i) {
      const double t = a.t_start + (a.t_end - a.t_start) * i / n;
      const FullerState s = a.state_at(t);
      os << format_double(t) << ',' << format_double(s.x) << ','
         << format_double(s.y) << ',' << a.u << '\n';
    }
  }
  return os.str();
}

std::string fuller_constants_json(const FullerTrajectory& traj) {
  const auto& k = fuller_constants();
  json j;
  j["xi"] = k.xi;
  j["alpha"] = k.alpha;
  j["quartic_residual"] = k.quartic_residual();
  j["t_f"] = traj.t_f;
  j["cost"] = traj.cost;
  j["y0"] = traj.arcs.empty() ? 0.0 : traj.arcs.front().start.y;
  return j.dump(2) + "\n";
}

namespace {

struct TrajRow {
  double t;
  ExtremalSample s;
  double u;
  bool event;
};

void write_row(std::ostringstream& os, const TrajRow& r) {
  const auto& x = r.s.x;
  const auto& p = r.s.p;
  os << format_double(r.t) << ',' << format_double(x.x1()) << ','
     << format_double(x.x2()) << ',' << format_double(x.x3()) << ','
     << format_double(p.p1()) << ',' << format_double(p.p2()) << ','
     << format_double(p.p3()) << ',' << format_double(r.u) << ','
     << format_double(switching_fn(x, p)) << ',' << (r.event ? 1 : 0) << '\n';
}

}  // namespace

std::string trajectory_csv(const ExtremalTrajectory& traj, double t_lo,
                           double t_hi, double time_shift) {
  std::vector<TrajRow> rows;
  for (const auto& a : traj.arcs) {
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      const auto& s = a.samples[i];
      if (s.t < t_lo || s.t > t_hi) continue;
      // Arc endpoints shared with the neighbouring arc are written once,
      // by the arc that starts there in forward time.
      rows.push_back({s.t + time_shift, s, a.u, false});
    }
  }
  for (const auto& sp : traj.switch_points) {
    if (sp.t < t_lo || sp.t > t_hi) continue;
    rows.push_back({sp.t + time_shift, {sp.t, sp.x, sp.p, 0.0}, sp.u_after, true});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TrajRow& a, const TrajRow& b) { return a.t < b.t; });
  std::ostringstream os;
  os << "t,x1,x2,x3,p1,p2,p3,u,phi,event\n";
  for (const auto& r : rows) write_row(os, r);
  return os.str();
}

std::string trajectory_csv(const ExtremalTrajectory& traj) {
  return trajectory_csv(traj, -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), 0.0);
}

std::string trajectory_csv(const ShootingResult& result) {
  return trajectory_csv(result.trajectory, -result.tau, 0.0, result.tau);
}

std::string shooting_json(const ShootingResult& r) {
  json j;
  j["x20_star"] = r.x20_star;
  j["tau"] = r.tau;
  j["t_f"] = r.t_f;
  j["terminal_miss"] = r.terminal_miss;
  j["cost"] = r.cost;
  j["n_switchings"] = r.n_switchings;
  return j.dump(2) + "\n";
}

std::string switching_curve_csv(const SwitchingCurve& curve) {
  std::ostringstream os;
  os << "branch,x20_seed,switch_index,x1,x2,x3\n";
  for (const auto& s : curve.samples) {
    os << to_string(s.branch) << ',' << format_double(s.x20_seed) << ','
       << s.switch_index << ',' << format_double(s.x.x1()) << ','
       << format_double(s.x.x2()) << ',' << format_double(s.x.x3()) << '\n';
  }
  return os.str();
}

std::string direct_study_csv(std::span<const DirectSolution> solutions) {
  std::ostringstream os;
  os << "N,mu,cost,terminal_distance,iterations,converged\n";
  for (const auto& s : solutions) {
    os << s.n_steps << ',' << format_double(s.mu) << ','
       << format_double(s.cost_running) << ','
       << format_double(s.terminal_distance) << ',' << s.iterations << ','
       << (s.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string control_csv(const DirectSolution& solution, double t_f) {
  std::ostringstream os;
  os << "k,t_k,u_k\n";
  const double h = t_f / static_cast<double>(solution.controls.size());
  for (std::size_t k = 0; k < solution.controls.size(); ++k) {
    os << k << ',' << format_double(h * static_cast<double>(k)) << ','
       << format_double(solution.controls[k]) << '\n';
  }
  return os.str();
}

std::string comparison_csv(const ComparisonReport& report) {
  std::ostringstream os;
  os << "N,mu,cost,terminal_distance,reference_cost,cost_gap\n";
  for (const auto& r : report.rows) {
    os << r.n_steps << ',' << format_double(r.mu) << ','
       << format_double(r.cost) << ',' << format_double(r.terminal_distance)
       << ',' << format_double(r.reference_cost) << ','
       << format_double(r.cost_gap) << '\n';
  }
  return os.str();
}

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)),
      x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void SvgPlot::add_line(std::vector<std::pair<double, double>> points,
                       std::string color, double width, bool dashed) {
  series_.push_back({std::move(points), std::move(color), width, dashed, false});
}

void SvgPlot::add_points(std::vector<std::pair<double, double>> points,
                         std::string color, double radius) {
  series_.push_back({std::move(points), std::move(color), radius, false, true});
}

namespace {

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string SvgPlot::render(int width, int height) const {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series_) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  if (xmax - xmin <= 0.0) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin <= 0.0) ymin -= 0.5, ymax += 0.5;
  const double padx = 0.05 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
  xmin -= padx, xmax += padx, ymin -= pady, ymax += pady;

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double pw = width - left - right, ph = height - top - bottom;
  double sx = pw / (xmax - xmin), sy = ph / (ymax - ymin);
  if (equal_aspect_) {
    const double s = std::min(sx, sy);
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    sx = sy = s;
    xmin = cx - 0.5 * pw / s;
    xmax = cx + 0.5 * pw / s;
    ymin = cy - 0.5 * ph / s;
    ymax = cy + 0.5 * ph / s;
  }
  const auto px = [&](double x) { return left + (x - xmin) * sx; };
  const auto py = [&](double y) { return top + ph - (y - ymin) * sy; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"15\">"
     << escape_xml(title_) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << fmt_coord(px(xv)) << "\" y=\"" << top + ph + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt_tick(xv) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << fmt_coord(py(yv) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << fmt_tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\">"
     << escape_xml(x_label_) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"13\" transform=\"rotate(-90 16 "
     << top + ph / 2 << ")\">" << escape_xml(y_label_) << "</text>\n";

  os << "<g clip-path=\"none\">\n";
  for (const auto& s : series_) {
    if (s.markers) {
      for (const auto& [x, y] : s.points) {
        os << "<circle cx=\"" << fmt_coord(px(x)) << "\" cy=\""
           << fmt_coord(py(y)) << "\" r=\"" << s.width << "\" fill=\""
           << s.color << "\"/>\n";
      }
      continue;
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"" << s.width << "\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (const auto& [x, y] : s.points) {
      os << fmt_coord(px(x)) << ',' << fmt_coord(py(y)) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

// --- configuration --------------------------------------------------------

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  try {
    model().validate();
    integrator.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (x20 && (*x20 == 0.0 || !std::isfinite(*x20))) {
    throw ConfigError("x20 must be non-zero");
  }
  if (std::abs(x_init.squaredNorm() - 1.0) > 1e-9) {
    throw ConfigError("x_init must lie on the unit sphere");
  }
  if (!(precision > 0.0)) throw ConfigError("precision must be positive");
  if (!(direct.t_f > 0.0) || !(direct.mu >= 0.0) || direct.n_steps.empty() ||
      direct.max_iterations < 1 || !(direct.tolerance > 0.0)) {
    throw ConfigError("direct: invalid settings");
  }
  for (int n : direct.n_steps) {
    if (n < 2) throw ConfigError("direct.n_steps entries must be >= 2");
  }
  if (direct.init != "zero" && direct.init != "pmp") {
    throw ConfigError("direct.init must be \"zero\" or \"pmp\"");
  }
  if (curve.deltas.empty() || !(curve.x20_min > 0.0) ||
      curve.points_per_period < 1 || !(curve.periods > 0.0)) {
    throw ConfigError("curve: invalid settings");
  }
  for (double d : curve.deltas) {
    if (!(d > 0.0)) throw ConfigError("curve.deltas entries must be positive");
  }
  if (!(fuller.y0 > 0.0) || fuller.n_arcs < 1) {
    throw ConfigError("fuller: y0 must be positive and n_arcs >= 1");
  }
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

ModelParams RunConfig::model() const {
  ModelParams p;
  p.delta = delta;
  return p;
}

RunConfig parse_run_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  reject_unknown(j,
                 {"delta", "x20", "x_init", "precision", "integrator", "direct",
                  "curve", "fuller", "out_dir"},
                 "config");
  read(j, "delta", c.delta, "config");
  if (j.contains("x20")) {
    const auto& v = j.at("x20");
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) {
      c.x20.reset();
    } else if (v.is_number()) {
      c.x20 = v.get<double>();
    } else {
      throw ConfigError("config.x20: expected a number or \"auto\"");
    }
  }
  if (j.contains("x_init")) {
    std::vector<double> v;
    read(j, "x_init", v, "config");
    if (v.size() != 3) throw ConfigError("config.x_init: expected 3 numbers");
    c.x_init = Vec3(v[0], v[1], v[2]);
  }
  read(j, "precision", c.precision, "config");
  read(j, "out_dir", c.out_dir, "config");

  if (j.contains("integrator")) {
    const auto& s = j.at("integrator");
    reject_unknown(s,
                   {"rel_tol", "abs_tol", "max_step", "initial_step",
                    "event_tol_phi", "event_tol_time", "max_switchings",
                    "norm_tol", "hamiltonian_tol"},
                   "integrator");
    auto& g = c.integrator;
    read(s, "rel_tol", g.rel_tol, "integrator");
    read(s, "abs_tol", g.abs_tol, "integrator");
    read(s, "max_step", g.max_step, "integrator");
    read(s, "initial_step", g.initial_step, "integrator");
    read(s, "event_tol_phi", g.event_tol_phi, "integrator");
    read(s, "event_tol_time", g.event_tol_time, "integrator");
    read(s, "max_switchings", g.max_switchings, "integrator");
    read(s, "norm_tol", g.norm_tol, "integrator");
    read(s, "hamiltonian_tol", g.hamiltonian_tol, "integrator");
  }
  if (j.contains("direct")) {
    const auto& s = j.at("direct");
    reject_unknown(s, {"t_f", "n_steps", "mu", "max_iterations", "tolerance", "init"},
                   "direct");
    read(s, "t_f", c.direct.t_f, "direct");
    read(s, "n_steps", c.direct.n_steps, "direct");
    read(s, "mu", c.direct.mu, "direct");
    read(s, "max_iterations", c.direct.max_iterations, "direct");
    read(s, "tolerance", c.direct.tolerance, "direct");
    read(s, "init", c.direct.init, "direct");
  }
  if (j.contains("curve")) {
    const auto& s = j.at("curve");
    reject_unknown(s, {"deltas", "x20_min", "points_per_period", "periods", "min_x3"},
                   "curve");
    read(s, "deltas", c.curve.deltas, "curve");
    read(s, "x20_min", c.curve.x20_min, "curve");
    read(s, "points_per_period", c.curve.points_per_period, "curve");
    read(s, "periods", c.curve.periods, "curve");
    read(s, "min_x3", c.curve.min_x3, "curve");
  }
  if (j.contains("fuller")) {
    const auto& s = j.at("fuller");
    reject_unknown(s, {"y0", "n_arcs"}, "fuller");
    read(s, "y0", c.fuller.y0, "fuller");
    read(s, "n_arcs", c.fuller.n_arcs, "fuller");
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string run_config_json(const RunConfig& c) {
  json j;
  j["delta"] = c.delta;
  j["x20"] = c.x20 ? json(*c.x20) : json("auto");
  j["x_init"] = {c.x_init[0], c.x_init[1], c.x_init[2]};
  j["precision"] = c.precision;
  j["out_dir"] = c.out_dir;
  const auto& g = c.integrator;
  j["integrator"] = {{"rel_tol", g.rel_tol},
                     {"abs_tol", g.abs_tol},
                     {"max_step", g.max_step},
                     {"initial_step", g.initial_step},
                     {"event_tol_phi", g.event_tol_phi},
                     {"event_tol_time", g.event_tol_time},
                     {"max_switchings", g.max_switchings},
                     {"norm_tol", g.norm_tol},
                     {"hamiltonian_tol", g.hamiltonian_tol}};
  j["direct"] = {{"t_f", c.direct.t_f},
                 {"n_steps", c.direct.n_steps},
                 {"mu", c.direct.mu},
                 {"max_iterations", c.direct.max_iterations},
                 {"tolerance", c.direct.tolerance},
                 {"init", c.direct.init}};
  j["curve"] = {{"deltas", c.curve.deltas},
                {"x20_min", c.curve.x20_min},
                {"points_per_period", c.curve.points_per_period},
                {"periods", c.curve.periods},
                {"min_x3", c.curve.min_x3}};
  j["fuller"] = {{"y0", c.fuller.y0}, {"n_arcs", c.fuller.n_arcs}};
  return j.dump(2) + "\n";
}

}  // namespace chatter
