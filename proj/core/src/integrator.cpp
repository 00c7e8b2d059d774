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

#include "chatter/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chatter/errors.hpp"

namespace chatter {
namespace {

double flow_phi(const FlowState& z) { return z[5] * z[1] - z[4] * z[2]; }

double flow_phi_dot(const FlowState& z, const ModelParams& params) {
  return params.delta * (z[0] * z[5] - z[2] * z[3]);
}

double reduced_costate_norm(const FlowState& z) {
  const Vec3 x = z.head<3>();
  const Vec3 p = z.segment<3>(3);
  return (p - p.dot(x) / x.squaredNorm() * x).norm();
}

struct ErrorScale {
  double rel_tol;
  double abs_tol;

  double operator()(const FlowState& y0, const FlowState& y1,
                    const FlowState& err) const {
    const double sx = abs_tol + rel_tol * std::max(y0.head<3>().norm(),
                                                   y1.head<3>().norm());
    const double pn = std::max(y0.segment<3>(3).norm(), y1.segment<3>(3).norm());
    const double sp = rel_tol * pn + std::numeric_limits<double>::min();
    const double sc =
        abs_tol + rel_tol * std::max(std::abs(y0[6]), std::abs(y1[6]));
    double e = err.head<3>().norm() / sx;
    e = std::max(e, err.segment<3>(3).norm() / sp);
    e = std::max(e, std::abs(err[6]) / sc);
    return e;
  }
};

void renormalize(FlowState& z) { z.head<3>() /= z.head<3>().norm(); }

double step_growth(double err) {
  if (err <= 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

}  // namespace

void IntegratorSettings::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) ||
      !(initial_step > 0.0) || !(min_step > 0.0) || !(event_tol_phi > 0.0) ||
      !(event_tol_time > 0.0) || !(norm_tol > 0.0) ||
      !(hamiltonian_tol > 0.0)) {
    throw PreconditionError("IntegratorSettings: tolerances must be positive");
  }
  if (max_switchings < 1) {
    throw PreconditionError("IntegratorSettings: max_switchings must be >= 1");
  }
}

std::string_view to_string(ArcEvent e) {
  switch (e) {
    case ArcEvent::PhiZero: return "phi-zero";
    case ArcEvent::MaxTime: return "max-time";
    case ArcEvent::TargetReached: return "target-reached";
    case ArcEvent::StopRequested: return "stop-requested";
    case ArcEvent::Degenerate: return "degenerate-arc";
  }
  return "unknown";
}

FlowState extremal_flow_rhs(const FlowState& z, double u,
                            const ModelParams& params, Direction dir) {
  const double d = params.delta;
  FlowState r;
  r[0] = -d * z[1];
  r[1] = d * z[0] - u * z[2];
  r[2] = u * z[1];
  r[3] = -d * z[4] + z[0];
  r[4] = d * z[3] - u * z[5];
  r[5] = u * z[4];
  r[6] = direction_sign(dir) * z[0] * z[0];
  return r;
}

ExtremalSample to_sample(double t, const FlowState& z) {
  return {t, StateVector(Vec3(z.head<3>())), AdjointVector(Vec3(z.segment<3>(3))),
          z[6]};
}

FlowState to_flow_state(const StateVector& x, const AdjointVector& p,
                        double cost) {
  FlowState z;
  z << x.vec(), p.vec(), cost;
  return z;
}

bool BangArc::contains(double t) const {
  const double lo = std::min(t_start, t_end);
  const double hi = std::max(t_start, t_end);
  return t >= lo && t <= hi;
}

ExtremalSample BangArc::at(double t) const {
  if (dense.empty()) return samples.front();
  const bool forward = t_end >= t_start;
  // First segment whose far end reaches t.
  auto it = std::lower_bound(
      dense.begin(), dense.end(), t,
      [forward](const DenseSegment<FlowState>& seg, double tt) {
        return forward ? seg.t1() < tt : seg.t1() > tt;
      });
  if (it == dense.end()) it = std::prev(dense.end());
  return to_sample(t, (*it)(t));
}

ArcResult integrate_bang_arc(const StateVector& x0, const AdjointVector& p0,
                             double u, Direction dir,
                             const IntegratorSettings& settings,
                             const ModelParams& params,
                             const StopCriteria& stop, double t0,
                             double cost0) {
  settings.validate();
  params.validate();
  if (!x0.vec().allFinite() || !p0.vec().allFinite()) {
    throw PreconditionError("integrate_bang_arc: non-finite initial state");
  }
  if (std::abs(x0.vec().squaredNorm() - 1.0) > settings.norm_tol) {
    throw PreconditionError("integrate_bang_arc: X0 is not on the sphere");
  }

  const double sign = direction_sign(dir);
  const auto rhs = [&](double, const FlowState& z) {
    return extremal_flow_rhs(z, u, params, dir);
  };
  const auto g = [u](const FlowState& z) { return u * flow_phi(z); };
  const ErrorScale error_scale{settings.rel_tol, settings.abs_tol};

  ArcResult out;
  BangArc& arc = out.arc;
  arc.u = u;
  arc.t_start = t0;
  arc.t_end = t0;

  FlowState z = to_flow_state(x0, p0, cost0);
  FlowState f = rhs(t0, z);
  double t = t0;
  arc.samples.push_back(to_sample(t, z));

  const double scale0 = reduced_costate_norm(z);
  const double g0 = g(z);
  if (scale0 > 0.0 && g0 < -settings.event_tol_phi * scale0) {
    throw PreconditionError(
        "integrate_bang_arc: control sign inconsistent with the switching "
        "function");
  }
  bool armed = g0 > 0.0;
  double h = sign * std::min(settings.initial_step, settings.max_step);
  long steps = 0;

  while (true) {
    const double elapsed = std::abs(t - t0);
    const double remaining = stop.max_duration - elapsed;
    if (remaining <= 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(t))) {
      out.event = ArcEvent::MaxTime;
      break;
    }
    if (std::abs(h) > remaining) h = sign * remaining;
    if (++steps > settings.max_steps_per_arc) {
      throw NumericalError("integrate_bang_arc: step budget exhausted");
    }

    const auto step = dopri5_step(rhs, t, z, f, h);
    if (!step.y.allFinite()) {
      throw NumericalError("integrate_bang_arc: non-finite state");
    }
    const double err = error_scale(z, step.y, step.err);
    if (!(err <= 1.0)) {
      h *= std::isfinite(err) ? step_growth(err) : 0.2;
      if (std::abs(h) < settings.min_step) {
        std::ostringstream os;
        os << "integrate_bang_arc: step size underflow at t = " << t;
        throw NumericalError(os.str());
      }
      continue;
    }

    // Scan the accepted step for the first sign change of u * Phi.
    constexpr std::array<double, 4> kProbe = {0.25, 0.5, 0.75, 1.0};
    double prev_t = t;
    double bracket_lo = t, bracket_hi = t;
    bool crossed = false;
    double max_abs_g = std::abs(g(z));
    for (double s : kProbe) {
      const double tp = t + s * h;
      const double gp = s == 1.0 ? g(step.y) : g(step.dense(tp));
      max_abs_g = std::max(max_abs_g, std::abs(gp));
      if (gp < 0.0) {
        crossed = true;
        bracket_lo = prev_t;
        bracket_hi = tp;
        break;
      }
      if (gp > 0.0) armed = true;
      prev_t = tp;
    }

    const double scale = reduced_costate_norm(step.y);
    if (crossed) {
      if (!armed) {
        throw PreconditionError(
            "integrate_bang_arc: switching function leaves with the wrong "
            "sign");
      }
      // Bisection on the interpolant.
      while (std::abs(bracket_hi - bracket_lo) > settings.event_tol_time) {
        const double mid = 0.5 * (bracket_lo + bracket_hi);
        if (g(step.dense(mid)) >= 0.0) {
          bracket_lo = mid;
        } else {
          bracket_hi = mid;
        }
      }
      // Newton polish on the true step map.
      double te = 0.5 * (bracket_lo + bracket_hi);
      auto st = dopri5_step(rhs, t, z, f, te - t);
      for (int it = 0; it < 12; ++it) {
        const double phi = flow_phi(st.y);
        const double dphi = flow_phi_dot(st.y, params);
        if (phi == 0.0 || dphi == 0.0) break;
        const double tn = te - phi / dphi;
        if (!std::isfinite(tn) || std::abs(tn - te) > 10.0 * std::abs(h)) break;
        if (std::abs(tn - te) <=
            2.0 * std::numeric_limits<double>::epsilon() * std::abs(te)) {
          break;
        }
        te = tn;
        st = dopri5_step(rhs, t, z, f, te - t);
      }
      FlowState ze = st.y;
      renormalize(ze);
      arc.dense.push_back(st.dense);
      arc.samples.push_back(to_sample(te, ze));
      arc.t_end = te;
      const double sc = reduced_costate_norm(ze);
      out.phi_residual = sc > 0.0 ? std::abs(flow_phi(ze)) / sc : 0.0;
      out.event = ArcEvent::PhiZero;
      return out;
    }

    if (scale > 0.0 && max_abs_g <= settings.event_tol_phi * scale) {
      out.event = ArcEvent::Degenerate;
      FlowState zn = step.y;
      renormalize(zn);
      arc.dense.push_back(step.dense);
      arc.samples.push_back(to_sample(t + h, zn));
      arc.t_end = t + h;
      return out;
    }

    t += h;
    z = step.y;
    renormalize(z);
    f = rhs(t, z);
    arc.dense.push_back(step.dense);
    arc.samples.push_back(to_sample(t, z));
    arc.t_end = t;

    if (stop.target_radius > 0.0 &&
        (z.head<3>() - StateVector::target().vec()).norm() <
            stop.target_radius) {
      out.event = ArcEvent::TargetReached;
      break;
    }
    if (stop.predicate && stop.predicate(arc.samples.back())) {
      out.event = ArcEvent::StopRequested;
      break;
    }

    h *= step_growth(err);
    if (std::abs(h) > settings.max_step) h = sign * settings.max_step;
  }
  return out;
}

const BangArc& ExtremalTrajectory::arc_at(double t) const {
  for (const auto& a : arcs) {
    if (a.contains(t)) return a;
  }
  return std::abs(t - t_start()) < std::abs(t - t_end()) ? arcs.front()
                                                          : arcs.back();
}

ExtremalSample ExtremalTrajectory::at(double t) const {
  return arc_at(t).at(t);
}

double ExtremalTrajectory::max_hamiltonian(const ModelParams& params) const {
  double m = 0.0;
  for (const auto& a : arcs) {
    for (const auto& s : a.samples) {
      m = std::max(m, std::abs(pontryagin_hamiltonian(s.x, s.p, Control{a.u},
                                                      params)));
    }
  }
  return m;
}

double ExtremalTrajectory::max_sphere_defect() const {
  double m = 0.0;
  for (const auto& a : arcs) {
    for (const auto& s : a.samples) m = std::max(m, s.x.sphere_defect());
  }
  return m;
}

ExtremalTrajectory concatenate_extremal(const ExtremalSeed& seed,
                                        Direction dir,
                                        const StopCriteria& stop,
                                        const IntegratorSettings& settings,
                                        const ModelParams& params) {
  ExtremalTrajectory traj;
  traj.direction = dir;

  StateVector x = seed.x;
  AdjointVector p = seed.p;
  double u = seed.u;
  double t = seed.t0;
  double cost = 0.0;

  while (true) {
    StopCriteria arc_stop = stop;
    arc_stop.max_duration = stop.max_duration - std::abs(t - seed.t0);
    if (arc_stop.max_duration <= 0.0) {
      traj.termination = ArcEvent::MaxTime;
      break;
    }
    ArcResult r =
        integrate_bang_arc(x, p, u, dir, settings, params, arc_stop, t, cost);
    const ExtremalSample end = r.arc.samples.back();
    traj.arcs.push_back(std::move(r.arc));
    x = end.x;
    p = end.p;
    t = end.t;
    cost = end.cost;

    if (r.event != ArcEvent::PhiZero) {
      traj.termination = r.event;
      break;
    }
    SwitchPoint sp;
    sp.t = t;
    sp.x = x;
    sp.p = p;
    sp.phi = switching_fn(x, p);
    sp.u_before = dir == Direction::Forward ? u : -u;
    sp.u_after = -sp.u_before;
    traj.switch_points.push_back(sp);
    if (static_cast<int>(traj.switch_points.size()) >= settings.max_switchings) {
      traj.truncated = true;
      traj.termination = ArcEvent::PhiZero;
      break;
    }
    u = -u;
  }
  traj.cost_accumulated = cost;
  return traj;
}

}  // namespace chatter
