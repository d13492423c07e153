#include "qsp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qsp {

std::string_view to_string(Formulation f) {
  return f == Formulation::f_form ? "f-form" : "u-form";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::blowup: return "blowup";
    case Verdict::global_so_far: return "global-so-far";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void solve_tridiagonal(const Vector& lower, Vector diag, const Vector& upper, Vector& rhs) {
  const Index n = diag.size();
  for (Index i = 1; i < n; ++i) {
    const double w = lower[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (Index i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

FieldV solve_poisson(const FieldU& u, double mass) {
  const Index n = u.size();
  const double h = u.cell_width();
  const double discrete = u.u.sum() * h;
  if (std::abs(discrete - mass) > 1e-10 * mass) {
    throw std::invalid_argument(fmt::format(
        "solve_poisson: mass {:.17g} does not match M = {:.17g}", discrete, mass));
  }
  FieldV out{Vector(n), Vector::Zero(n + 1)};
  for (Index j = 0; j + 1 < n; ++j) out.dvdx[j + 1] = out.dvdx[j] + h * (mass - u.u[j]);
  out.v[0] = 0.0;
  for (Index j = 1; j < n; ++j) out.v[j] = out.v[j - 1] + h * out.dvdx[j];
  out.v.array() -= out.v.mean();
  return out;
}

SolverState make_state(const FieldF& f) {
  SolverState s;
  s.form = Formulation::f_form;
  s.mass = f.mass;
  s.field = f.f;
  return s;
}

SolverState make_state(const FieldU& u) {
  SolverState s;
  s.form = Formulation::u_form;
  s.mass = u.mass;
  s.field = u.u;
  s.v = solve_poisson(u, u.mass);
  return s;
}

namespace {

/// One backward-Euler solve at fixed dt; empty when Newton fails.
std::optional<std::pair<Vector, int>> newton_f(const Potentials& p, const Vector& old, double mass,
                                               double dt, const StepOptions& opt) {
  const Index n = old.size();
  const double h = mass / static_cast<double>(n);
  const double k = dt / (h * h);
  Vector f = old;
  Vector P(n), dP(n), R(n), lower(n - 1), diag(n), upper(n - 1);

  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (Index j = 0; j < n; ++j) {
      P[j] = p.potential(f[j]);
      dP[j] = p.dpsi(f[j]);
    }
    double worst = 0.0;
    for (Index j = 0; j < n; ++j) {
      // Ghost reflection at both ends.
      const double left = j > 0 ? P[j - 1] : P[j];
      const double right = j + 1 < n ? P[j + 1] : P[j];
      const double diffusion = (right - 2.0 * P[j] + left);
      R[j] = f[j] - old[j] - k * diffusion + dt * (1.0 - mass * f[j]);
      const double scale = std::abs(old[j]) +
                           k * (std::abs(left) + 2.0 * std::abs(P[j]) + std::abs(right)) +
                           dt * (1.0 + mass * std::abs(f[j]));
      worst = std::max(worst, std::abs(R[j]) / scale);
    }
    if (!std::isfinite(worst)) return std::nullopt;
    if (worst <= opt.newton_tolerance) return std::make_pair(f, it);

    for (Index j = 0; j < n; ++j) {
      const int neighbours = (j > 0) + (j + 1 < n);
      diag[j] = 1.0 + k * neighbours * dP[j] - dt * mass;
      if (j > 0) lower[j - 1] = -k * dP[j - 1];
      if (j + 1 < n) upper[j] = -k * dP[j + 1];
    }
    Vector delta = -R;
    solve_tridiagonal(lower, diag, upper, delta);
    if (!delta.allFinite()) return std::nullopt;

    // Damp so no cell loses more than 90% of its value in one update.
    double lambda = 1.0;
    for (Index j = 0; j < n; ++j) {
      if (delta[j] < 0.0) lambda = std::min(lambda, 0.9 * f[j] / -delta[j]);
    }
    f += lambda * delta;
  }
  return std::nullopt;
}

/// One finite-volume step at fixed dt; empty on failure or lost positivity.
std::optional<std::pair<Vector, int>> picard_u(const Potentials& p, const SolverState& s, double dt,
                                               const StepOptions& opt) {
  const Coefficient& a = p.coefficient();
  const Vector& old = s.field;
  const Index n = old.size();
  const double h = 1.0 / static_cast<double>(n);
  const Vector& w = s.v.dvdx;

  // Explicit upwind drift: u_t + (w u)_x = 0.
  Vector rhs = old;
  for (Index face = 1; face < n; ++face) {
    const double c = w[face];
    const double flux = c * (c > 0.0 ? old[face - 1] : old[face]);
    rhs[face - 1] -= dt / h * flux;
    rhs[face] += dt / h * flux;
  }
  if (!(rhs.minCoeff() > 0.0)) return std::nullopt;

  const double k = dt / (h * h);
  Vector u = old, coef(n), lower(n - 1), diag(n), upper(n - 1);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (Index j = 0; j < n; ++j) coef[j] = a(u[j]);
    diag.setOnes();
    for (Index face = 1; face < n; ++face) {
      const double K = 2.0 * coef[face - 1] * coef[face] / (coef[face - 1] + coef[face]);
      diag[face - 1] += k * K;
      diag[face] += k * K;
      upper[face - 1] = -k * K;
      lower[face - 1] = -k * K;
    }
    Vector next = rhs;
    solve_tridiagonal(lower, diag, upper, next);
    if (!next.allFinite() || !(next.minCoeff() > 0.0)) return std::nullopt;
    const double change = ((next - u).array().abs() / next.array()).maxCoeff();
    u = std::move(next);
    if (change <= opt.newton_tolerance) return std::make_pair(u, it);
  }
  return std::nullopt;
}

}  // namespace

StepResult step_f(const Potentials& p, const SolverState& s, double dt, const StepOptions& opt) {
  if (s.form != Formulation::f_form) throw std::invalid_argument("step_f: state is not f-form");
  if (!(s.field.minCoeff() > 0.0)) throw std::invalid_argument("step_f: f must be positive");
  StepResult out;
  // Keeps 1 - dt M away from zero so the Jacobian stays diagonally dominant.
  dt = std::min(dt, 0.5 / s.mass);
  for (;; dt *= 0.5, ++out.halvings) {
    if (dt < opt.dt_floor) {
      throw NearSingularity(fmt::format(
          "f-form step failed above dt = {:.3g} at t = {:.17g} (min f = {:.3g})", opt.dt_floor,
          s.t, s.field.minCoeff()));
    }
    auto solved = newton_f(p, s.field, s.mass, dt, opt);
    if (!solved || !(solved->first.minCoeff() > 0.0)) continue;
    out.state = s;
    out.state.field = std::move(solved->first);
    out.state.t = s.t + dt;
    out.state.dt = dt;
    out.state.steps = s.steps + 1;
    out.dt_used = dt;
    out.iterations = solved->second;
    return out;
  }
}

StepResult step_u(const Potentials& p, const SolverState& s, double dt, const StepOptions& opt) {
  if (s.form != Formulation::u_form) throw std::invalid_argument("step_u: state is not u-form");
  const double h = 1.0 / static_cast<double>(s.field.size());
  const double speed = s.v.dvdx.cwiseAbs().maxCoeff();
  if (speed > 0.0) dt = std::min(dt, 0.5 * h / speed);
  StepResult out;
  for (;; dt *= 0.5, ++out.halvings) {
    if (dt < opt.dt_floor) {
      throw NearSingularity(fmt::format(
          "u-form step failed above dt = {:.3g} at t = {:.17g} (max u = {:.3g})", opt.dt_floor,
          s.t, s.field.maxCoeff()));
    }
    auto solved = picard_u(p, s, dt, opt);
    if (!solved) continue;
    Vector u = std::move(solved->first);
    u *= s.mass / (u.sum() * h);  // mean projection before the Poisson solve
    out.state = s;
    out.state.v = solve_poisson(FieldU{u, s.mass}, s.mass);
    out.state.field = std::move(u);
    out.state.t = s.t + dt;
    out.state.dt = dt;
    out.state.steps = s.steps + 1;
    out.dt_used = dt;
    out.iterations = solved->second;
    return out;
  }
}

RunOutcome integrate(const Potentials& p, SolverState s, const RunOptions& opt,
                     const Observer& observe) {
  const bool f_form = s.form == Formulation::f_form;
  auto crossed = [&](const SolverState& st) {
    return f_form ? st.field.minCoeff() < opt.touchdown : st.field.maxCoeff() > opt.runaway;
  };

  RunOutcome out;
  double dt = std::clamp(opt.dt_init, opt.dt_min, opt.dt_max);
  double next_record = opt.record_interval > 0.0 ? s.t + opt.record_interval
                                                 : std::numeric_limits<double>::infinity();
  bool recorded = true;
  observe(s);

  auto finish = [&](Verdict v, std::string reason) {
    out.verdict = v;
    out.reason = std::move(reason);
    out.final_time = s.t;
    out.steps = s.steps;
    if (!recorded) observe(s);
    out.final_state = s;
    return out;
  };

  if (crossed(s)) {
    out.blowup_time = s.t;
    return finish(Verdict::blowup, "threshold crossed by the initial data");
  }

  while (s.t < opt.t_max) {
    const double remaining = opt.t_max - s.t;
    const double attempt = std::min(dt, remaining);
    StepResult step;
    try {
      step = f_form ? step_f(p, s, attempt, opt.step) : step_u(p, s, attempt, opt.step);
    } catch (const NearSingularity& e) {
      out.blowup_time = s.t;
      return finish(Verdict::blowup, e.what());
    } catch (const std::exception& e) {
      return finish(Verdict::inconclusive, e.what());
    }
    const double change =
        ((step.state.field - s.field).array().abs() / s.field.array()).maxCoeff();
    if (change > 2.0 * opt.target_change && step.dt_used > opt.dt_min) {
      dt = std::max(0.5 * step.dt_used, opt.dt_min);
      ++out.rejected;
      continue;
    }
    const bool last = step.dt_used >= remaining;
    s = std::move(step.state);
    if (last) s.t = opt.t_max;

    if (change > opt.target_change) {
      dt = 0.5 * step.dt_used;
    } else if (change < 0.5 * opt.target_change) {
      dt = 2.0 * step.dt_used;
    } else {
      dt = step.dt_used;
    }
    dt = std::clamp(dt, opt.dt_min, opt.dt_max);

    recorded = false;
    const bool due = s.t >= next_record || (opt.record_every > 0 && s.steps % opt.record_every == 0);
    if (crossed(s)) {
      out.blowup_time = s.t;
      observe(s);
      recorded = true;
      return finish(Verdict::blowup, f_form ? "min f below the touch-down threshold"
                                            : "max u above the runaway threshold");
    }
    if (due) {
      observe(s);
      recorded = true;
      while (next_record <= s.t) next_record += opt.record_interval;
    }
  }
  return finish(Verdict::global_so_far, "reached t_max");
}

}  // namespace qsp
