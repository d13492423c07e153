#include "qsp/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace qsp {

namespace {

template <class F>
std::optional<double> attempt(F&& f) {
  try {
    const double v = f();
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<DecrCandidate> candidates_for(const RunConfig& cfg) {
  if (cfg.alpha) return {DecrCandidate{cfg.theta, *cfg.alpha}};
  std::vector<DecrCandidate> out;
  for (DecrCandidate c : default_candidates()) {
    c.theta = cfg.theta;
    if (c.alpha > c.theta / (1.0 + c.theta)) out.push_back(c);
  }
  return out;
}

bool blowup_clause(Clause c) { return c == Clause::blowup_condition1 || c == Clause::blowup_decr; }

/// Smallest trial delta still resolved by two cells, or limit/4.
double fallback_delta(const std::vector<DeltaTrial>& trace, double limit, double h) {
  double best = 0.25 * limit;
  for (const DeltaTrial& t : trace) {
    if (t.delta >= 2.0 * h) best = std::min(best, t.delta);
  }
  return best;
}

RunOptions run_options(const RunConfig& cfg, double scale) {
  RunOptions o;
  o.t_max = cfg.t_max;
  o.dt_init = cfg.dt_init * scale;
  o.dt_max = cfg.effective_dt_max();
  o.dt_min = 1e-12 * scale;
  o.target_change = cfg.target_change;
  o.touchdown = cfg.touchdown * scale;
  o.record_interval = cfg.effective_interval();
  o.record_every = cfg.output_every;
  o.step.newton_tolerance = cfg.newton_tolerance;
  o.step.dt_floor = 1e-14 * scale;
  return o;
}

FormulationOutcome outcome_of(const RunOutcome& r, Formulation form) {
  FormulationOutcome o;
  o.form = form;
  o.verdict = r.verdict;
  o.blowup_time = r.blowup_time;
  o.final_time = r.final_time;
  o.steps = r.steps;
  o.rejected = r.rejected;
  o.reason = r.reason;
  return o;
}

CheckVerdict mass_check(const std::string& name, const DiagnosticsSeries& series, double tol) {
  CheckVerdict v;
  v.name = name;
  v.tolerance = tol;
  v.applicable = !series.empty();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double slack = tol - std::abs(series[i].mass_err);
    v.min_slack = v.min_slack ? std::min(*v.min_slack, slack) : slack;
    if (slack < 0.0 && !v.first_violation) {
      v.first_violation = i;
      v.passed = false;
    }
  }
  return v;
}

}  // namespace

bool RunSummary::checks_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckVerdict& c) { return !c.applicable || c.passed; });
}

InitialData build_initial(const RunConfig& cfg, const std::optional<BlowupDesign>& design) {
  const double M = cfg.mass;
  InitialData init;
  switch (cfg.initial.kind) {
    case InitialKind::constant:
      init.f = make_field_f(Vector::Constant(cfg.ny, 1.0 / M), M);
      init.u = make_field_u(Vector::Constant(cfg.n, M));
      break;
    case InitialKind::cosine:
      init.u = cosine_profile(M, cfg.initial.amplitude, cfg.n);
      init.f = u_to_f(*init.u, cfg.ny);
      break;
    case InitialKind::pam: {
      init.q = cfg.initial.q ? cfg.initial.q : (design ? std::optional(design->q) : std::nullopt);
      init.delta = cfg.initial.delta;
      if (!init.delta && design && design->delta > 0.0) init.delta = design->delta;
      if (!init.q || !init.delta) {
        throw ConfigError("initial.delta",
                          "\"auto\" needs a blowup design; give initial.q and initial.delta");
      }
      init.f = pam_profile(M, *init.q, *init.delta, cfg.ny).field;
      try {
        init.u = f_to_u(init.f, cfg.n, 0.0);
      } catch (const std::exception&) {
        init.u.reset();
      }
      break;
    }
    case InitialKind::samples: {
      Vector values = read_csv_values(cfg.initial.file);
      if (cfg.initial.field == "f") {
        init.f = make_field_f(std::move(values), M);
        init.u = f_to_u(init.f, cfg.n, 0.0);
      } else {
        FieldU u = make_field_u(std::move(values));
        u.u *= M / u.mass;
        u.mass = M;
        init.u = u;
        init.f = u_to_f(u, cfg.ny);
      }
      break;
    }
  }
  init.m0 = 1.0 / init.f.f.maxCoeff();
  init.scale = std::min(1.0, init.f.f.minCoeff());
  return init;
}

RunResult simulate(const RunConfig& cfg) {
  validate(cfg);
  const auto started = std::chrono::steady_clock::now();
  RunResult result;
  RunSummary& sum = result.summary;
  sum.name = cfg.name;
  sum.config = cfg;

  const Potentials p(cfg.coefficient.build());
  const double M = cfg.mass;
  const auto candidates = candidates_for(cfg);
  sum.regime = classify(p.coefficient(), candidates);

  // Design for pam data with an automatic moment order.
  const bool wants_design = cfg.initial.kind == InitialKind::pam && !cfg.initial.q;
  if (wants_design) {
    if (!blowup_clause(sum.regime.clause) || !sum.regime.decr) {
      throw ConfigError("initial.q", fmt::format("\"auto\" needs a blowup regime, classified as {}",
                                                 to_string(sum.regime.clause)));
    }
    const DecrConstants& k = *sum.regime.decr;
    BlowupDesign d = partial_design(p, M, k.theta, k.alpha);
    if (cfg.initial.delta) {
      adopt_delta(d, evaluate_delta(p, d, *cfg.initial.delta, cfg.ny), cfg.ny);
      if (!(d.lambda0 < 0.0)) {
        sum.design_error = fmt::format("Lambda(m_q(0)) = {:.6g} at the given delta", d.lambda0);
      }
      sum.design = d;
    } else {
      try {
        select_delta(p, d, cfg.ny);
        sum.design = d;
      } catch (const DesignError& e) {
        sum.design_error = e.what();
        sum.design_trace = e.trace();
        const double delta = fallback_delta(e.trace(), pam_delta_limit(M, d.q), M / cfg.ny);
        adopt_delta(d, evaluate_delta(p, d, delta, cfg.ny), cfg.ny);
        sum.design = d;  // q and constants; no certificate
      }
    }
  }

  sum.initial = build_initial(cfg, sum.design);
  InitialData& init = sum.initial;
  if (sum.design_error) {
    init.note = "blowup expected, certificate unavailable: verify by simulation";
  }
  if (!init.q && sum.design) init.q = sum.design->q;

  const bool integrable = p.limits().integrable_at_infinity;
  std::optional<double> mu;
  if (integrable) mu = attempt([&] { return mu_constant(p, M); });
  const RunOptions opt = run_options(cfg, init.scale);

  const bool run_f = cfg.formulation != FormulationChoice::u;
  const bool run_u = cfg.formulation != FormulationChoice::f;

  if (run_f) {
    sum.lyapunov0 = attempt([&] { return lyapunov_L1(p, init.f); });
    const double L1_0 = sum.lyapunov0.value_or(0.0);
    auto observe = [&](const SolverState& s) {
      const FieldF f = s.as_f();
      DiagnosticsRecord rec;
      rec.t = s.t;
      rec.dt = s.dt;
      rec.f_min = f.f.minCoeff();
      rec.f_max = f.f.maxCoeff();
      rec.u_max = 1.0 / rec.f_min;
      rec.mass_err = f.f.sum() * f.cell_width() - 1.0;
      rec.L1 = attempt([&] { return lyapunov_L1(p, f); });
      if (init.q) rec.m_q = moment_mq(f, *init.q);
      rec.sigma = attempt([&] { return sigma(M, init.m0, s.t); });
      try {
        const Lemma4Slack l4 = check_lemma4(p, f);
        rec.slack_gex5 = l4.gex5;
        rec.slack_gex6 = l4.gex6;
      } catch (const std::exception&) {
      }
      if (integrable && mu && sum.lyapunov0 && rec.L1) {
        try {
          const CorollarySlack c = corollary_slack(p, f, L1_0, *rec.L1, *mu);
          rec.slack_corollary = c.corollary;
          rec.slack_lemma3 = c.lemma3;
        } catch (const std::exception&) {
        }
      }
      if (!integrable && sum.lyapunov0) {
        try {
          const GlobalSlack g = global_slack(p, f, L1_0, init.m0, s.t);
          rec.slack_prandtl = g.prandtl;
          rec.slack_l1norm = g.l1norm;
          rec.f_min_bound = g.f_min_bound;
          rec.h1_norm = g.h1_norm;
        } catch (const std::exception&) {
        }
      }
      result.series.push_back(rec);
    };
    RunOutcome r;
    try {
      r = integrate(p, make_state(init.f), opt, observe);
    } catch (const std::exception& e) {
      r.verdict = Verdict::inconclusive;
      r.reason = e.what();
      r.final_time = result.series.empty() ? 0.0 : result.series.back().t;
    }
    FormulationOutcome o = outcome_of(r, Formulation::f_form);
    for (const auto& rec : result.series) o.max_mass_err = std::max(o.max_mass_err, std::abs(rec.mass_err));
    sum.runs.push_back(o);
    if (r.final_state.field.size() > 0) result.final_f = r.final_state;

    auto& checks = sum.checks;
    checks.push_back(check_lyapunov(result.series));
    checks.push_back(check_comparison(result.series));
    checks.push_back(check_lemma4(result.series));
    if (integrable) {
      checks.push_back(check_corollary_bound(result.series));
    } else {
      checks.push_back(check_global_bounds(result.series));
    }
    if (sum.design && !sum.design_error && init.q && *init.q == sum.design->q) {
      checks.push_back(check_moment_ode(result.series, *sum.design));
    }
    checks.push_back(mass_check("f_integral", result.series,
                                1e-10 * std::max(1.0, o.final_time)));
  }

  if (run_u && !init.u) {
    FormulationOutcome o;
    o.form = Formulation::u_form;
    o.reason = "initial data has no u-representation";
    sum.runs.push_back(o);
  } else if (run_u) {
    RunOptions uopt = opt;
    uopt.runaway = std::max(1.0, init.u->u.maxCoeff()) / cfg.touchdown;
    auto observe = [&](const SolverState& s) {
      DiagnosticsRecord rec;
      rec.t = s.t;
      rec.dt = s.dt;
      rec.u_max = s.field.maxCoeff();
      rec.f_min = 1.0 / rec.u_max;
      rec.f_max = 1.0 / s.field.minCoeff();
      rec.mass_err = (s.field.sum() / static_cast<double>(s.field.size()) - M) / M;
      result.series_u.push_back(rec);
    };
    RunOutcome r;
    try {
      r = integrate(p, make_state(*init.u), uopt, observe);
    } catch (const std::exception& e) {
      r.verdict = Verdict::inconclusive;
      r.reason = e.what();
    }
    FormulationOutcome o = outcome_of(r, Formulation::u_form);
    for (const auto& rec : result.series_u) o.max_mass_err = std::max(o.max_mass_err, std::abs(rec.mass_err));
    sum.runs.push_back(o);
    if (r.final_state.field.size() > 0) result.final_u = r.final_state;
    sum.checks.push_back(mass_check("u_mass", result.series_u, 1e-12));
  }

  if (result.final_f && result.final_u && sum.runs.size() == 2 &&
      sum.runs[0].verdict == Verdict::global_so_far &&
      sum.runs[1].verdict == Verdict::global_so_far) {
    const FieldU from_f = f_to_u(result.final_f->as_f(), cfg.n, 0.0);
    const Vector& direct = result.final_u->field;
    sum.crossval_gap = (from_f.u - direct).cwiseAbs().sum() / direct.cwiseAbs().sum();
    CheckVerdict v;
    v.name = "crossval";
    v.tolerance = 0.02;
    v.min_slack = v.tolerance - *sum.crossval_gap;
    v.passed = *v.min_slack >= 0.0;
    v.detail = fmt::format("relative L1 gap {:.6g} at t = {:.6g}", *sum.crossval_gap,
                           result.final_u->t);
    sum.checks.push_back(v);
  }

  const FormulationOutcome& primary = sum.runs.front();
  sum.verdict = primary.verdict;
  sum.blowup_time = primary.blowup_time;
  sum.final_time = primary.final_time;
  sum.wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

int exit_status(const RunSummary& summary) {
  for (const auto& r : summary.runs) {
    if (r.verdict == Verdict::inconclusive) return 2;
  }
  return 0;
}

}  // namespace qsp
