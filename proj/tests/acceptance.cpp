// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qsp/config.hpp"
#include "qsp/expr.hpp"
#include "qsp/regime.hpp"
#include "qsp/run.hpp"
#include "qsp/suite.hpp"

using namespace qsp;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("{}{}", ok ? "" : "NOT ", what));
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const CheckVerdict* find_check(const RunSummary& s, const std::string& name) {
  for (const auto& c : s.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool check_passed(const RunSummary& s, const std::string& name) {
  const CheckVerdict* c = find_check(s, name);
  return c && c->applicable && c->passed;
}

struct PresetRun {
  RunResult result;
  double seconds = 0.0;
};

PresetRun run_preset(const std::string& name) {
  const auto t0 = Clock::now();
  PresetRun r{simulate(preset(name)), 0.0};
  r.seconds = seconds_since(t0);
  return r;
}

Outcome criterion1() {
  Outcome o;
  auto timed = [&](const Coefficient& c, std::span<const DecrCandidate> cand = {}) {
    const auto t0 = Clock::now();
    RegimeReport r = classify(c, cand);
    o.require(seconds_since(t0) < 1.0, fmt::format("{} classified in < 1 s", c.name()));
    return r;
  };
  for (const auto& c : {Coefficient::shifted_power(1, -1), Coefficient::constant(1),
                        Coefficient::shifted_power(1, -0.5), Coefficient::singular_power(1, 0.5, 0),
                        Coefficient::from_expression("(1+r)/(2+r)")}) {
    const RegimeReport r = timed(c);
    o.require(r.clause == Clause::global, fmt::format("{} -> {}", c.name(), to_string(r.clause)));
  }
  for (const auto& c : {Coefficient::shifted_power(1, -2), Coefficient::from_expression("(1+r)^-2")}) {
    const RegimeReport r = timed(c);
    o.require(r.clause == Clause::blowup_condition1 && std::abs(r.gamma.value - 0.5) <= 1e-6,
              fmt::format("{} -> {} gamma {:.12g}", c.name(), to_string(r.clause), r.gamma.value));
  }
  const DecrCandidate pair{0.5, 1.5};
  for (const auto& c : {Coefficient::singular_power(1, 2.5, 1),
                        Coefficient::from_expression("(1+r)*r^-2.5")}) {
    const RegimeReport r = timed(c, {&pair, 1});
    const bool ok = r.clause == Clause::blowup_decr && r.decr &&
                    std::abs(r.decr->gamma_theta.value - 2.0) <= 1e-6 &&
                    std::abs(r.decr->c_infinity.value - 2.0) <= 1e-6;
    o.require(ok, fmt::format("{} -> {} gamma_theta {:.12g} C_inf {:.12g}", c.name(),
                              to_string(r.clause), r.decr ? r.decr->gamma_theta.value : NAN,
                              r.decr ? r.decr->c_infinity.value : NAN));
  }
  return o;
}

Outcome criterion2(const PresetRun& run) {
  Outcome o;
  const RunSummary& s = run.result.summary;
  const auto& series = run.result.series;
  o.require(s.verdict == Verdict::blowup, fmt::format("verdict {}", to_string(s.verdict)));
  o.require(s.blowup_time && *s.blowup_time < 50.0,
            fmt::format("touch-down at t = {:.6g}", s.blowup_time.value_or(NAN)));
  o.require(!series.empty() && series.back().f_min < 1e-6,
            fmt::format("last min f = {:.3g}", series.empty() ? NAN : series.back().f_min));
  bool decreasing = series.size() >= 2;
  for (std::size_t i = 1; i < series.size(); ++i) {
    decreasing = decreasing && series[i].m_q && series[i - 1].m_q && *series[i].m_q < *series[i - 1].m_q;
  }
  o.require(decreasing, fmt::format("m_q strictly decreasing over {} intervals", series.size() - 1));
  const CheckVerdict* m = find_check(s, "moment_ode");
  o.require(m && m->passed, fmt::format("moment ODE slack min {:.6g} >= -{:.3g}",
                                        m && m->min_slack ? *m->min_slack : NAN,
                                        m ? m->tolerance : NAN));
  o.require(s.design && s.design->lambda0 < 0.0,
            fmt::format("Lambda(m_q(0)) = {:.6g}", s.design ? s.design->lambda0 : NAN));
  o.require(run.seconds < 60.0, fmt::format("{:.2f} s", run.seconds));
  return o;
}

Outcome criterion3(const PresetRun& run) {
  Outcome o;
  const RunSummary& s = run.result.summary;
  o.require(s.verdict == Verdict::global_so_far && s.final_time == 5.0,
            fmt::format("verdict {} at t = {}", to_string(s.verdict), s.final_time));
  o.require(check_passed(s, "comparison"), "f <= Sigma(t) + 1e-8 at all records");
  double prandtl = INFINITY, barrier = INFINITY;
  for (const auto& r : run.result.series) {
    if (r.slack_prandtl) prandtl = std::min(prandtl, *r.slack_prandtl);
    if (r.f_min_bound) barrier = std::min(barrier, r.f_min - *r.f_min_bound);
  }
  o.require(barrier >= 0.0, fmt::format("min f - Psi^-1(-C7) >= {:.6g}", barrier));
  o.require(prandtl >= -1e-8, fmt::format("gradient bound slack >= {:.6g}", prandtl));
  o.require(run.seconds < 60.0, fmt::format("{:.2f} s", run.seconds));
  return o;
}

Outcome criterion4(const PresetRun& blowup, const PresetRun& global) {
  Outcome o;
  for (const PresetRun* r : {&blowup, &global}) {
    const CheckVerdict* c = find_check(r->result.summary, "lyapunov");
    o.require(c && c->applicable && c->passed,
              fmt::format("{}: min slack {:.6g}", r->result.summary.name,
                          c && c->min_slack ? *c->min_slack : NAN));
  }
  return o;
}

Outcome criterion5(const PresetRun& run) {
  Outcome o;
  const RunSummary& s = run.result.summary;
  const Potentials p(Coefficient::shifted_power(1, -2));
  const double M = 1.0;
  const double P0 = -0.5, T = 2.0 / 3.0;
  const double mu_formula = 1 + 128 * std::pow(M, 4) - 32 * M * M * P0 + 64 * M * M * T +
                            8 * T * T + P0 * P0 - 32 * M * P0;
  const double mu = mu_constant(p, M);
  o.require(std::abs(mu - 207.47222222222223) < 1e-9 && std::abs(mu - mu_formula) < 1e-12,
            fmt::format("mu_M = {:.12g}", mu));
  const double bound = 32.0 * M * std::max(s.lyapunov0.value_or(NAN), 0.0) + mu;
  double worst = INFINITY;
  for (const auto& r : run.result.series) {
    if (!r.slack_corollary) continue;
    const double top = std::sqrt(bound) - *r.slack_corollary;
    worst = std::min(worst, bound - top * top);
  }
  o.require(std::isfinite(worst) && worst >= -1e-6,
            fmt::format("min (bound - max Psi~^2) = {:.6g}", worst));
  o.require(check_passed(s, "corollary_bound"), "per-record sup-bound slacks");
  return o;
}

Outcome criterion6() {
  Outcome o;
  for (double beta : {-1.0, -2.0}) {
    const Potentials p(Coefficient::shifted_power(1, beta));
    const CheckVerdict v = lemma4_random_suite(p, 1.0, 50, 400, 1234);
    o.require(v.passed, fmt::format("{}: min slack {:.6g} over 50 profiles", p.coefficient().name(),
                                    v.min_slack.value_or(NAN)));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const Coefficient c = Coefficient::shifted_power(1, -2);
  const ConcaveMajorant B = build_majorant(c, 40);
  double worst_b = 0.0;
  for (int i = 0; i <= B.i_max(); ++i) {
    worst_b = std::max(worst_b, std::abs(B.slopes()[i] - 1.0 / (1.0 + std::ldexp(1.0, i))));
  }
  o.require(worst_b <= 1e-10, fmt::format("b_i = 1/(1+2^i) within {:.3g}", worst_b));
  o.require(std::abs(B(3.0) - 11.0 / 6.0) <= 1e-10, fmt::format("B(3) = {:.15g}", B(3.0)));
  const MajorantReport rep = verify_majorant(c, B);
  o.require(rep.samples == 200 && rep.violations.empty(),
            fmt::format("B >= -rA on {} samples ({} violations)", rep.samples, rep.violations.size()));
  o.require(rep.concave, "slopes strictly decreasing");
  o.require(rep.surrogate_holds, fmt::format("growth surrogate {:.6g} <= {:.6g}", rep.surrogate_ratio,
                                             rep.surrogate_bound));
  const double r = std::ldexp(1.0, 40);
  const double ratio = B(r) / r;
  const double literal = 2e-12 + B.slopes()[39];
  o.require(ratio <= literal, fmt::format("B(2^40)/2^40 = {:.6g} <= 2e-12 + b_39 = {:.6g} (excess {:.3g})",
                                          ratio, literal, ratio - literal));
  return o;
}

Outcome criterion8(const PresetRun& run400) {
  Outcome o;
  const auto gap400 = run400.result.summary.crossval_gap;
  RunConfig cfg = preset("crossval");
  cfg.n = cfg.ny = 800;
  const RunResult r800 = simulate(cfg);
  const auto gap800 = r800.summary.crossval_gap;
  o.require(gap400 && *gap400 <= 0.02, fmt::format("gap at N = 400: {:.6g}", gap400.value_or(NAN)));
  o.require(gap400 && gap800 && *gap800 <= 0.6 * *gap400,
            fmt::format("gap at N = 800: {:.6g} (ratio {:.4f})", gap800.value_or(NAN),
                        gap400 && gap800 ? *gap800 / *gap400 : NAN));
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto t0 = Clock::now();
  auto err = [](Index n) {
    const FieldU u = cosine_profile(1.0, 0.5, n);
    return (f_to_u(u_to_f(u, 4 * n), n).u - u.u).cwiseAbs().maxCoeff();
  };
  const double e100 = err(100), e200 = err(200), e400 = err(400);
  for (const auto& [a, b] : {std::pair{e100, e200}, std::pair{e200, e400}}) {
    o.require(a / b >= 3.0 && a / b <= 5.0, fmt::format("round-trip ratio {:.4f}", a / b));
  }

  int golden_fail = 0;
  const std::vector<std::pair<std::string, double>> golden{
      {"(1+r)^-2", 0.25}, {"1/(1+r)", 0.5}, {"2^3^2", 512.0}, {"(1+r)/r^2.5", 2.0},
      {"ln(r)", 0.0},     {"-2^2", -4.0},   {"1+2*3", 7.0},   {"pow(2,10)/4", 256.0},
      {"sqrt(9)*exp(0)", 3.0}, {"10-4-3", 3.0}, {"8/4/2", 1.0}};
  for (const auto& [text, value] : golden) {
    if (expr::parse(text)(1.0) != value) ++golden_fail;
  }
  o.require(golden_fail == 0, fmt::format("{} parser golden cases", golden.size()));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  int prec_fail = 0;
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (expr::parse(fmt::format("{}+{}*{}", a, b, c))(1.0) != a + b * c) ++prec_fail;
    if (expr::parse(fmt::format("{}^{}^{}", a / 50, b / 50, c / 50))(1.0) !=
        std::pow(a / 50, std::pow(b / 50, c / 50)))
      ++prec_fail;
  }
  o.require(prec_fail == 0, "400 precedence properties");
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, fmt::format("{:.2f} s", secs));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  std::optional<PresetRun> blowup, global, crossval;
  auto need = [](std::optional<PresetRun>& slot, const char* name) -> const PresetRun& {
    if (!slot) slot = run_preset(name);
    return *slot;
  };

  const std::vector<Criterion> criteria{
      {1, "regime dichotomy", criterion1},
      {2, "blowup reproduction", [&] { return criterion2(need(blowup, "blowup-demo")); }},
      {3, "global reproduction", [&] { return criterion3(need(global, "global-demo")); }},
      {4, "Lyapunov monotonicity",
       [&] { return criterion4(need(blowup, "blowup-demo"), need(global, "global-demo")); }},
      {5, "corollary suite", [&] { return criterion5(need(blowup, "blowup-demo")); }},
      {6, "E1 / L1-norm suite", criterion6},
      {7, "majorant suite", criterion7},
      {8, "cross-formulation consistency", [&] { return criterion8(need(crossval, "crossval")); }},
      {9, "transform and parser properties", criterion9},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    if (!o.pass) ++failed;
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << fmt::format("criterion {}: {} ({}): {}", c.id, o.pass ? "PASS" : "FAIL", c.title,
                             detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
