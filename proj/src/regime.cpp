#include "qsp/regime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "qsp/diagnostics.hpp"
#include "qsp/quadrature.hpp"

namespace qsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPerDecade = 256;
constexpr int kDecades = 8;
constexpr int kGrid = kPerDecade * kDecades + 1;  // 2048 intervals

/// g(r), with overflow of the coefficient read as an infinite value.
double guarded(const std::function<double(double)>& g, double r) {
  try {
    const double v = g(r);
    return std::isfinite(v) ? v : kInf;
  } catch (const expr::EvalError&) {
    return kInf;
  }
}

bool growing_without_bound(double end, double one_decade, double two_decades) {
  if (!std::isfinite(end)) return true;
  if (!(one_decade > 0.0) || !(two_decades > 0.0)) return false;
  const double last = end / one_decade;
  const double prev = one_decade / two_decades;
  return last > 1.01 && std::log(last) >= 0.5 * std::log(prev);
}

/// Supremum from precomputed grid values; `end` is the index toward which
/// divergence is tested and `step` walks one decade away from it.
Supremum sup_from_grid(const std::vector<double>& xs, const std::vector<double>& vs,
                       const std::function<double(double)>& g, std::size_t end, long step) {
  Supremum s;
  const auto at = [&](long k) { return vs[static_cast<std::size_t>(k)]; };
  const long e = static_cast<long>(end);
  if (growing_without_bound(at(e), at(e + step), at(e + 2 * step))) {
    s.value = kInf;
    s.argmax = xs[end];
    s.divergent = true;
    return s;
  }
  const auto best = std::max_element(vs.begin(), vs.end());
  const std::size_t k = static_cast<std::size_t>(best - vs.begin());
  s.value = *best;
  s.argmax = xs[k];

  const double lo = std::log(xs[k == 0 ? 0 : k - 1]);
  const double hi = std::log(xs[std::min(k + 1, xs.size() - 1)]);
  auto neg = [&](double x) { return -guarded(g, std::exp(x)); };
  const auto [x, value] = boost::math::tools::brent_find_minima(neg, lo, hi, 40);
  if (-value > s.value && std::isfinite(value)) {
    s.value = -value;
    s.argmax = std::exp(x);
  }
  return s;
}

std::vector<double> values_on(const std::vector<double>& xs, const std::function<double(double)>& g) {
  std::vector<double> vs(xs.size());
  std::transform(xs.begin(), xs.end(), vs.begin(), [&](double r) { return guarded(g, r); });
  return vs;
}

double tail_value(const Coefficient& c, double r) { return -tail_integral(c, r).value; }

}  // namespace

std::vector<double> log_samples(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("log_samples: need 0 < lo < hi and count >= 2");
  }
  std::vector<double> xs(count);
  const double a = std::log(lo), b = std::log(hi);
  for (int k = 0; k < count; ++k) xs[k] = std::exp(a + (b - a) * k / (count - 1));
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

Supremum sup_near_zero(const std::function<double(double)>& g) {
  const auto xs = log_samples(1e-8, 1.0, kGrid);
  return sup_from_grid(xs, values_on(xs, g), g, 0, kPerDecade);
}

Supremum sup_at_infinity(const std::function<double(double)>& g) {
  const auto xs = log_samples(1.0, 1e8, kGrid);
  return sup_from_grid(xs, values_on(xs, g), g, xs.size() - 1, -kPerDecade);
}

Supremum compute_gamma(const Coefficient& c) {
  if (!c.integrable_at_infinity()) return {kInf, 0.0, true};
  const auto xs = log_samples(1e-8, 1.0, kGrid);
  std::vector<double> vs(xs.size());
  if (c.has_closed_form()) {
    for (std::size_t k = 0; k < xs.size(); ++k) vs[k] = xs[k] * tail_value(c, xs[k]);
  } else {
    // Walk the tail downward from r = 1 by adding the gaps.
    auto a = [&c](double s) { return c(s); };
    double tail = tail_value(c, 1.0);
    vs.back() = tail;
    for (std::size_t k = xs.size() - 1; k-- > 0;) {
      try {
        tail += quad::integrate(a, xs[k], xs[k + 1], 1e-12 * std::max(1.0, tail)).value;
        vs[k] = xs[k] * tail;
      } catch (const expr::EvalError&) {
        std::fill(vs.begin(), vs.begin() + static_cast<long>(k) + 1, kInf);
        break;
      }
    }
  }
  auto g = [&c](double r) { return r * tail_value(c, r); };
  return sup_from_grid(xs, vs, g, 0, kPerDecade);
}

bool DecrConstants::admissible() const {
  return theta > 0.0 && alpha > theta / (1.0 + theta) && alpha <= 2.0 &&
         !gamma_theta.divergent && !c_infinity.divergent;
}

DecrConstants compute_decr_constants(const Coefficient& c, double theta, double alpha) {
  if (!(theta > 0.0) || !(alpha > theta / (1.0 + theta)) || !(alpha <= 2.0)) {
    throw std::invalid_argument(fmt::format(
        "decr constants: need theta > 0 and alpha in (theta/(1+theta), 2], got ({}, {})", theta,
        alpha));
  }
  DecrConstants out;
  out.theta = theta;
  out.alpha = alpha;
  out.gamma_theta = sup_near_zero([&](double r) { return std::pow(r, 2.0 + theta) * c(r); });
  out.c_infinity = sup_at_infinity([&](double r) { return std::pow(r, alpha) * c(r); });
  return out;
}

std::vector<DecrCandidate> default_candidates() {
  std::vector<DecrCandidate> out;
  const double theta = 0.5;
  for (int k = 20; k > 0; --k) {
    const double alpha = k / 10.0;
    if (alpha <= theta / (1.0 + theta)) break;
    out.push_back({theta, alpha});
  }
  return out;
}

std::string_view to_string(Clause c) {
  switch (c) {
    case Clause::global: return "global";
    case Clause::blowup_condition1: return "blowup-via-(1)";
    case Clause::blowup_decr: return "blowup-via-(decr)";
    case Clause::unclassified: return "unclassified";
  }
  return "unclassified";
}

RegimeReport classify(const Coefficient& c, std::span<const DecrCandidate> candidates) {
  RegimeReport report;
  report.coefficient = c.name();
  report.tail_integrable = c.integrable_at_infinity();
  report.tail_certainty = c.integrability_certainty();
  report.value_certainty = c.has_closed_form() ? Certainty::closed_form : Certainty::numeric;

  if (!report.tail_integrable) {
    report.gamma = {kInf, 0.0, true};
    report.clause = Clause::global;
    report.note = "tail not integrable: global existence";
    return report;
  }
  report.gamma = compute_gamma(c);

  std::vector<DecrCandidate> scan;
  report.default_candidates = candidates.empty();
  if (report.default_candidates) {
    scan = default_candidates();
  } else {
    scan.assign(candidates.begin(), candidates.end());
  }
  std::vector<std::string> skipped;
  std::optional<Supremum> shared_gamma_theta;
  for (const auto& cand : scan) {
    DecrConstants k;
    try {
      if (report.default_candidates && shared_gamma_theta) {
        // theta is fixed along the default scan, so gamma_theta is shared.
        k.theta = cand.theta;
        k.alpha = cand.alpha;
        k.gamma_theta = *shared_gamma_theta;
        k.c_infinity = sup_at_infinity([&](double r) { return std::pow(r, cand.alpha) * c(r); });
      } else {
        k = compute_decr_constants(c, cand.theta, cand.alpha);
        shared_gamma_theta = k.gamma_theta;
      }
    } catch (const std::invalid_argument& e) {
      skipped.push_back(e.what());
      continue;
    }
    report.candidates.push_back(k);
    if (k.admissible()) {
      report.decr = k;
      break;
    }
    if (report.default_candidates && k.gamma_theta.divergent) break;
  }

  if (!report.gamma.divergent) {
    report.clause = Clause::blowup_condition1;
    if (!report.decr) report.note = "blowup expected, certificate unavailable: verify by simulation";
  } else if (report.decr) {
    report.clause = Clause::blowup_decr;
  } else {
    report.clause = Clause::unclassified;
    report.note = "integrable tail, gamma infinite and no admissible (theta, alpha)";
  }
  if (report.default_candidates && report.decr) {
    if (!report.note.empty()) report.note += "; ";
    report.note += fmt::format("(theta, alpha) = ({}, {}) from the default scan", report.decr->theta,
                               report.decr->alpha);
  }
  for (const auto& s : skipped) {
    if (!report.note.empty()) report.note += "; ";
    report.note += "skipped candidate: " + s;
  }
  return report;
}

// --- concave majorant -------------------------------------------------------

ConcaveMajorant::ConcaveMajorant(double gamma, std::vector<double> slopes)
    : gamma_(gamma), slopes_(std::move(slopes)) {
  if (slopes_.size() < 2) throw std::invalid_argument("ConcaveMajorant: need at least two slopes");
  offsets_.assign(slopes_.size(), 0.0);
  for (std::size_t i = 1; i < slopes_.size(); ++i) {
    offsets_[i] = offsets_[i - 1] + (slopes_[i - 1] - slopes_[i]) * std::ldexp(1.0, static_cast<int>(i));
  }
}

double ConcaveMajorant::last_breakpoint() const { return std::ldexp(1.0, i_max()); }

double ConcaveMajorant::operator()(double r) const {
  if (!(r >= 0.0)) throw std::invalid_argument("ConcaveMajorant: need r >= 0");
  int i = 0;
  if (r > 2.0) {
    int e = 0;
    const double m = std::frexp(r, &e);  // r = m 2^e, m in [1/2, 1)
    i = m == 0.5 ? e - 2 : e - 1;        // r in (2^i, 2^{i+1}]
    i = std::min(i, i_max());
  }
  return slopes_[i] * r + offsets_[i] + gamma_;
}

ConcaveMajorant build_majorant(const Coefficient& c, int i_max) {
  if (i_max < 1) throw std::invalid_argument("build_majorant: need i_max >= 1");
  if (!c.integrable_at_infinity()) {
    throw std::domain_error("build_majorant: a is not integrable at infinity");
  }
  const Supremum gamma = compute_gamma(c);
  if (gamma.divergent) throw std::domain_error("build_majorant: gamma is infinite");
  std::vector<double> slopes(i_max + 1);
  for (int i = 0; i <= i_max; ++i) slopes[i] = tail_value(c, std::ldexp(1.0, i));
  return ConcaveMajorant(gamma.value, std::move(slopes));
}

MajorantReport verify_majorant(const Coefficient& c, const ConcaveMajorant& B,
                               std::span<const double> samples) {
  MajorantReport report;
  report.samples = samples.size();
  for (double r : samples) {
    const double target = r * tail_value(c, r);
    const double value = B(r);
    if (target < value + 1e-12 * std::max(1.0, value) && target >= 0.0) continue;
    report.violations.push_back({r, value, target});
  }
  const auto& b = B.slopes();
  report.concave = std::adjacent_find(b.begin(), b.end(), std::less_equal<>()) == b.end();

  const int n = B.i_max();
  const double top = B.last_breakpoint();
  report.surrogate_ratio = B(top) / top;
  report.surrogate_bound = b[n - 1] + (B.gamma() + std::ldexp(1.0, n - 1) * b[0]) / top;
  report.surrogate_holds = report.surrogate_ratio <= report.surrogate_bound;
  return report;
}

MajorantReport verify_majorant(const Coefficient& c, const ConcaveMajorant& B) {
  const auto samples = log_samples(1e-6, B.last_breakpoint(), 200);
  return verify_majorant(c, B, samples);
}

// --- blowup design ----------------------------------------------------------

DesignError::DesignError(const std::string& what, std::vector<DeltaTrial> trace)
    : std::runtime_error(what), trace_(std::move(trace)) {}

double lambda_value(const BlowupDesign& d, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("lambda_value: need m >= 0");
  const double M = d.mass;
  const double q = d.q;
  return d.c2 * std::pow(d.k0, d.theta + 1.0) * std::pow(m, (q - 2.0) / q) + M * m -
         std::pow(M, q + 1.0) / (2.0 * (q + 1.0));
}

double pam_moment(double mass, double q, double delta) {
  const double dq = std::pow(delta, q);
  return (2.0 * (1.0 - mass * dq) / ((q + 1.0) * (q + 2.0)) + std::pow(mass, q + 1.0) / (q + 1.0)) *
         dq;
}

double mu_constant(const Potentials& p, double mass) {
  const double M = mass, P0 = p.limits().psi0, T = p.psi_tilde(2.0 / mass);
  return 1.0 + 128.0 * M * M * M * M - 32.0 * M * M * P0 + 64.0 * M * M * T + 8.0 * T * T +
         P0 * P0 - 32.0 * M * P0;
}

BlowupDesign partial_design(const Potentials& p, double mass, double theta, double alpha) {
  const Coefficient& c = p.coefficient();
  if (!(mass > 0.0)) throw std::invalid_argument("design: need M > 0");
  if (!c.integrable_at_infinity()) {
    throw std::domain_error("design: a is not integrable at infinity");
  }
  const DecrConstants k = compute_decr_constants(c, theta, alpha);
  if (!k.admissible()) {
    throw std::domain_error(fmt::format(
        "design: (theta, alpha) = ({}, {}) does not give finite gamma_theta and C_inf", theta,
        alpha));
  }

  BlowupDesign d;
  d.coefficient = c.name();
  d.mass = mass;
  d.theta = theta;
  d.alpha = alpha;
  d.gamma_theta = k.gamma_theta.value;
  d.c_infinity = k.c_infinity.value;
  d.q_floor = std::max(3.0 + theta, (5.0 + 3.0 * theta) / (alpha * (theta + 1.0) - theta));
  d.q = std::ceil((d.q_floor + 0.5) * 10.0 - 1e-9) / 10.0;

  const double q = d.q;
  for (int e = 0;; ++e) {
    if (e > 1000) throw std::domain_error("design: no dyadic eps_M found");
    const double eps = std::ldexp(1.0, -e);
    const double tail = tail_value(c, 1.0 / eps);
    if (q * (q + 1.0) / (mass * mass) * tail <= 0.5) {
      d.eps_m = eps;
      d.eps_tail = tail;
      break;
    }
  }

  d.psi0 = p.limits().psi0;
  d.psi_tilde_2m = p.psi_tilde(2.0 / mass);
  d.c1 = (2.0 + (q + 2.0) * std::pow(mass, q + 1.0)) / ((q + 1.0) * (q + 2.0));
  d.c2 = q * (q - 1.0) * (d.gamma_theta - d.psi0 + d.eps_m) / d.eps_m;
  d.mu_m = mu_constant(p, mass);
  return d;
}

DeltaTrial evaluate_delta(const Potentials& p, const BlowupDesign& d, double delta, Index ny) {
  const PamProfile profile = pam_profile(d.mass, d.q, delta, ny);
  DeltaTrial trial;
  trial.delta = delta;
  trial.lyapunov = lyapunov_L1(p, profile.field);
  trial.k0 = std::pow(32.0 * d.mass * std::max(trial.lyapunov, 0.0) + d.mu_m,
                      1.0 / (2.0 * (2.0 + d.theta)));
  trial.mq0_exact = pam_moment(d.mass, d.q, delta);
  trial.mq0_discrete = moment_mq(profile.field, d.q);
  trial.mq0 = std::max(trial.mq0_exact, trial.mq0_discrete);
  BlowupDesign probe = d;
  probe.k0 = trial.k0;
  trial.lambda = lambda_value(probe, trial.mq0);
  return trial;
}

void adopt_delta(BlowupDesign& d, const DeltaTrial& trial, Index ny) {
  d.ny = ny;
  d.delta = trial.delta;
  d.lyapunov0 = trial.lyapunov;
  d.k0 = trial.k0;
  d.mq0_exact = trial.mq0_exact;
  d.mq0_discrete = trial.mq0_discrete;
  d.lambda0 = trial.lambda;
}

void select_delta(const Potentials& p, BlowupDesign& d, Index ny) {
  const double limit = pam_delta_limit(d.mass, d.q);
  d.trace.clear();
  for (int k = 1;; ++k) {
    const double delta = std::ldexp(limit, -(k + 1));
    if (delta < 1e-8) break;
    const DeltaTrial trial = evaluate_delta(p, d, delta, ny);
    d.trace.push_back(trial);
    if (trial.lambda < 0.0) {
      adopt_delta(d, trial, ny);
      return;
    }
  }
  throw DesignError(fmt::format("no admissible delta down to 1e-8 ({} trials, last Lambda = {:.6g})",
                                d.trace.size(), d.trace.empty() ? 0.0 : d.trace.back().lambda),
                    d.trace);
}

BlowupDesign design_blowup(const Potentials& p, double mass, double theta, double alpha, Index ny) {
  BlowupDesign d = partial_design(p, mass, theta, alpha);
  select_delta(p, d, ny);
  return d;
}

std::vector<std::string> BlowupDesign::violated_invariants() const {
  std::vector<std::string> out;
  if (!(q > q_floor)) out.push_back(fmt::format("q = {} not above {}", q, q_floor));
  if (!(q * (q + 1.0) / (mass * mass) * eps_tail <= 0.5)) out.push_back("eps_M tail condition");
  if (!(delta > 0.0 && delta < pam_delta_limit(mass, q))) out.push_back("delta out of range");
  if (!(k0 > 1.0)) out.push_back("K0 not above 1");
  if (!(mu_m > 0.0)) out.push_back("mu_M not positive");
  if (!(lambda0 < 0.0)) out.push_back("Lambda(m_q(0)) not negative");
  return out;
}

}  // namespace qsp
