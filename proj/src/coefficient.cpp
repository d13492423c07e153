#include "qsp/coefficient.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "qsp/quadrature.hpp"

namespace qsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

// ---------------------------------------------------------------------------
// Closed-form integrals of a sum of terms. Logarithmic summands are kept apart
// because the tail of 1/r - 1/(1+r) converges only as a pair.

struct LogParts {
  double power = 0.0;    // coefficient of ln r
  double shifted = 0.0;  // coefficient of ln(1+r)
  double scale = 0.0;
};

LogParts log_parts(const std::vector<Term>& terms) {
  LogParts parts;
  for (const Term& t : terms) {
    if (!t.is_log()) continue;
    (t.kind == Term::Kind::power ? parts.power : parts.shifted) += t.coef;
    parts.scale += std::abs(t.coef);
  }
  return parts;
}

bool tail_finite(const std::vector<Term>& terms) {
  for (const Term& t : terms) {
    if (!t.is_log() && t.exponent > -1.0) return false;
  }
  const LogParts logs = log_parts(terms);
  return std::abs(logs.power + logs.shifted) <= 1e-14 * logs.scale;
}

bool head_finite(const std::vector<Term>& terms) {
  for (const Term& t : terms) {
    if (t.kind == Term::Kind::power && t.exponent <= -1.0) return false;
  }
  return true;
}

/// int_r^inf of the sum; requires tail_finite.
double tail_closed(const std::vector<Term>& terms, double r) {
  double sum = 0.0;
  for (const Term& t : terms) {
    if (!t.is_log()) sum -= t.primitive(r);
  }
  // c ln r - c ln(1+r) integrated to infinity.
  return sum - log_parts(terms).shifted * std::log1p(1.0 / r);
}

/// int_0^r of the sum; requires head_finite.
double head_closed(const std::vector<Term>& terms, double r) {
  double sum = 0.0;
  for (const Term& t : terms) {
    sum += t.primitive(r) - (t.kind == Term::Kind::shifted ? t.primitive(0.0) : 0.0);
  }
  return sum;
}

/// int_x^y of the sum.
double integral_closed(const std::vector<Term>& terms, double x, double y) {
  double sum = 0.0;
  for (const Term& t : terms) {
    if (t.is_log()) {
      sum += t.kind == Term::Kind::power ? t.coef * std::log(y / x)
                                         : t.coef * (std::log1p(y) - std::log1p(x));
    } else {
      sum += t.primitive(y) - t.primitive(x);
    }
  }
  return sum;
}

}  // namespace

std::string_view to_string(Certainty c) {
  return c == Certainty::closed_form ? "closed-form" : "numeric";
}

double Term::operator()(double r) const {
  return coef * std::pow(kind == Kind::power ? r : 1.0 + r, exponent);
}

double Term::primitive(double r) const {
  const double base = kind == Kind::power ? r : 1.0 + r;
  if (is_log()) return coef * std::log(base);
  return coef * std::pow(base, exponent + 1.0) / (exponent + 1.0);
}

struct Coefficient::Impl {
  std::string name;
  std::optional<Builtin> builtin;
  std::optional<expr::Expression> expression;
  std::vector<Term> terms;
  std::optional<std::vector<Term>> quotient;
  bool integrable_at_infinity = false;
  bool integrable_at_zero = false;
  Certainty certainty = Certainty::closed_form;

  double raw(double r) const {
    if (expression) return (*expression)(r);
    const Builtin& b = *builtin;
    return b.c * std::pow(r, -b.p) * std::pow(1.0 + r, b.beta);
  }

  void decide_integrability() {
    if (!terms.empty()) {
      certainty = Certainty::closed_form;
      integrable_at_infinity = tail_finite(terms);
      integrable_at_zero = head_finite(terms);
      return;
    }
    certainty = Certainty::numeric;
    auto a = [this](double s) { return raw(s); };
    integrable_at_infinity = quad::decays_geometrically(quad::blocks_up(a, 1.0, 40));
    integrable_at_zero = quad::decays_geometrically(quad::blocks_down(a, 1.0, 40));
  }
};

Coefficient::Coefficient(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Coefficient Coefficient::singular_power(double c, double p, double beta) {
  if (!(c > 0.0) || !std::isfinite(p) || !std::isfinite(beta)) {
    throw std::invalid_argument("singular_power: need c > 0 and finite exponents");
  }
  auto impl = std::make_shared<Impl>();
  const char* family = p == 0.0 ? (beta == 0.0 ? "constant" : "shifted_power") : "singular_power";
  impl->builtin = Builtin{family, c, p, beta};
  impl->name = fmt::format("{}(c={:.17g}, p={:.17g}, beta={:.17g})", family, c, p, beta);

  if (beta >= 0.0 && is_integer(beta) && beta <= 64.0) {
    // Binomial expansion into pure powers.
    const unsigned n = static_cast<unsigned>(std::lround(beta));
    std::vector<Term> quotient;
    for (unsigned k = 0; k <= n; ++k) {
      const double coef = c * boost::math::binomial_coefficient<double>(n, k);
      impl->terms.push_back({Term::Kind::power, coef, static_cast<double>(k) - p});
      quotient.push_back({Term::Kind::power, coef, static_cast<double>(k) - p - 1.0});
    }
    impl->quotient = std::move(quotient);
  } else if (p == 0.0) {
    impl->terms.push_back({Term::Kind::shifted, c, beta});
    if (is_integer(beta)) {
      // 1/(r (1+r)^n) = 1/r - sum_{k=1}^n (1+r)^{-k}
      const int n = static_cast<int>(std::lround(-beta));
      std::vector<Term> quotient{{Term::Kind::power, c, -1.0}};
      for (int k = 1; k <= n; ++k) {
        quotient.push_back({Term::Kind::shifted, -c, -static_cast<double>(k)});
      }
      impl->quotient = std::move(quotient);
    }
  }
  impl->decide_integrability();
  return Coefficient(std::move(impl));
}

Coefficient Coefficient::shifted_power(double c, double beta) { return singular_power(c, 0.0, beta); }

Coefficient Coefficient::constant(double c) { return singular_power(c, 0.0, 0.0); }

Coefficient Coefficient::from_expression(std::string_view text) {
  auto impl = std::make_shared<Impl>();
  impl->expression = expr::parse(text);
  impl->name = std::string(text);
  const auto report = expr::validate_positivity(*impl->expression, 1e-8, 1e8, 400);
  if (!report.passed()) {
    throw expr::EvalError(fmt::format("coefficient '{}' is not positive at r = {:.6g}", text,
                                      report.failing.front()));
  }
  impl->decide_integrability();
  return Coefficient(std::move(impl));
}

double Coefficient::operator()(double r) const {
  const double value = impl_->raw(r);
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw expr::EvalError(fmt::format("a({:.17g}) = {:.17g} is not finite and positive", r, value));
  }
  return value;
}

const std::string& Coefficient::name() const noexcept { return impl_->name; }
const std::optional<Coefficient::Builtin>& Coefficient::builtin() const noexcept {
  return impl_->builtin;
}
const expr::Expression* Coefficient::expression() const noexcept {
  return impl_->expression ? &*impl_->expression : nullptr;
}
bool Coefficient::has_closed_form() const noexcept { return !impl_->terms.empty(); }
const std::vector<Term>& Coefficient::terms() const noexcept { return impl_->terms; }
const std::optional<std::vector<Term>>& Coefficient::quotient_terms() const noexcept {
  return impl_->quotient;
}
bool Coefficient::integrable_at_infinity() const noexcept { return impl_->integrable_at_infinity; }
bool Coefficient::integrable_at_zero() const noexcept { return impl_->integrable_at_zero; }
Certainty Coefficient::integrability_certainty() const noexcept { return impl_->certainty; }

TailIntegral tail_integral(const Coefficient& c, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("tail_integral: need r > 0");
  TailIntegral out;
  out.certainty = c.integrability_certainty();
  if (!c.integrable_at_infinity()) {
    out.divergent = true;
    return out;
  }
  if (c.has_closed_form()) {
    out.value = -tail_closed(c.terms(), r);
    return out;
  }
  const auto res = quad::integrate_tail([&c](double s) { return c(s); }, r);
  out.value = -res.value;
  out.error = res.error;
  return out;
}

Limits compute_limits(const Coefficient& c) {
  Limits lim;
  lim.integrable_at_infinity = c.integrable_at_infinity();
  lim.integrable_at_zero = c.integrable_at_zero();
  lim.certainty = c.integrability_certainty();

  lim.psi0 = lim.integrable_at_infinity ? tail_integral(c, 1.0).value : -kInf;

  if (const auto& q = c.quotient_terms()) {
    lim.psi1_0 = tail_finite(*q) ? -tail_closed(*q, 1.0) : -kInf;
  } else {
    auto g = [&c](double s) { return c(s) / s; };
    lim.certainty = Certainty::numeric;
    lim.psi1_0 = quad::decays_geometrically(quad::blocks_up(g, 1.0, 40))
                     ? -quad::integrate_tail(g, 1.0).value
                     : -kInf;
  }

  if (!lim.integrable_at_zero) {
    lim.psi_inf = kInf;
  } else if (c.has_closed_form()) {
    lim.psi_inf = head_closed(c.terms(), 1.0);
  } else {
    // int_0^1 a(t) dt = int_1^inf a(1/s) / s^2 ds
    lim.psi_inf = quad::integrate_tail([&c](double s) { return c(1.0 / s) / (s * s); }, 1.0).value;
  }
  return lim;
}

Potentials::Potentials(Coefficient c) : coeff_(std::move(c)), limits_(compute_limits(coeff_)) {}

double Potentials::psi(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("psi: need r > 0");
  if (r == 1.0) return 0.0;
  if (coeff_.has_closed_form()) return integral_closed(coeff_.terms(), 1.0 / r, 1.0);
  auto a = [this](double s) { return coeff_(s); };
  return r > 1.0 ? quad::integrate_graded(a, 1.0 / r, 1.0).value
                 : -quad::integrate_graded(a, 1.0, 1.0 / r).value;
}

double Potentials::psi1(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("psi1: need r > 0");
  if (r == 1.0) return 0.0;
  if (const auto& q = coeff_.quotient_terms()) return integral_closed(*q, 1.0 / r, 1.0);
  auto g = [this](double s) { return coeff_(s) / s; };
  return r > 1.0 ? quad::integrate_graded(g, 1.0 / r, 1.0).value
                 : -quad::integrate_graded(g, 1.0, 1.0 / r).value;
}

double Potentials::psi_tilde(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("psi_tilde: need r > 0");
  if (!limits_.integrable_at_infinity) {
    throw RangeError("psi_tilde: a is not integrable at infinity, Psi(0) = -inf");
  }
  return -tail_integral(coeff_, 1.0 / r).value;
}

double Potentials::dpsi(double r) const { return coeff_(1.0 / r) / (r * r); }

double Potentials::potential(double r) const {
  return limits_.integrable_at_infinity ? psi_tilde(r) : psi(r);
}

double Potentials::potential_offset() const noexcept {
  return limits_.integrable_at_infinity ? limits_.psi0 : 0.0;
}

double Potentials::psi_inverse(double h) const {
  if (!std::isfinite(h)) throw RangeError("psi_inverse: non-finite target");
  if (h >= limits_.psi_inf) {
    throw RangeError(fmt::format("psi_inverse: {:.17g} is not below sup Psi = {:.17g}", h,
                                 limits_.psi_inf));
  }
  if (h == 0.0) return 1.0;

  // Solve in x = ln r on the shifted potential, which keeps relative precision
  // near r = 0 when Psi(0) is finite.
  const double target = h - potential_offset();
  if (limits_.integrable_at_infinity && !(target > 0.0)) {
    throw RangeError(fmt::format("psi_inverse: {:.17g} is not above inf Psi = Psi(0) = {:.17g}",
                                 h, limits_.psi0));
  }
  auto residual = [&](double x) { return potential(std::exp(x)) - target; };

  double lo = 0.0, hi = 0.0;
  double f_lo = residual(0.0), f_hi = f_lo;
  for (double step = 1.0; f_lo > 0.0; step *= 2.0) {
    hi = lo, f_hi = f_lo;
    lo = -step;
    if (lo < -700.0) throw RangeError("psi_inverse: root below r = 1e-304");
    f_lo = residual(lo);
  }
  for (double step = 1.0; f_hi < 0.0; step *= 2.0) {
    lo = hi, f_lo = f_hi;
    hi = step;
    if (hi > 700.0) throw RangeError("psi_inverse: root above r = 1e304");
    f_hi = residual(hi);
  }
  if (f_lo == 0.0) return std::exp(lo);
  if (f_hi == 0.0) return std::exp(hi);

  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  const double x = 0.5 * (a + b);
  const double r = std::exp(x);
  if (std::abs(psi(r) - h) > 1e-10 * std::max(1.0, std::abs(h))) {
    throw RangeError(fmt::format("psi_inverse: no accurate root for {:.17g}", h));
  }
  return r;
}

}  // namespace qsp
