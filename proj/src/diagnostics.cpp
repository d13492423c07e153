#include "qsp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qsp/regime.hpp"

namespace qsp {

namespace {

Vector potential_values(const Potentials& p, const FieldF& f) {
  Vector out(f.size());
  for (Index j = 0; j < f.size(); ++j) out[j] = p.potential(f.f[j]);
  return out;
}

/// Scans one optional column; a record is violating when its slack is below
/// -tolerance. Records without the column are skipped.
CheckVerdict scan(std::string name, const DiagnosticsSeries& series,
                  std::optional<double> DiagnosticsRecord::*column, double tolerance) {
  CheckVerdict v;
  v.name = std::move(name);
  v.tolerance = tolerance;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& value = series[i].*column;
    if (!value) continue;
    v.min_slack = v.min_slack ? std::min(*v.min_slack, *value) : *value;
    if ((!(*value >= -tolerance)) && !v.first_violation) {
      v.first_violation = i;
      v.passed = false;
    }
  }
  if (!v.min_slack) {
    v.applicable = false;
    v.detail = "no records carry this quantity";
  }
  return v;
}

void merge(CheckVerdict& into, const CheckVerdict& other) {
  if (!other.applicable) return;
  if (!into.applicable) {
    const std::string name = into.name;
    into = other;
    into.name = name;
    return;
  }
  if (other.min_slack) {
    into.min_slack = into.min_slack ? std::min(*into.min_slack, *other.min_slack) : other.min_slack;
  }
  if (!other.passed) {
    into.passed = false;
    if (!into.first_violation || *other.first_violation < *into.first_violation) {
      into.first_violation = other.first_violation;
    }
  }
}

}  // namespace

Vector psi_values(const Potentials& p, const FieldF& f) {
  return potential_values(p, f).array() + p.potential_offset();
}

double gradient_norm(const Vector& h, double width) {
  if (h.size() < 2) return 0.0;
  const Vector d = (h.tail(h.size() - 1) - h.head(h.size() - 1)) / width;
  return std::sqrt(d.squaredNorm() * width);
}

double lyapunov_L1(const Potentials& p, const FieldF& f) {
  const double w = f.cell_width();
  const double M = f.mass;
  // Gradients from the shifted potential: same differences, better rounding.
  const Vector pot = potential_values(p, f);
  const double grad = gradient_norm(pot, w);
  double bulk = 0.0;
  for (Index j = 0; j < f.size(); ++j) {
    bulk += pot[j] + p.potential_offset() - M * p.psi1(f.f[j]);
  }
  return 0.5 * grad * grad + w * bulk;
}

double energy_E1(const Vector& h, double width) {
  const double grad = gradient_norm(h, width);
  return 0.5 * grad * grad + width * h.cwiseMin(0.0).sum();
}

double moment_mq(const FieldF& f, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("moment_mq: need q > 0");
  const double w = f.cell_width();
  double sum = 0.0;
  double left = 0.0;
  for (Index j = 0; j < f.size(); ++j) {
    const double right = static_cast<double>(j + 1) * w;
    sum += f.f[j] * (std::pow(right, q + 1.0) - std::pow(left, q + 1.0));
    left = right;
  }
  return sum / (q + 1.0);
}

double sigma(double mass, double m0, double t) {
  if (!(mass > 0.0) || !(m0 > 0.0) || m0 > mass * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        fmt::format("sigma: need 0 < m0 <= M, got m0 = {:.6g}, M = {:.6g}", m0, mass));
  }
  if (!(t >= 0.0)) throw std::invalid_argument("sigma: need t >= 0");
  return 1.0 / mass + std::exp(mass * t) * std::max(0.0, 1.0 / m0 - 1.0 / mass);
}

CorollarySlack corollary_slack(const Potentials& p, const FieldF& f, double L1_f0,
                               double L1_now, double mu_m) {
  if (!p.limits().integrable_at_infinity) {
    throw RangeError("corollary bound needs an integrable tail");
  }
  const double M = f.mass;
  const double top = p.psi_tilde(f.f.maxCoeff());
  CorollarySlack s;
  s.corollary = std::sqrt(32.0 * M * std::max(L1_f0, 0.0) + mu_m) - top;
  s.lemma3 = 32.0 * M * L1_now + mu_m - top * top;
  return s;
}

Lemma4Slack check_lemma4(const Potentials& p, const FieldF& f) {
  const double M = f.mass;
  const double w = f.cell_width();
  const Vector h = psi_values(p, f);
  const double grad = gradient_norm(h, w);
  const double psi_m = std::abs(p.psi(1.0 / M));
  Lemma4Slack s;
  s.gex5 = energy_E1(h, w) - (0.25 * grad * grad - M * M * M - M * psi_m);
  s.gex6 = std::pow(M, 1.5) * grad + M * psi_m - w * h.cwiseAbs().sum();
  return s;
}

GlobalSlack global_slack(const Potentials& p, const FieldF& f, double L1_0, double m0, double t) {
  const double M = f.mass;
  const double w = f.cell_width();
  const Vector h = psi_values(p, f);
  const double grad = gradient_norm(h, w);
  const double psi_m = std::abs(p.psi(1.0 / M));
  const double rhs = L1_0 + M * M * M + M * psi_m + M * M * p.psi1(sigma(M, m0, t));
  const double rhs_grad = 2.0 * std::sqrt(std::max(rhs, 0.0));
  const double rhs_l1 = std::pow(M, 1.5) * rhs_grad + M * psi_m;

  GlobalSlack s;
  s.prandtl = rhs - 0.25 * grad * grad;
  s.l1norm = rhs_l1 - w * h.cwiseAbs().sum();
  s.c7 = rhs_l1 / M + std::sqrt(M) * rhs_grad;
  const double target = -s.c7;
  if (target <= p.limits().psi0) {
    s.f_min_bound = 0.0;
  } else {
    try {
      s.f_min_bound = p.psi_inverse(target);
    } catch (const RangeError&) {
      s.f_min_bound = 0.0;  // below the representable range
    }
  }
  s.barrier = f.f.minCoeff() - s.f_min_bound;
  s.h1_norm = std::sqrt(h.squaredNorm() * w + grad * grad);
  return s;
}

CheckVerdict check_corollary_bound(const DiagnosticsSeries& series) {
  CheckVerdict v = scan("corollary_bound", series, &DiagnosticsRecord::slack_corollary,
                        kAnalyticTolerance);
  merge(v, scan("lemma3", series, &DiagnosticsRecord::slack_lemma3, kAnalyticTolerance));
  return v;
}

CheckVerdict check_lemma4(const DiagnosticsSeries& series) {
  CheckVerdict v = scan("lemma4", series, &DiagnosticsRecord::slack_gex5, kAnalyticTolerance);
  merge(v, scan("gex6", series, &DiagnosticsRecord::slack_gex6, kAnalyticTolerance));
  return v;
}

CheckVerdict check_moment_ode(DiagnosticsSeries& series, const BlowupDesign& design) {
  CheckVerdict v;
  v.name = "moment_ode";
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].m_q) rows.push_back(i);
  }
  if (rows.size() < 2) {
    v.applicable = false;
    v.detail = "fewer than two moment records";
    return v;
  }
  const double lambda0 = lambda_value(design, *series[rows.front()].m_q);
  v.tolerance = 1e-3 * std::abs(lambda0);
  if (!(lambda0 < 0.0)) {
    v.passed = false;
    v.first_violation = rows.front();
    v.detail = fmt::format("Lambda(m_q(0)) = {:.6g} is not negative", lambda0);
  }

  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    auto& left = series[rows[k]];
    const auto& right = series[rows[k + 1]];
    const double span = right.t - left.t;
    if (!(span > 0.0)) continue;
    const double lambda = lambda_value(design, *left.m_q);
    const double slack = lambda - (*right.m_q - *left.m_q) / span;
    left.slack_moment_ode = slack;
    v.min_slack = v.min_slack ? std::min(*v.min_slack, slack) : slack;
    const bool chain = lambda <= lambda0 + v.tolerance;
    const bool fell = *right.m_q < *left.m_q;
    if (!fell) decreasing = false;
    if ((slack < -v.tolerance || !chain || !fell) && !v.first_violation) {
      v.first_violation = rows[k];
      v.passed = false;
    }
  }
  if (v.detail.empty()) {
    v.detail = fmt::format("Lambda(m_q(0)) = {:.6g}; m_q {}", lambda0,
                           decreasing ? "strictly decreasing" : "not strictly decreasing");
  }
  return v;
}

CheckVerdict check_global_bounds(const DiagnosticsSeries& series) {
  CheckVerdict v = scan("global_bounds", series, &DiagnosticsRecord::slack_prandtl,
                        kAnalyticTolerance);
  merge(v, scan("l1norm", series, &DiagnosticsRecord::slack_l1norm, kAnalyticTolerance));
  CheckVerdict barrier;
  barrier.name = "barrier";
  barrier.applicable = false;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i].f_min_bound) continue;
    barrier.applicable = true;
    const double slack = series[i].f_min - *series[i].f_min_bound;
    barrier.min_slack = barrier.min_slack ? std::min(*barrier.min_slack, slack) : slack;
    if (slack < 0.0 && !barrier.first_violation) {
      barrier.first_violation = i;
      barrier.passed = false;
    }
  }
  merge(v, barrier);
  return v;
}

CheckVerdict check_lyapunov(const DiagnosticsSeries& series) {
  CheckVerdict v;
  v.name = "lyapunov";
  v.tolerance = 1e-8;
  const DiagnosticsRecord* prev = nullptr;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& rec = series[i];
    if (!rec.L1) continue;
    if (prev) {
      const double slack = *prev->L1 + v.tolerance * (rec.t - prev->t) - *rec.L1;
      v.min_slack = v.min_slack ? std::min(*v.min_slack, slack) : slack;
      if (slack < 0.0 && !v.first_violation) {
        v.first_violation = i;
        v.passed = false;
      }
    }
    prev = &rec;
  }
  if (!v.min_slack) {
    v.applicable = false;
    v.detail = "fewer than two L1 records";
  }
  return v;
}

CheckVerdict check_comparison(const DiagnosticsSeries& series) {
  CheckVerdict v;
  v.name = "comparison";
  v.tolerance = 1e-8;
  v.applicable = false;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!series[i].sigma) continue;
    v.applicable = true;
    const double slack = *series[i].sigma + v.tolerance - series[i].f_max;
    v.min_slack = v.min_slack ? std::min(*v.min_slack, slack) : slack;
    if (slack < 0.0 && !v.first_violation) {
      v.first_violation = i;
      v.passed = false;
    }
  }
  return v;
}

}  // namespace qsp
