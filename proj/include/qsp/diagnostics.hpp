#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qsp/coefficient.hpp"
#include "qsp/transform.hpp"

namespace qsp {

struct BlowupDesign;

// Discrete conventions shared by every functional: cell averages, gradients
// as differences of neighbouring cells on interior faces, midpoint sums.

/// L1(f) = 1/2 ||d_y Psi(f)||^2 + int (Psi(f) - M Psi_1(f)) dy
double lyapunov_L1(const Potentials& p, const FieldF& f);

/// E1(h) = 1/2 ||h'||^2 + int min(h, 0) dy, for cell values of width `width`.
double energy_E1(const Vector& h, double width);

/// m_q = int_0^M y^q f dy, integrating y^q exactly over each cell.
double moment_mq(const FieldF& f, double q);

/// Sigma(t) = 1/M + e^{Mt} (1/m0 - 1/M), for 0 < m0 <= M.
double sigma(double mass, double m0, double t);

/// Cell values of Psi(f).
Vector psi_values(const Potentials& p, const FieldF& f);
/// ||d_y h||_2 with face differences.
double gradient_norm(const Vector& h, double width);

struct CorollarySlack {
  double corollary = 0.0;  ///< (32M max{L1(f0),0} + mu_M)^{1/2} - max Psi~(f)
  double lemma3 = 0.0;     ///< 32M L1(f) + mu_M - max Psi~(f)^2
};

/// Requires an integrable tail; throws RangeError otherwise.
CorollarySlack corollary_slack(const Potentials& p, const FieldF& f, double L1_f0,
                               double L1_now, double mu_m);

struct Lemma4Slack {
  double gex5 = 0.0;  ///< E1(h) - (1/4 ||h'||^2 - M^3 - M|Psi(1/M)|)
  double gex6 = 0.0;  ///< M^{3/2} ||h'|| + M|Psi(1/M)| - ||h||_1
};

/// Both bounds for h = Psi(f).
Lemma4Slack check_lemma4(const Potentials& p, const FieldF& f);

struct GlobalSlack {
  double prandtl = 0.0;      ///< RHS - 1/4 ||d_y Psi(f)||^2
  double l1norm = 0.0;       ///< 2M^{3/2} RHS^{1/2} + M|Psi(1/M)| - ||Psi(f)||_1
  double c7 = 0.0;           ///< sup-norm bound on Psi(f)
  double f_min_bound = 0.0;  ///< Psi^{-1}(-C7)
  double barrier = 0.0;      ///< min f - f_min_bound
  double h1_norm = 0.0;      ///< ||Psi(f)||_{H^1}
};

/// The explicit chain of the global-existence argument, with
/// RHS = L1(0) + M^3 + M|Psi(1/M)| + M^2 Psi_1(Sigma(t)).
GlobalSlack global_slack(const Potentials& p, const FieldF& f, double L1_0, double m0, double t);

/// One row of the diagnostics series; absent quantities stay empty.
struct DiagnosticsRecord {
  double t = 0.0;
  double dt = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  double u_max = 0.0;
  double mass_err = 0.0;
  std::optional<double> L1;
  std::optional<double> m_q;
  std::optional<double> sigma;
  std::optional<double> slack_corollary;
  std::optional<double> slack_lemma3;
  std::optional<double> slack_gex5;
  std::optional<double> slack_gex6;
  std::optional<double> slack_moment_ode;
  std::optional<double> slack_prandtl;
  std::optional<double> slack_l1norm;
  std::optional<double> f_min_bound;
  std::optional<double> h1_norm;
};

using DiagnosticsSeries = std::vector<DiagnosticsRecord>;

/// Outcome of one named check over a series.
struct CheckVerdict {
  std::string name;
  bool applicable = true;
  bool passed = true;
  std::optional<double> min_slack;
  std::optional<std::size_t> first_violation;  ///< record index
  double tolerance = 0.0;
  std::string detail;
};

constexpr double kAnalyticTolerance = 1e-8;

/// Sup-bound slacks of the records against -tolerance.
CheckVerdict check_corollary_bound(const DiagnosticsSeries& series);
CheckVerdict check_lemma4(const DiagnosticsSeries& series);
/// Interval slacks Lambda(m_q(t_i)) - (m_q(t_{i+1}) - m_q(t_i))/dt_i, stored
/// in slack_moment_ode of the left record; also strict decrease of m_q and
/// Lambda(m_q(t)) <= Lambda(m_q(0)) < 0. Tolerance 1e-3 |Lambda(m_q(0))|.
CheckVerdict check_moment_ode(DiagnosticsSeries& series, const BlowupDesign& design);
CheckVerdict check_global_bounds(const DiagnosticsSeries& series);
/// L1(t_{i+1}) <= L1(t_i) + 1e-8 (t_{i+1} - t_i).
CheckVerdict check_lyapunov(const DiagnosticsSeries& series);
/// max f <= Sigma(t) + 1e-8.
CheckVerdict check_comparison(const DiagnosticsSeries& series);

}  // namespace qsp
