#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsp/coefficient.hpp"
#include "qsp/transform.hpp"

namespace qsp {

/// Estimate of a supremum over a range of r.
struct Supremum {
  double value = 0.0;   ///< +inf when divergent
  double argmax = 0.0;  ///< where the estimate was attained (the grid end if divergent)
  bool divergent = false;
};

/// sup over (0,1) of g: 2048-point log grid on [1e-8, 1] plus golden-section
/// refinement. Divergent when the growth over the last decade is above 1% and
/// not decelerating relative to the decade before.
Supremum sup_near_zero(const std::function<double(double)>& g);
/// sup over [1, inf) of g on [1, 1e8], mirrored.
Supremum sup_at_infinity(const std::function<double(double)>& g);

/// gamma = sup_{(0,1)} r int_r^inf a; infinite when the tail diverges.
Supremum compute_gamma(const Coefficient& c);

struct DecrCandidate {
  double theta = 0.5;
  double alpha = 2.0;
};

struct DecrConstants {
  double theta = 0.0;
  double alpha = 0.0;
  Supremum gamma_theta;  ///< sup_{(0,1)} r^{2+theta} a(r)
  Supremum c_infinity;   ///< sup_{[1,inf)} r^alpha a(r)

  bool admissible() const;
};

/// Throws std::invalid_argument unless theta > 0 and alpha in (theta/(1+theta), 2].
DecrConstants compute_decr_constants(const Coefficient& c, double theta, double alpha);

/// theta = 0.5 with alpha = 2.0, 1.9, ... down to the admissible bound.
std::vector<DecrCandidate> default_candidates();

enum class Clause { global, blowup_condition1, blowup_decr, unclassified };
std::string_view to_string(Clause c);

struct RegimeReport {
  std::string coefficient;
  bool tail_integrable = false;
  Certainty tail_certainty = Certainty::closed_form;
  Certainty value_certainty = Certainty::closed_form;  ///< how a and A were evaluated
  Supremum gamma;
  std::vector<DecrConstants> candidates;  ///< every pair evaluated, in order
  std::optional<DecrConstants> decr;      ///< first admissible pair
  bool default_candidates = false;
  Clause clause = Clause::unclassified;
  std::string note;
};

/// Regime verdict. Empty `candidates` means the default scan.
RegimeReport classify(const Coefficient& c, std::span<const DecrCandidate> candidates = {});

/// Piecewise-linear concave majorant of r int_r^inf a with dyadic breakpoints.
class ConcaveMajorant {
 public:
  ConcaveMajorant(double gamma, std::vector<double> slopes);

  double operator()(double r) const;
  double gamma() const noexcept { return gamma_; }
  /// b_i = int_{2^i}^inf a, i = 0..i_max
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  int i_max() const noexcept { return static_cast<int>(slopes_.size()) - 1; }
  double last_breakpoint() const;
  /// Evaluation beyond the last breakpoint extends the final slope.
  bool truncated(double r) const { return r > last_breakpoint(); }

 private:
  double gamma_;
  std::vector<double> slopes_;
  std::vector<double> offsets_;  ///< sum_{j<i} (b_j - b_{j+1}) 2^{j+1}
};

/// Requires an integrable tail and finite gamma; throws std::domain_error otherwise.
ConcaveMajorant build_majorant(const Coefficient& c, int i_max = 40);

struct MajorantViolation {
  double r = 0.0;
  double majorant = 0.0;  ///< B(r)
  double target = 0.0;    ///< -r A(r)
};

struct MajorantReport {
  std::size_t samples = 0;
  std::vector<MajorantViolation> violations;
  bool concave = false;
  double surrogate_ratio = 0.0;  ///< B(2^i_max) / 2^i_max
  double surrogate_bound = 0.0;  ///< b_{i_max-1} + (gamma + 2^{i_max-1} b_0) / 2^i_max
  bool surrogate_holds = false;

  bool passed() const { return violations.empty() && concave && surrogate_holds; }
};

std::vector<double> log_samples(double lo, double hi, int count);

MajorantReport verify_majorant(const Coefficient& c, const ConcaveMajorant& B,
                               std::span<const double> samples);
/// 200 log-spaced samples on [1e-6, 2^i_max].
MajorantReport verify_majorant(const Coefficient& c, const ConcaveMajorant& B);

/// One step of the delta search.
struct DeltaTrial {
  double delta = 0.0;
  double lyapunov = 0.0;  ///< L1(f0) on the discrete profile
  double k0 = 0.0;
  double mq0_exact = 0.0;
  double mq0_discrete = 0.0;
  double mq0 = 0.0;       ///< max of the exact and discrete initial moment
  double lambda = 0.0;    ///< Lambda_delta(mq0)
};

struct BlowupDesign {
  std::string coefficient;
  double mass = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double gamma_theta = 0.0;
  double c_infinity = 0.0;
  double q_floor = 0.0;  ///< max{3+theta, (5+3 theta)/(alpha(theta+1) - theta)}
  double q = 0.0;
  double eps_m = 0.0;
  double eps_tail = 0.0;  ///< int_{1/eps_M}^inf a
  double psi0 = 0.0;          ///< Psi(0)
  double psi_tilde_2m = 0.0;  ///< Psi~(2/M)
  double c1 = 0.0;
  double c2 = 0.0;
  double mu_m = 0.0;
  Index ny = 0;

  double delta = 0.0;
  double lyapunov0 = 0.0;
  double k0 = 0.0;
  double mq0_exact = 0.0;
  double mq0_discrete = 0.0;
  double lambda0 = 0.0;
  std::vector<DeltaTrial> trace;

  /// Machine-checkable design inequalities that fail; empty when all hold.
  std::vector<std::string> violated_invariants() const;
};

class DesignError : public std::runtime_error {
 public:
  DesignError(const std::string& what, std::vector<DeltaTrial> trace);
  const std::vector<DeltaTrial>& trace() const noexcept { return trace_; }

 private:
  std::vector<DeltaTrial> trace_;
};

/// Lambda(m) = C2 K0^{theta+1} m^{(q-2)/q} + M m - M^{q+1} / (2(q+1)).
double lambda_value(const BlowupDesign& d, double m);

/// Exact initial moment of the pam profile.
double pam_moment(double mass, double q, double delta);

/// mu_M = 1 + 128M^4 - 32M^2 Psi(0) + 64M^2 Psi~(2/M) + 8 Psi~(2/M)^2 + Psi(0)^2
/// - 32M Psi(0). Throws RangeError when the tail diverges.
double mu_constant(const Potentials& p, double mass);

/// q, eps_M, C1, C2 and mu_M for (theta, alpha); delta fields left empty.
BlowupDesign partial_design(const Potentials& p, double mass, double theta, double alpha);

/// Lyapunov value, K0, initial moment and Lambda for one delta.
DeltaTrial evaluate_delta(const Potentials& p, const BlowupDesign& d, double delta, Index ny);
/// Copies a trial into the delta fields of the design.
void adopt_delta(BlowupDesign& d, const DeltaTrial& trial, Index ny);

/// Halving search delta_k = 2^-k limit / 2, k >= 1, down to 1e-8; fills the
/// delta fields and the trace of the accepted design. Throws DesignError on
/// exhaustion.
void select_delta(const Potentials& p, BlowupDesign& d, Index ny);

BlowupDesign design_blowup(const Potentials& p, double mass, double theta, double alpha,
                           Index ny = 400);

}  // namespace qsp
