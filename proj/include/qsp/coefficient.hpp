#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsp/expr.hpp"

namespace qsp {

/// How a verdict or value was obtained.
enum class Certainty { closed_form, numeric };
std::string_view to_string(Certainty c);

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// One summand of a closed-form coefficient: coef * r^exponent (power) or
/// coef * (1+r)^exponent (shifted).
struct Term {
  enum class Kind { power, shifted };
  Kind kind = Kind::power;
  double coef = 0.0;
  double exponent = 0.0;

  double operator()(double r) const;
  /// An antiderivative; logarithmic for exponent -1.
  double primitive(double r) const;
  bool is_log() const noexcept { return exponent == -1.0; }
};

/// A positive diffusion coefficient a(r) on (0, inf).
///
/// Builtin families keep closed-form primitives of a and of a(r)/r so every
/// potential and tail integral is exact; parsed expressions go through
/// adaptive quadrature. Copies share the immutable state.
class Coefficient {
 public:
  struct Builtin {
    std::string family;  ///< "constant", "shifted_power" or "singular_power"
    double c = 1.0;
    double p = 0.0;
    double beta = 0.0;
  };

  /// c (1+r)^beta
  static Coefficient shifted_power(double c, double beta);
  /// c r^{-p} (1+r)^beta
  static Coefficient singular_power(double c, double p, double beta);
  static Coefficient constant(double c);
  /// Parses and samples the expression for positivity on [1e-8, 1e8].
  static Coefficient from_expression(std::string_view text);

  /// a(r); throws expr::EvalError when the value is not finite and positive.
  double operator()(double r) const;

  const std::string& name() const noexcept;
  const std::optional<Builtin>& builtin() const noexcept;
  const expr::Expression* expression() const noexcept;

  bool has_closed_form() const noexcept;
  /// Closed-form summands of a; empty for quadrature-backed coefficients.
  const std::vector<Term>& terms() const noexcept;
  /// Closed-form summands of a(r)/r, when available.
  const std::optional<std::vector<Term>>& quotient_terms() const noexcept;

  bool integrable_at_infinity() const noexcept;
  bool integrable_at_zero() const noexcept;
  Certainty integrability_certainty() const noexcept;

 private:
  struct Impl;
  explicit Coefficient(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

inline double eval_a(const Coefficient& c, double r) { return c(r); }

struct TailIntegral {
  bool divergent = false;
  double value = 0.0;  ///< A(r) = -int_r^inf a(s) ds, <= 0
  double error = 0.0;
  Certainty certainty = Certainty::closed_form;
};

/// A(r) = -int_r^inf a(s) ds, or the divergent flag when a is not in L1(1, inf).
TailIntegral tail_integral(const Coefficient& c, double r);

struct Limits {
  bool integrable_at_infinity = false;  ///< a in L1(1, inf)
  bool integrable_at_zero = false;      ///< a in L1(0, 1)
  Certainty certainty = Certainty::closed_form;
  double psi0 = 0.0;    ///< Psi(0) = -||a||_{L1(1,inf)}, or -inf
  double psi1_0 = 0.0;  ///< Psi_1(0) = -int_1^inf a(s)/s ds, or -inf
  double psi_inf = 0.0; ///< lim Psi(r) as r -> inf, = int_0^1 a, or +inf
};

Limits compute_limits(const Coefficient& c);

/// The potentials built from a:
///   Psi(r)   = int_{1/r}^1 a(s) ds        (Psi' = a(1/r)/r^2, Psi(1) = 0)
///   Psi_1(r) = int_{1/r}^1 a(s)/s ds      (Psi_1' = r Psi', Psi_1(1) = 0)
///   Psi~(r)  = Psi(r) - Psi(0) = int_{1/r}^inf a(s) ds
class Potentials {
 public:
  explicit Potentials(Coefficient c);

  const Coefficient& coefficient() const noexcept { return coeff_; }
  const Limits& limits() const noexcept { return limits_; }

  double psi(double r) const;
  double psi1(double r) const;
  /// Throws RangeError when a is not in L1(1, inf).
  double psi_tilde(double r) const;
  /// Psi'(r) = a(1/r) / r^2
  double dpsi(double r) const;

  /// Psi~ when Psi(0) is finite, Psi otherwise. Differences match Psi's, and
  /// values near r = 0 keep full relative precision.
  double potential(double r) const;
  /// potential(r) + potential_offset() == Psi(r)
  double potential_offset() const noexcept;

  /// r with Psi(r) = h; RangeError outside (Psi(0), Psi(inf)).
  double psi_inverse(double h) const;

 private:
  Coefficient coeff_;
  Limits limits_;
};

}  // namespace qsp
