#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace qsp::quad {

using Integrand = std::function<double(double)>;

/// Absolute tolerance shared by every potential and tail integral.
inline constexpr double kTolerance = 1e-10;

struct Result {
  double value = 0.0;
  double error = 0.0;  ///< embedded error estimate
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved_error);
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval [a, b].
Result integrate(const Integrand& g, double a, double b, double tol = kTolerance);

/// Integral over [lo, hi], 0 < lo < hi, split into geometric blocks
/// [lo, 2lo], [2lo, 4lo], ...  Grading resolves integrable singularities
/// near 0 and slow power decay alike.
Result integrate_graded(const Integrand& g, double lo, double hi, double tol = kTolerance);

/// Integral over [r, inf) of a positive integrand: dyadic blocks
/// [r 2^k, r 2^{k+1}] (the substitution s = r/t graded on t in (0,1]),
/// closed by a geometric remainder once the block ratio settles.
/// Throws QuadratureError if the blocks never settle.
Result integrate_tail(const Integrand& g, double r, double tol = kTolerance);

/// Block integrals over [start 2^k, start 2^{k+1}], k = 0..count-1.
std::vector<double> blocks_up(const Integrand& g, double start, int count);

/// Block integrals over [start 2^{-k-1}, start 2^{-k}], k = 0..count-1.
std::vector<double> blocks_down(const Integrand& g, double start, int count);

/// Numeric convergence verdict for a series of positive block integrals:
/// convergent when the blocks become negligible or decay geometrically with
/// a settled ratio below one.
bool decays_geometrically(const std::vector<double>& blocks);

}  // namespace qsp::quad
