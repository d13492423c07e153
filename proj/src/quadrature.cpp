#include "qsp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace qsp::quad {

QuadratureError::QuadratureError(const std::string& what, double achieved_error)
    : std::runtime_error(fmt::format("{} (achieved error estimate {:.3e})", what, achieved_error)),
      achieved_error_(achieved_error) {}

Result integrate(const Integrand& g, double a, double b, double tol) {
  if (a == b) return {};
  double error = 0.0;
  double l1 = 0.0;
  // Boost reports the error of the reference-interval sum without the
  // half-width factor, so short intervals never meet its own test. Mapping
  // onto [0, 1] keeps the factor at 1/2.
  const double width = b - a;
  auto mapped = [&](double t) { return g(a + width * t) * width; };
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      mapped, 0.0, 1.0, 15, 1e-13, &error, &l1);
  if (!std::isfinite(value)) {
    throw QuadratureError(fmt::format("non-finite integral on [{:.6g}, {:.6g}]", a, b), error);
  }
  if (error > std::max(tol, 1e-12 * l1)) {
    throw QuadratureError(fmt::format("no convergence on [{:.6g}, {:.6g}]", a, b), error);
  }
  return {value, error};
}

Result integrate_graded(const Integrand& g, double lo, double hi, double tol) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("integrate_graded: need 0 < lo <= hi");
  }
  Result total;
  const int blocks = std::max(1, static_cast<int>(std::ceil(std::log2(hi / lo))));
  const double block_tol = tol / blocks;
  double left = lo;
  for (int k = 0; k < blocks; ++k) {
    const double right = k + 1 == blocks ? hi : std::min(hi, 2.0 * left);
    const Result piece = integrate(g, left, right, block_tol);
    total.value += piece.value;
    total.error += piece.error;
    left = right;
    if (left >= hi) break;
  }
  return total;
}

Result integrate_tail(const Integrand& g, double r, double tol) {
  if (!(r > 0.0)) throw std::invalid_argument("integrate_tail: need r > 0");

  Result total;
  double prev_block = 0.0;
  double prev_ratio = std::numeric_limits<double>::quiet_NaN();
  double left = r;
  for (int k = 0; k < 4000; ++k) {
    const double right = 2.0 * left;
    if (!std::isfinite(right) || right > 1e300) break;
    const Result block = integrate(g, left, right, 0.01 * tol);
    total.value += block.value;
    total.error += block.error;
    left = right;

    if (block.value == 0.0 || block.value <= 1e-18 * std::abs(total.value)) {
      return total;
    }
    if (k >= 3 && prev_block > 0.0) {
      const double ratio = block.value / prev_block;
      if (ratio > 0.0 && ratio < 1.0 && std::isfinite(prev_ratio)) {
        // Remainder of a geometric series and its sensitivity to the ratio.
        const double remainder = block.value * ratio / (1.0 - ratio);
        const double drift = std::abs(ratio - prev_ratio);
        const double remainder_error =
            block.value / ((1.0 - ratio) * (1.0 - ratio)) * drift + 1e-16 * remainder;
        if (remainder_error <= 0.5 * tol && remainder <= 1e6 * std::max(1.0, total.value)) {
          total.value += remainder;
          total.error += remainder_error;
          return total;
        }
      }
      prev_ratio = ratio;
    }
    prev_block = block.value;
  }
  throw QuadratureError(fmt::format("tail integral from {:.6g} did not converge", r),
                        std::abs(prev_block));
}

std::vector<double> blocks_up(const Integrand& g, double start, int count) {
  std::vector<double> out;
  out.reserve(count);
  double left = start;
  for (int k = 0; k < count; ++k, left *= 2.0) {
    out.push_back(integrate(g, left, 2.0 * left, 0.0).value);
  }
  return out;
}

std::vector<double> blocks_down(const Integrand& g, double start, int count) {
  std::vector<double> out;
  out.reserve(count);
  double right = start;
  for (int k = 0; k < count; ++k, right *= 0.5) {
    out.push_back(integrate(g, 0.5 * right, right, 0.0).value);
  }
  return out;
}

bool decays_geometrically(const std::vector<double>& blocks) {
  if (blocks.size() < 12) throw std::invalid_argument("decays_geometrically: need >= 12 blocks");
  double sum = 0.0;
  for (double b : blocks) sum += b;
  const double last = blocks.back();
  if (last <= 1e-16 * sum) return true;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = blocks.size() - 10; k < blocks.size(); ++k) {
    const double ratio = blocks[k] / blocks[k - 1];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return hi < 1.0 - 1e-6 && hi - lo < 1e-3;
}

}  // namespace qsp::quad
