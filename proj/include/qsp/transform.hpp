#pragma once

#include <filesystem>
#include <stdexcept>

#include <Eigen/Core>

namespace qsp {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Cell averages of the density u on a uniform grid of [0, 1].
struct FieldU {
  Vector u;
  double mass = 0.0;  ///< midpoint-rule integral of u

  Index size() const { return u.size(); }
  double cell_width() const { return 1.0 / static_cast<double>(u.size()); }
  double center(Index j) const { return (static_cast<double>(j) + 0.5) * cell_width(); }
};

/// Cell averages of f = dF/dy on a uniform grid of [0, M]; integral one.
struct FieldF {
  Vector f;
  double mass = 0.0;  ///< M, the length of the y-domain

  Index size() const { return f.size(); }
  double cell_width() const { return mass / static_cast<double>(f.size()); }
  double center(Index j) const { return (static_cast<double>(j) + 0.5) * cell_width(); }
};

class TouchDownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validates positivity and records the discrete mass.
FieldU make_field_u(Vector u);
/// Validates positivity and rescales to unit integral on [0, mass].
FieldF make_field_f(Vector f, double mass);

/// u on [0,1] -> f on [0,M]: invert the piecewise-linear cumulative U at the
/// y-cell centers and set f = 1/u(F(y)); rescaled to unit integral.
FieldF u_to_f(const FieldU& field, Index ny);

/// f on [0,M] -> u on [0,1]: u(F(y_j)) = 1/f_j resampled to the x-cell
/// centers and rescaled to mass M. Throws TouchDownError when min f is below
/// `touchdown`.
FieldU f_to_u(const FieldF& field, Index n, double touchdown = 1e-6);

struct PamProfile {
  FieldF field;
  double sup_norm = 0.0;  ///< 2(1 - M delta^q)/delta + delta^q
  bool sup_bound_holds = false;  ///< sup_norm <= 2/delta
};

/// Largest admissible delta (exclusive): min{1, 2M, (2M)^{-1/q}}.
double pam_delta_limit(double mass, double q);

/// f0(y) = 2(1 - M delta^q)/delta^2 (delta - y)_+ + delta^q, sampled as exact
/// cell averages so the kink and delta below the cell width are represented.
PamProfile pam_profile(double mass, double q, double delta, Index ny);

/// u(x) = M + amplitude cos(pi x), as exact cell averages.
FieldU cosine_profile(double mass, double amplitude, Index n);

/// CSV with one row per cell: index,coordinate,value.
void write_csv(const FieldU& field, const std::filesystem::path& path);
void write_csv(const FieldF& field, const std::filesystem::path& path);
/// Reads the value column of a field CSV written by write_csv.
Vector read_csv_values(const std::filesystem::path& path);

}  // namespace qsp
