#include "qsp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

namespace qsp {

namespace {

/// Cumulative integral of cell averages at the cell faces, face 0 = 0.
Vector cumulative(const Vector& cells, double width) {
  Vector out(cells.size() + 1);
  out[0] = 0.0;
  for (Index j = 0; j < cells.size(); ++j) out[j + 1] = out[j] + width * cells[j];
  return out;
}

/// Linear interpolation through increasing nodes xs, linear extrapolation at
/// both ends (falling back to the nearest value if that would lose positivity).
double interpolate(const std::vector<double>& xs, const std::vector<double>& vs, double x) {
  const std::size_t n = xs.size();
  if (n == 1) return vs[0];
  std::size_t k;
  if (x <= xs[0]) {
    k = 0;
  } else if (x >= xs[n - 1]) {
    k = n - 2;
  } else {
    k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
  }
  const double w = (x - xs[k]) / (xs[k + 1] - xs[k]);
  const double v = vs[k] + w * (vs[k + 1] - vs[k]);
  if (v > 0.0) return v;
  return x <= xs[0] ? vs[0] : vs[n - 1];
}

void require_positive(const Vector& v, const char* what) {
  if (v.size() == 0) throw std::invalid_argument(fmt::format("{}: empty field", what));
  for (Index j = 0; j < v.size(); ++j) {
    if (!(v[j] > 0.0) || !std::isfinite(v[j])) {
      throw std::invalid_argument(
          fmt::format("{}: sample {} = {:.17g} is not positive", what, j, v[j]));
    }
  }
}

template <class Field>
void write_field(const Field& field, const Vector& values, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("index,coordinate,value\n");
  for (Index j = 0; j < values.size(); ++j) {
    out.print("{},{:.17g},{:.17g}\n", j, field.center(j), values[j]);
  }
}

}  // namespace

FieldU make_field_u(Vector u) {
  require_positive(u, "FieldU");
  FieldU field{std::move(u), 0.0};
  field.mass = field.u.sum() * field.cell_width();
  return field;
}

FieldF make_field_f(Vector f, double mass) {
  require_positive(f, "FieldF");
  if (!(mass > 0.0)) throw std::invalid_argument("FieldF: mass must be positive");
  FieldF field{std::move(f), mass};
  field.f /= field.f.sum() * field.cell_width();
  return field;
}

FieldF u_to_f(const FieldU& field, Index ny) {
  if (ny < 2) throw std::invalid_argument("u_to_f: need at least two cells");
  const Index n = field.size();
  const double hx = field.cell_width();
  const Vector cum = cumulative(field.u, hx);
  const double mass = cum[n];

  std::vector<double> centers(n), values(n);
  for (Index i = 0; i < n; ++i) {
    centers[i] = field.center(i);
    values[i] = field.u[i];
  }

  FieldF out{Vector(ny), mass};
  const double hy = mass / static_cast<double>(ny);
  Index k = 0;
  for (Index j = 0; j < ny; ++j) {
    const double y = (static_cast<double>(j) + 0.5) * hy;
    while (k + 1 < n && cum[k + 1] <= y) ++k;
    if (!(cum[k + 1] > cum[k])) throw std::logic_error("u_to_f: cumulative is not increasing");
    const double x = (static_cast<double>(k) + (y - cum[k]) / (cum[k + 1] - cum[k])) * hx;
    out.f[j] = 1.0 / interpolate(centers, values, x);
  }
  out.f /= out.f.sum() * hy;
  return out;
}

FieldU f_to_u(const FieldF& field, Index n, double touchdown) {
  if (n < 2) throw std::invalid_argument("f_to_u: need at least two cells");
  const double f_min = field.f.minCoeff();
  if (f_min < touchdown) {
    throw TouchDownError(
        fmt::format("f_to_u: min f = {:.6g} below touch-down threshold {:.3g}", f_min, touchdown));
  }
  const Index ny = field.size();
  const double hy = field.cell_width();
  const Vector cum = cumulative(field.f, hy);

  std::vector<double> xs(ny), us(ny);
  for (Index j = 0; j < ny; ++j) {
    xs[j] = cum[j] + 0.5 * hy * field.f[j];
    us[j] = 1.0 / field.f[j];
  }

  FieldU out{Vector(n), field.mass};
  const double hx = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    out.u[i] = interpolate(xs, us, (static_cast<double>(i) + 0.5) * hx);
  }
  out.u *= field.mass / (out.u.sum() * hx);
  return out;
}

double pam_delta_limit(double mass, double q) {
  return std::min({1.0, 2.0 * mass, std::pow(2.0 * mass, -1.0 / q)});
}

PamProfile pam_profile(double mass, double q, double delta, Index ny) {
  if (!(mass > 0.0) || !(q > 0.0)) throw std::invalid_argument("pam_profile: need M > 0, q > 0");
  const double limit = pam_delta_limit(mass, q);
  if (!(delta > 0.0 && delta < limit)) {
    throw std::invalid_argument(
        fmt::format("pam_profile: delta = {:.6g} outside (0, {:.6g})", delta, limit));
  }
  const double floor = std::pow(delta, q);
  const double slope = 2.0 * (1.0 - mass * floor) / (delta * delta);
  const double hy = mass / static_cast<double>(ny);

  Vector f(ny);
  for (Index j = 0; j < ny; ++j) {
    const double a = std::max(delta - static_cast<double>(j) * hy, 0.0);
    const double b = std::max(delta - static_cast<double>(j + 1) * hy, 0.0);
    f[j] = floor + slope * 0.5 * (a * a - b * b) / hy;
  }

  PamProfile out;
  out.field = make_field_f(std::move(f), mass);
  out.sup_norm = 2.0 * (1.0 - mass * floor) / delta + floor;
  out.sup_bound_holds = out.sup_norm <= 2.0 / delta && out.field.f.maxCoeff() <= 2.0 / delta;
  return out;
}

FieldU cosine_profile(double mass, double amplitude, Index n) {
  if (!(std::abs(amplitude) < mass)) {
    throw std::invalid_argument("cosine_profile: need |amplitude| < mass for positivity");
  }
  const double pi = boost::math::constants::pi<double>();
  const double hx = 1.0 / static_cast<double>(n);
  Vector u(n);
  for (Index j = 0; j < n; ++j) {
    const double a = static_cast<double>(j) * hx;
    const double b = static_cast<double>(j + 1) * hx;
    u[j] = mass + amplitude * (std::sin(pi * b) - std::sin(pi * a)) / (pi * hx);
  }
  return make_field_u(std::move(u));
}

void write_csv(const FieldU& field, const std::filesystem::path& path) {
  write_field(field, field.u, path);
}

void write_csv(const FieldF& field, const std::filesystem::path& path) {
  write_field(field, field.f, path);
}

Vector read_csv_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::string line;
  std::vector<double> values;
  std::getline(in, line);  // header
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    try {
      values.push_back(std::stod(line.substr(comma == std::string::npos ? 0 : comma + 1)));
    } catch (const std::exception&) {
      throw std::runtime_error(fmt::format("{}:{}: malformed value", path.string(), row));
    }
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace qsp
