#include "qsp/suite.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "qsp/regime.hpp"
#include "qsp/run.hpp"

namespace qsp {

FieldF random_fourier_profile(double mass, Index ny, std::uint64_t seed, int modes) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> depth(0.1, 0.95);
  std::vector<double> a(static_cast<std::size_t>(modes));
  double total = 0.0;
  for (int k = 0; k < modes; ++k) {
    a[k] = coef(rng) / (k + 1);
    total += std::abs(a[k]);
  }
  const double scale = depth(rng) / total;
  Vector f(ny);
  const double h = mass / static_cast<double>(ny);
  for (Index j = 0; j < ny; ++j) {
    const double y = (static_cast<double>(j) + 0.5) * h;
    double v = 1.0;
    for (int k = 0; k < modes; ++k) v += scale * a[k] * std::cos((k + 1) * M_PI * y / mass);
    f[j] = v / mass;
  }
  return make_field_f(std::move(f), mass);
}

CheckVerdict lemma4_random_suite(const Potentials& p, double mass, int count, Index ny,
                                 std::uint64_t seed) {
  CheckVerdict v;
  v.name = fmt::format("lemma4_random[{}]", p.coefficient().name());
  v.tolerance = kAnalyticTolerance;
  for (int i = 0; i < count; ++i) {
    const FieldF f = random_fourier_profile(mass, ny, seed + static_cast<std::uint64_t>(i));
    const Lemma4Slack s = check_lemma4(p, f);
    const double worst = std::min(s.gex5, s.gex6);
    v.min_slack = v.min_slack ? std::min(*v.min_slack, worst) : worst;
    if (worst < -v.tolerance && !v.first_violation) {
      v.first_violation = static_cast<std::size_t>(i);
      v.passed = false;
    }
  }
  v.detail = fmt::format("{} profiles", count);
  return v;
}

CheckVerdict majorant_suite(const Coefficient& c) {
  CheckVerdict v;
  v.name = fmt::format("majorant[{}]", c.name());
  const ConcaveMajorant B = build_majorant(c);
  const MajorantReport r = verify_majorant(c, B);
  v.passed = r.passed();
  v.min_slack = r.surrogate_bound - r.surrogate_ratio;
  v.detail = fmt::format("{} samples, {} violations, concave {}, surrogate {:.6g} <= {:.6g}",
                         r.samples, r.violations.size(), r.concave, r.surrogate_ratio,
                         r.surrogate_bound);
  return v;
}

std::vector<CheckVerdict> validate_builtins() {
  std::vector<CheckVerdict> out;

  struct Expected {
    Coefficient c;
    Clause clause;
  };
  const std::vector<Expected> cases{
      {Coefficient::shifted_power(1, -1), Clause::global},
      {Coefficient::constant(1), Clause::global},
      {Coefficient::shifted_power(1, -2), Clause::blowup_condition1},
      {Coefficient::singular_power(1, 2.5, 1), Clause::blowup_decr},
  };
  for (const auto& e : cases) {
    CheckVerdict v;
    v.name = fmt::format("classify[{}]", e.c.name());
    const RegimeReport r = classify(e.c);
    v.passed = r.clause == e.clause;
    v.detail = fmt::format("{} (expected {})", to_string(r.clause), to_string(e.clause));
    out.push_back(v);
  }

  out.push_back(majorant_suite(Coefficient::shifted_power(1, -2)));
  for (double beta : {-1.0, -2.0}) {
    const Potentials p(Coefficient::shifted_power(1, beta));
    out.push_back(lemma4_random_suite(p, 1.0, 50, 400, 20240601));
  }

  for (const char* name : {"global-demo", "blowup-demo"}) {
    RunConfig cfg = preset(name);
    if (cfg.name == "global-demo") cfg.t_max = 1.0;
    const RunResult r = simulate(cfg);
    for (CheckVerdict c : r.summary.checks) {
      c.name = fmt::format("{}:{}", name, c.name);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace qsp
