#include <doctest.h>

#include <cmath>

#include "qsp/diagnostics.hpp"
#include "qsp/regime.hpp"

using namespace qsp;

namespace {

FieldF constant(double value, double mass, Index ny) { return FieldF{Vector::Constant(ny, value), mass}; }

Vector sampled(Index n, double width, double (*g)(double)) {
  Vector h(n);
  for (Index j = 0; j < n; ++j) h[j] = g((static_cast<double>(j) + 0.5) * width);
  return h;
}

DiagnosticsRecord at(double t) {
  DiagnosticsRecord r;
  r.t = t;
  return r;
}

}  // namespace

TEST_CASE("lyapunov functional") {
  const Potentials p(Coefficient::shifted_power(1, -2));
  CHECK(lyapunov_L1(p, constant(1.0, 1.0, 100)) == doctest::Approx(0.0));
  const double c = 0.5, M = 2.0;
  CHECK(lyapunov_L1(p, constant(c, M, 100)) ==
        doctest::Approx(M * (p.psi(c) - M * p.psi1(c))).epsilon(1e-12));

  // pam profile against brute-force refinement; the layer at y = delta makes this first order
  auto pam_L1 = [&](Index ny) { return lyapunov_L1(p, pam_profile(1.0, 4.0, 0.1, ny).field); };
  const double oracle = pam_L1(400000);
  const double fine = pam_L1(100000);
  CHECK(std::abs(fine - oracle) <= 1.5e-3 * std::abs(oracle));
  const double e1 = std::abs(pam_L1(4000) - oracle), e2 = std::abs(pam_L1(16000) - oracle);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("energy E1") {
  CHECK(energy_E1(Vector::Zero(50), 0.02) == 0.0);
  CHECK(energy_E1(Vector::Constant(50, -1.0), 0.04) == doctest::Approx(-2.0));
  const Index n = 20000;
  const Vector h = sampled(n, 1.0 / n, [](double y) { return std::sin(2 * M_PI * y); });
  CHECK(energy_E1(h, 1.0 / n) == doctest::Approx(M_PI * M_PI - 1.0 / M_PI).epsilon(2e-4));
}

TEST_CASE("moment") {
  CHECK(moment_mq(constant(1.0, 1.0, 10), 4.0) == doctest::Approx(0.2).epsilon(1e-14));
  const double pam = moment_mq(pam_profile(1.0, 4.0, 0.1, 400).field, 4.0);
  CHECK(pam == doctest::Approx(pam_moment(1.0, 4.0, 0.1)).epsilon(1e-3));
  double prev = 1.0;
  for (double delta : {0.4, 0.2, 0.1, 0.05, 0.02}) {
    const double m = moment_mq(pam_profile(1.0, 4.0, delta, 2000).field, 4.0);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("coarse grids agree with the refinement oracle on smooth profiles") {
  const Potentials p(Coefficient::shifted_power(1, -2));
  const FieldU u = cosine_profile(1.0, 0.5, 4000);
  const FieldF coarse = u_to_f(u, 400), fine = u_to_f(u, 100000);
  auto close = [](double a, double b) { return std::abs(a - b) <= 5e-3 * std::abs(b); };
  CHECK(close(lyapunov_L1(p, coarse), lyapunov_L1(p, fine)));
  CHECK(close(energy_E1(psi_values(p, coarse), coarse.cell_width()),
              energy_E1(psi_values(p, fine), fine.cell_width())));
  CHECK(close(moment_mq(coarse, 4.0), moment_mq(fine, 4.0)));
}

TEST_CASE("sigma") {
  CHECK(sigma(1.0, 0.5, 0.0) == doctest::Approx(2.0));
  CHECK(sigma(1.0, 0.5, 1.0) == doctest::Approx(1.0 + std::exp(1.0)));
  CHECK(sigma(2.0, 2.0, 5.0) == doctest::Approx(0.5));
  CHECK_THROWS(sigma(1.0, 0.0, 1.0));
  CHECK_THROWS(sigma(1.0, 2.0, 1.0));
}

TEST_CASE("sup bound on the integrable-tail potential") {
  const Potentials p(Coefficient::shifted_power(1, -2));
  const FieldF f = constant(1.0, 1.0, 100);
  const double L1 = lyapunov_L1(p, f);
  const double mu = mu_constant(p, 1.0);
  CHECK(mu == doctest::Approx(207.4722222222).epsilon(1e-12));
  const CorollarySlack s = corollary_slack(p, f, L1, L1, mu);
  CHECK(s.corollary > 13.9);
  CHECK(s.lemma3 > 0.0);
  const Potentials global(Coefficient::shifted_power(1, -1));
  CHECK_THROWS_AS(corollary_slack(global, f, 0.0, 0.0, 1.0), RangeError);
}

TEST_CASE("energy and L1-norm bounds") {
  for (double beta : {-1.0, -2.0}) {
    const Potentials p(Coefficient::shifted_power(1, beta));
    for (double M : {0.5, 1.0, 2.0}) {
      const Lemma4Slack s = check_lemma4(p, constant(1.0 / M, M, 100));
      CHECK(s.gex5 >= 0.0);
      if (p.psi(1.0 / M) <= 0.0) CHECK(std::abs(s.gex6) < 1e-14);
      else CHECK(s.gex6 > 0.0);
    }
    for (double delta : {0.1, 0.05, 0.01}) {
      const Lemma4Slack s = check_lemma4(p, pam_profile(1.0, 4.0, delta, 400).field);
      CHECK(s.gex5 >= -kAnalyticTolerance);
      CHECK(s.gex6 >= -kAnalyticTolerance);
    }
  }
}

TEST_CASE("global bound chain") {
  const Potentials p(Coefficient::shifted_power(1, -1));
  const FieldF f = constant(1.0, 1.0, 100);
  const double L1 = lyapunov_L1(p, f);
  const GlobalSlack g = global_slack(p, f, L1, 1.0, 0.0);
  const double rhs = L1 + 1.0 + std::abs(p.psi(1.0)) + p.psi1(1.0);
  CHECK(g.prandtl == doctest::Approx(rhs));
  CHECK(g.prandtl >= 0.0);
  CHECK(g.l1norm >= 0.0);
  CHECK(g.barrier >= 0.0);
  CHECK(g.f_min_bound < 1.0);
  CHECK(g.f_min_bound >= 0.0);
}

TEST_CASE("series checks report the first violation") {
  DiagnosticsSeries s{at(0), at(1), at(2)};
  s[0].L1 = 1.0;
  s[1].L1 = 0.9;
  s[2].L1 = 0.95;
  const CheckVerdict ly = check_lyapunov(s);
  CHECK_FALSE(ly.passed);
  REQUIRE(ly.first_violation.has_value());
  CHECK(*ly.first_violation == 2);

  for (auto& r : s) {
    r.sigma = 2.0;
    r.f_max = 1.5;
  }
  s[1].f_max = 2.5;
  const CheckVerdict cmp = check_comparison(s);
  CHECK_FALSE(cmp.passed);
  CHECK(*cmp.first_violation == 1);

  DiagnosticsSeries empty;
  CHECK_FALSE(check_lyapunov(empty).applicable);
  CHECK_FALSE(check_comparison(empty).applicable);
}

TEST_CASE("moment ODE check") {
  const Potentials p(Coefficient::shifted_power(1, -2));
  const BlowupDesign d = design_blowup(p, 1.0, 0.5, 2.0);
  DiagnosticsSeries s{at(0.0), at(1e-11), at(2e-11)};
  s[0].m_q = d.mq0_discrete;
  s[1].m_q = d.mq0_discrete * 0.5;
  s[2].m_q = d.mq0_discrete * 0.25;
  DiagnosticsSeries good = s;
  CheckVerdict v = check_moment_ode(good, d);
  CHECK(v.passed);
  CHECK(good[0].slack_moment_ode.has_value());
  CHECK(v.tolerance == doctest::Approx(1e-3 * std::abs(lambda_value(d, d.mq0_discrete))));

  s[2].m_q = d.mq0_discrete;  // stops decreasing
  v = check_moment_ode(s, d);
  CHECK_FALSE(v.passed);
  CHECK(*v.first_violation == 1);

  DiagnosticsSeries one{at(0.0)};
  one[0].m_q = 1.0;
  CHECK_FALSE(check_moment_ode(one, d).applicable);
}
