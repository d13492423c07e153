#include <doctest.h>

#include <cmath>

#include "qsp/regime.hpp"

using namespace qsp;

TEST_CASE("gamma") {
  CHECK(compute_gamma(Coefficient::shifted_power(1, -2)).value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(compute_gamma(Coefficient::singular_power(1, 2.5, 1)).divergent);
  CHECK(compute_gamma(Coefficient::shifted_power(1, -1)).divergent);
  CHECK(std::abs(compute_gamma(Coefficient::from_expression("(1+r)^-2")).value - 0.5) < 1e-6);
}

TEST_CASE("decr constants") {
  const auto a2 = compute_decr_constants(Coefficient::shifted_power(1, -2), 0.5, 2.0);
  CHECK(a2.gamma_theta.value == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(a2.c_infinity.value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(a2.admissible());

  const auto s = compute_decr_constants(Coefficient::singular_power(1, 2.5, 1), 0.5, 1.5);
  CHECK(s.gamma_theta.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s.c_infinity.value == doctest::Approx(2.0).epsilon(1e-9));

  const auto r3 = compute_decr_constants(Coefficient::singular_power(1, 3, 0), 0.5, 2.0);
  CHECK(r3.gamma_theta.divergent);
  CHECK_FALSE(r3.admissible());

  CHECK_THROWS_AS(compute_decr_constants(Coefficient::shifted_power(1, -2), 0.5, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_decr_constants(Coefficient::shifted_power(1, -2), 0.5, 2.5),
                  std::invalid_argument);
}

TEST_CASE("classify") {
  CHECK(classify(Coefficient::shifted_power(1, -1)).clause == Clause::global);
  CHECK(classify(Coefficient::constant(1)).clause == Clause::global);
  const RegimeReport r2 = classify(Coefficient::shifted_power(1, -2));
  CHECK(r2.clause == Clause::blowup_condition1);
  CHECK(r2.gamma.value == doctest::Approx(0.5));
  CHECK(r2.decr.has_value());

  const DecrCandidate pair{0.5, 1.5};
  const RegimeReport rs = classify(Coefficient::singular_power(1, 2.5, 1), {&pair, 1});
  CHECK(rs.clause == Clause::blowup_decr);
  CHECK(rs.gamma.divergent);
  REQUIRE(rs.decr.has_value());
  CHECK(rs.decr->alpha == 1.5);

  // Tail integrable, gamma infinite and no admissible pair: unclassified.
  const RegimeReport silent = classify(Coefficient::singular_power(1, 3, 0));
  CHECK(silent.clause == Clause::unclassified);

  CHECK(to_string(Clause::blowup_condition1) == "blowup-via-(1)");
  CHECK(to_string(Clause::blowup_decr) == "blowup-via-(decr)");
}

TEST_CASE("classify is repeatable") {
  const auto c = Coefficient::from_expression("(1+r)^-2");
  const RegimeReport first = classify(c);
  for (int i = 0; i < 10; ++i) {
    const RegimeReport again = classify(c);
    CHECK(again.clause == first.clause);
    CHECK(again.gamma.value == first.gamma.value);
  }
}

TEST_CASE("concave majorant") {
  const auto a2 = Coefficient::shifted_power(1, -2);
  const ConcaveMajorant B = build_majorant(a2);
  for (int i = 0; i <= B.i_max(); ++i) {
    CHECK(std::abs(B.slopes()[i] - 1.0 / (1.0 + std::ldexp(1.0, i))) <= 1e-10);
  }
  CHECK(B(0.0) == doctest::Approx(0.5));
  CHECK(B(1.0) == doctest::Approx(1.0));
  CHECK(std::abs(B(3.0) - 11.0 / 6.0) <= 1e-10);
  CHECK(B(3.0) >= 0.75);
  CHECK_FALSE(B.truncated(1e6));
  CHECK(B.truncated(std::ldexp(1.0, 41)));

  // continuity at breakpoints
  for (int i = 1; i < 10; ++i) {
    const double x = std::ldexp(1.0, i);
    CHECK(B(x * (1 - 1e-12)) == doctest::Approx(B(x)).epsilon(1e-9));
    CHECK(B(x * (1 + 1e-12)) == doctest::Approx(B(x)).epsilon(1e-9));
  }

  const MajorantReport rep = verify_majorant(a2, B);
  CHECK(rep.samples == 200);
  CHECK(rep.violations.empty());
  CHECK(rep.concave);
  CHECK(rep.surrogate_holds);

  CHECK_THROWS_AS(build_majorant(Coefficient::shifted_power(1, -1)), std::domain_error);
  CHECK_THROWS_AS(build_majorant(Coefficient::singular_power(1, 2.5, 1)), std::domain_error);
}

TEST_CASE("blowup design for (1+r)^-2, M = 1") {
  const Potentials p(Coefficient::shifted_power(1, -2));
  const BlowupDesign d = design_blowup(p, 1.0, 0.5, 2.0);
  CHECK(d.q == 4.0);
  CHECK(d.eps_m == 0.015625);
  CHECK(d.mu_m == doctest::Approx(207.47222222222).epsilon(1e-12));
  CHECK(d.c1 == doctest::Approx(4.0 / 15.0));
  CHECK(d.c2 == doctest::Approx(588.0));
  CHECK(mu_constant(p, 1.0) == d.mu_m);
  CHECK(d.delta > 0.0);
  CHECK(d.delta < pam_delta_limit(1.0, 4.0));
  CHECK(d.k0 > 1.0);
  CHECK(d.lambda0 < 0.0);
  CHECK(d.violated_invariants().empty());
  CHECK(lambda_value(d, 0.0) == doctest::Approx(-0.1));
  CHECK(lambda_value(d, 1e-6) <= lambda_value(d, 1e-5));

  // Lambda along the search is nonincreasing as delta shrinks.
  for (std::size_t i = 1; i < d.trace.size(); ++i) {
    CHECK(d.trace[i].delta < d.trace[i - 1].delta);
    CHECK(d.trace[i].lambda <= d.trace[i - 1].lambda);
  }
  CHECK(d.trace.back().lambda == d.lambda0);
}

TEST_CASE("moment of the pam profile") {
  CHECK(pam_moment(1.0, 4.0, 0.1) == doctest::Approx(2.6666e-5).epsilon(1e-4));
  CHECK(pam_moment(1.0, 4.0, 0.05) < pam_moment(1.0, 4.0, 0.1));
}

TEST_CASE("design refuses non-integrable tails") {
  const Potentials p(Coefficient::shifted_power(1, -1));
  CHECK_THROWS_AS(partial_design(p, 1.0, 0.5, 2.0), std::domain_error);
}
