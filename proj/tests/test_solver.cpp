#include <doctest.h>

#include <cmath>

#include "qsp/solver.hpp"

using namespace qsp;

namespace {

double poisson_error(Index n) {
  const FieldU u = cosine_profile(2.0, 1.0, n);
  const FieldV v = solve_poisson(u);
  double worst = 0.0;
  for (Index j = 0; j < n; ++j) {
    worst = std::max(worst, std::abs(v.v[j] - std::cos(M_PI * u.center(j)) / (M_PI * M_PI)));
  }
  return worst;
}

SolverState constant_f(double value, double mass, Index ny) {
  SolverState s;
  s.form = Formulation::f_form;
  s.mass = mass;
  s.field = Vector::Constant(ny, value);
  return s;
}

}  // namespace

TEST_CASE("tridiagonal solve") {
  Vector lower(2), diag(3), upper(2), rhs(3);
  lower << 1, 1;
  diag << 4, 4, 4;
  upper << 1, 1;
  rhs << 5, 6, 5;
  solve_tridiagonal(lower, diag, upper, rhs);
  CHECK(rhs[0] == doctest::Approx(1.0));
  CHECK(rhs[1] == doctest::Approx(1.0));
  CHECK(rhs[2] == doctest::Approx(1.0));
}

TEST_CASE("poisson") {
  const FieldV zero = solve_poisson(make_field_u(Vector::Constant(64, 1.5)));
  CHECK(zero.v.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(zero.dvdx.cwiseAbs().maxCoeff() < 1e-15);

  const FieldV v = solve_poisson(cosine_profile(2.0, 1.0, 100));
  CHECK(std::abs(v.v.mean()) < 1e-15);
  CHECK(v.dvdx[0] == 0.0);
  CHECK(std::abs(v.dvdx[100]) < 1e-14);

  const double e1 = poisson_error(100), e2 = poisson_error(200);
  CHECK(e1 < 1e-4);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));

  CHECK_THROWS(solve_poisson(FieldU{Vector::Constant(10, 1.0), 2.0}, 2.0));
}

TEST_CASE("f-form step") {
  const Potentials p(Coefficient::shifted_power(1, -2));

  SUBCASE("1/M is stationary") {
    const SolverState s = constant_f(0.5, 2.0, 50);
    const StepResult r = step_f(p, s, 1e-2);
    CHECK((r.state.field.array() - 0.5).abs().maxCoeff() < 1e-14);
  }

  SUBCASE("unit integral is preserved") {
    FieldU u = cosine_profile(1.0, 0.5, 200);
    SolverState s = make_state(u_to_f(u, 200));
    for (int i = 0; i < 20; ++i) {
      s = step_f(p, s, 1e-3).state;
      const double drift = s.field.sum() / 200.0 - 1.0;
      CHECK(std::abs(drift) <= 1e-12 * (i + 1));
    }
  }

  SUBCASE("constant data tracks Sigma to second order in dt") {
    const double m0 = 0.5, M = 1.0;
    auto err = [&](double dt) {
      const SolverState s = constant_f(1.0 / m0, M, 16);
      const StepResult r = step_f(p, s, dt);
      const double exact = 1.0 / M + std::exp(M * dt) * (1.0 / m0 - 1.0 / M);
      return std::abs(r.state.field[0] - exact);
    };
    const double e1 = err(1e-3), e2 = err(5e-4);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
  }

  SUBCASE("rejects u-form state") {
    CHECK_THROWS(step_f(p, make_state(cosine_profile(1.0, 0.5, 10)), 1e-3));
  }
}

TEST_CASE("u-form step") {
  const Potentials p(Coefficient::shifted_power(1, -1));

  SUBCASE("u = M is stationary") {
    const SolverState s = make_state(make_field_u(Vector::Constant(40, 1.0)));
    const StepResult r = step_u(p, s, 1e-2);
    CHECK((r.state.field.array() - 1.0).abs().maxCoeff() < 1e-14);
  }

  SUBCASE("mass is conserved") {
    SolverState s = make_state(cosine_profile(1.0, 0.5, 100));
    for (int i = 0; i < 20; ++i) {
      s = step_u(p, s, 1e-3).state;
      CHECK(std::abs(s.field.mean() - 1.0) <= 1e-13);
    }
  }
}

TEST_CASE("integrate") {
  SUBCASE("stationary data is global") {
    const Potentials p(Coefficient::shifted_power(1, -2));
    RunOptions opt;
    opt.t_max = 1.0;
    int records = 0;
    const RunOutcome out = integrate(p, constant_f(1.0, 1.0, 64), opt,
                                     [&](const SolverState&) { ++records; });
    CHECK(out.verdict == Verdict::global_so_far);
    CHECK(out.final_time == 1.0);
    CHECK(records == 2);
    CHECK((out.final_state.field.array() - 1.0).abs().maxCoeff() < 1e-10);
  }

  SUBCASE("small perturbation decays in both formulations and they agree") {
    const Potentials p(Coefficient::shifted_power(1, -1));
    const FieldU u0 = cosine_profile(1.0, 0.01, 200);
    RunOptions opt;
    opt.t_max = 0.1;
    opt.dt_init = 1e-5;
    opt.dt_max = 0.25 / 200;
    const auto none = [](const SolverState&) {};
    const RunOutcome f = integrate(p, make_state(u_to_f(u0, 200)), opt, none);
    const RunOutcome u = integrate(p, make_state(u0), opt, none);
    REQUIRE(f.verdict == Verdict::global_so_far);
    REQUIRE(u.verdict == Verdict::global_so_far);
    const double dev0 = (u0.u.array() - 1.0).abs().maxCoeff();
    const double dev = (u.final_state.field.array() - 1.0).abs().maxCoeff();
    CHECK(dev < dev0);
    const FieldU from_f = f_to_u(f.final_state.as_f(), 200);
    CHECK((from_f.u - u.final_state.field).cwiseAbs().mean() < 1e-3 * dev0);
  }

  SUBCASE("touch-down is reported as blowup") {
    const Potentials p(Coefficient::shifted_power(1, -2));
    const PamProfile pam = pam_profile(1.0, 4.0, 0.05, 200);
    RunOptions opt;
    opt.t_max = 1.0;
    opt.touchdown = 1e-3 * pam.field.f.minCoeff();
    opt.dt_init = 1e-4 * pam.field.f.minCoeff();
    opt.dt_min = 1e-12 * pam.field.f.minCoeff();
    opt.step.dt_floor = 1e-14 * pam.field.f.minCoeff();
    const RunOutcome out = integrate(p, make_state(pam.field), opt, [](const SolverState&) {});
    CHECK(out.verdict == Verdict::blowup);
    REQUIRE(out.blowup_time.has_value());
    CHECK(*out.blowup_time < 1.0);
  }
}
