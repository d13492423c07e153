#include <doctest.h>

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "qsp/expr.hpp"

using namespace qsp::expr;

namespace {
// Shortest text that parses back to the same double.
std::string fmt_text(double v) { return fmt::format("{}", v); }
}  // namespace

TEST_CASE("golden evaluations") {
  CHECK(parse("(1+r)^-2")(1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(parse("1/(1+r)")(1.0) == 0.5);
  CHECK(parse("2^3^2")(1.0) == 512.0);
  CHECK(parse("(1+r)/r^2.5")(1.0) == 2.0);
  CHECK(parse("ln(r)")(1.0) == 0.0);
  CHECK(parse("exp(0)")(3.0) == 1.0);
  CHECK(parse("sqrt(r)")(4.0) == 2.0);
  CHECK(parse("pow(r, 3)")(2.0) == 8.0);
  CHECK(parse("  r *\t2 ")(1.5) == 3.0);
  CHECK(parse("1.5e2")(1.0) == 150.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("1+2*3")(1.0) == 7.0);
  CHECK(parse("(1+2)*3")(1.0) == 9.0);
  CHECK(parse("8/4/2")(1.0) == 1.0);
  CHECK(parse("10-4-3")(1.0) == 3.0);
  CHECK(parse("-2^2")(1.0) == -4.0);
  CHECK(parse("2^-1")(1.0) == 0.5);
  CHECK(parse("-r*3")(2.0) == -6.0);
  CHECK(parse("2*-3")(1.0) == -6.0);
}

TEST_CASE("precedence property a+b*c on random operands") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const std::string text = fmt_text(a) + "+" + fmt_text(b) + "*" + fmt_text(c);
    CHECK(parse(text)(1.0) == a + b * c);
  }
}

TEST_CASE("pretty-print round trip is exact") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-3, 1e3);
  for (const char* text : {"(1+r)^-2", "(1+r)/r^2.5", "exp(-r)+1/(2+r)", "pow(1+r,-0.5)*sqrt(r)",
                           "2^3^2 - -r", "ln(1+r)+1"}) {
    const Expression e = parse(text);
    const Expression back = parse(e.to_string());
    CHECK(back.to_string() == e.to_string());
    for (int i = 0; i < 100; ++i) {
      const double r = u(rng);
      CHECK(back(r) == e(r));
    }
  }
}

TEST_CASE("parse errors carry a position") {
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("1+"), ParseError);
  CHECK_THROWS_AS(parse("(1+r"), ParseError);
  CHECK_THROWS_AS(parse("x+1"), ParseError);
  CHECK_THROWS_AS(parse("sin(r)"), ParseError);
  CHECK_THROWS_AS(parse("pow(r)"), ParseError);
  CHECK_THROWS_AS(parse("exp(r, 2)"), ParseError);
  try {
    parse("1 + * r");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(parse("ln(r-2)")(1.0), EvalError);
  CHECK_THROWS_AS(parse("1/(r-1)")(1.0), EvalError);
  CHECK_THROWS_AS(parse("exp(r)")(1e4), EvalError);
  CHECK_THROWS_AS(parse("sqrt(r-2)")(1.0), EvalError);
}

TEST_CASE("positivity validation") {
  CHECK(validate_positivity(parse("(1+r)^-2"), 1e-6, 1e6, 1000).passed());
  CHECK(validate_positivity(parse("1/(1+r)"), 1e-3, 1e3, 100).passed());
  const PositivityReport bad = validate_positivity(parse("r-2"), 1.0, 10.0, 10);
  CHECK_FALSE(bad.passed());
  for (double r : bad.failing) CHECK(r <= 2.0);
}
