#pragma once

/*
 * Closed-form diffusion coefficients a(r) supplied as text.
 *
 * Grammar (whitespace insignificant):
 *
 *   expression ::= term { ("+" | "-") term }
 *   term       ::= unary { ("*" | "/") unary }
 *   unary      ::= "-" unary | power
 *   power      ::= primary [ "^" unary ]          (right-associative)
 *   primary    ::= number | "r" | call | "(" expression ")"
 *   call       ::= ("exp" | "ln" | "sqrt") "(" expression ")"
 *                | "pow" "(" expression "," expression ")"
 *   number     ::= digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
 */

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qsp::expr {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Domain errors (ln of a non-positive value, division by zero) and overflow.
class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Node;

/// Immutable expression tree over the single free variable `r`.
class Expression {
 public:
  /// Throws EvalError instead of returning a non-finite value.
  double operator()(double r) const;

  /// Fully parenthesized form; parsing it back gives an identical tree.
  std::string to_string() const;
  const std::string& source() const noexcept { return source_; }

 private:
  friend Expression parse(std::string_view text);
  Expression(std::shared_ptr<const Node> root, std::string source);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

Expression parse(std::string_view text);

inline double evaluate(const Expression& e, double r) { return e(r); }

struct PositivityReport {
  std::size_t samples = 0;
  std::vector<double> failing;  ///< sample points where a(r) <= 0
  bool passed() const noexcept { return failing.empty(); }
};

/// Log-spaced sampling check that the expression is positive on [r_min, r_max].
/// Evaluation errors are rethrown with the offending r in the message.
PositivityReport validate_positivity(const Expression& e, double r_min, double r_max,
                                     std::size_t samples);

}  // namespace qsp::expr
