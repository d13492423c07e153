#include "qsp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <variant>

#include <fmt/format.h>

namespace qsp::expr {

ParseError::ParseError(const std::string& what, std::size_t position)
    : std::runtime_error(fmt::format("syntax error at {}: {}", position, what)),
      position_(position) {}

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { exp, ln, sqrt, pow };

struct Literal {
  double value;
};
struct Variable {};
struct Negate {
  std::shared_ptr<const Node> operand;
};
struct Binary {
  BinaryOp op;
  std::shared_ptr<const Node> lhs, rhs;
};
struct Call {
  Function fn;
  std::vector<std::shared_ptr<const Node>> args;
};

struct Node {
  std::variant<Literal, Variable, Negate, Binary, Call> v;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

template <class T>
NodePtr make(T&& t) {
  return std::make_shared<const Node>(Node{std::forward<T>(t)});
}

double checked(double value, const char* what, double r) {
  if (!std::isfinite(value)) {
    throw EvalError(fmt::format("{} is not finite at r = {:.17g}", what, r));
  }
  return value;
}

double eval(const Node& n, double r);

double eval_binary(const Binary& b, double r) {
  const double x = eval(*b.lhs, r);
  const double y = eval(*b.rhs, r);
  switch (b.op) {
    case BinaryOp::add:
      return checked(x + y, "sum", r);
    case BinaryOp::sub:
      return checked(x - y, "difference", r);
    case BinaryOp::mul:
      return checked(x * y, "product", r);
    case BinaryOp::div:
      if (y == 0.0) throw EvalError(fmt::format("division by zero at r = {:.17g}", r));
      return checked(x / y, "quotient", r);
    case BinaryOp::pow:
      if (x < 0.0 && y != std::floor(y)) {
        throw EvalError(fmt::format("negative base to a fractional power at r = {:.17g}", r));
      }
      if (x == 0.0 && y < 0.0) {
        throw EvalError(fmt::format("zero to a negative power at r = {:.17g}", r));
      }
      return checked(std::pow(x, y), "power", r);
  }
  return 0.0;
}

double eval_call(const Call& c, double r) {
  const double x = eval(*c.args[0], r);
  switch (c.fn) {
    case Function::exp:
      return checked(std::exp(x), "exp", r);
    case Function::ln:
      if (x <= 0.0) throw EvalError(fmt::format("ln of non-positive value at r = {:.17g}", r));
      return checked(std::log(x), "ln", r);
    case Function::sqrt:
      if (x < 0.0) throw EvalError(fmt::format("sqrt of negative value at r = {:.17g}", r));
      return std::sqrt(x);
    case Function::pow:
      return eval_binary(Binary{BinaryOp::pow, c.args[0], c.args[1]}, r);
  }
  return 0.0;
}

double eval(const Node& n, double r) {
  return std::visit(
      [r](const auto& alt) -> double {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return alt.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return r;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(*alt.operand, r);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return eval_binary(alt, r);
        } else {
          return eval_call(alt, r);
        }
      },
      n.v);
}

std::string print(const Node& n) {
  return std::visit(
      [](const auto& alt) -> std::string {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return fmt::format("{:.17g}", alt.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return "r";
        } else if constexpr (std::is_same_v<T, Negate>) {
          return "(-" + print(*alt.operand) + ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          static constexpr const char* ops[] = {" + ", " - ", " * ", " / ", " ^ "};
          return "(" + print(*alt.lhs) + ops[static_cast<int>(alt.op)] + print(*alt.rhs) + ")";
        } else {
          static constexpr const char* names[] = {"exp", "ln", "sqrt", "pow"};
          std::string s = std::string(names[static_cast<int>(alt.fn)]) + "(";
          for (std::size_t i = 0; i < alt.args.size(); ++i) {
            if (i) s += ", ";
            s += print(*alt.args[i]);
          }
          return s + ")";
        }
      },
      n.v);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr e = expression();
    skip();
    if (pos_ != text_.size()) {
      throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
    }
    return e;
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= text_.size()) throw ParseError(fmt::format("expected '{}' at end of input", c), pos_);
      throw ParseError(fmt::format("expected '{}', found '{}'", c, text_[pos_]), pos_);
    }
    ++pos_;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      NodePtr rhs = term();
      lhs = make(Binary{c == '+' ? BinaryOp::add : BinaryOp::sub, lhs, rhs});
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      NodePtr rhs = unary();
      lhs = make(Binary{c == '*' ? BinaryOp::mul : BinaryOp::div, lhs, rhs});
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek() == '-') {
      ++pos_;
      return make(Negate{unary()});
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek() == '^') {
      ++pos_;
      return make(Binary{BinaryOp::pow, base, unary()});
    }
    return base;
  }

  NodePtr primary() {
    const char c = peek();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(fmt::format("unexpected '{}'", c), pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError("malformed number", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", pos_);
    }
    const std::string token(text_.substr(start, pos_ - start));
    return make(Literal{std::strtod(token.c_str(), nullptr)});
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "r") return make(Variable{});

    Function fn;
    std::size_t arity = 1;
    if (name == "exp") {
      fn = Function::exp;
    } else if (name == "ln") {
      fn = Function::ln;
    } else if (name == "sqrt") {
      fn = Function::sqrt;
    } else if (name == "pow") {
      fn = Function::pow;
      arity = 2;
    } else {
      throw ParseError(fmt::format("unknown identifier '{}'", name), start);
    }

    if (peek() != '(') throw ParseError(fmt::format("expected '(' after '{}'", name), pos_);
    ++pos_;
    std::vector<NodePtr> args;
    if (peek() != ')') {
      args.push_back(expression());
      while (peek() == ',') {
        ++pos_;
        args.push_back(expression());
      }
    }
    if (args.size() != arity) {
      throw ParseError(
          fmt::format("'{}' takes {} argument(s), got {}", name, arity, args.size()), start);
    }
    expect(')');
    return make(Call{fn, std::move(args)});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

double Expression::operator()(double r) const { return eval(*root_, r); }

std::string Expression::to_string() const { return print(*root_); }

Expression parse(std::string_view text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first == text.size()) throw ParseError("empty expression", 0);
  return Expression(Parser(text).parse_all(), std::string(text));
}

PositivityReport validate_positivity(const Expression& e, double r_min, double r_max,
                                     std::size_t samples) {
  if (!(r_min > 0.0 && r_min < r_max) || samples < 2) {
    throw std::invalid_argument("validate_positivity: need 0 < r_min < r_max and samples >= 2");
  }
  PositivityReport report;
  report.samples = samples;
  const double step = std::log(r_max / r_min) / static_cast<double>(samples - 1);
  for (std::size_t k = 0; k < samples; ++k) {
    const double r = k + 1 == samples ? r_max : r_min * std::exp(step * static_cast<double>(k));
    double value;
    try {
      value = e(r);
    } catch (const EvalError& err) {
      throw EvalError(fmt::format("{} (sampling r = {:.17g})", err.what(), r));
    }
    if (!(value > 0.0)) report.failing.push_back(r);
  }
  return report;
}

}  // namespace qsp::expr
