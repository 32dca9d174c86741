#pragma once

/*
 * Scalar expressions used to specify symbols, diagonal samplers and test
 * functions.
 *
 *   expr   ::= term { ("+" | "-") term }
 *   term   ::= factor { ("*" | "/") factor }
 *   factor ::= ("+" | "-") factor | base [ "^" integer ]
 *   base   ::= number | "i" | "pi" | var | func "(" expr ")" | "(" expr ")"
 *   func   ::= "sin" | "cos" | "exp" | "abs"
 *   var    ::= "x" | "theta" | "t"
 *
 * Whitespace is ignored. Numbers are decimal literals with an optional
 * exponent; the exponent of "^" is an integer that may carry a sign.
 * Evaluation is over the complex numbers.
 */

#include <glt/error.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>

namespace glt {

using cplx = std::complex<double>;

/** Which variables an expression may mention. */
enum class Role {
  A,      ///< a(x) on [0,1]
  F,      ///< test function F(t)
  K,      ///< symbol k(x, theta)
  Theta,  ///< trigonometric f(theta)
  Any,
};

enum Variable : unsigned { kVarX = 1u, kVarTheta = 2u, kVarT = 4u };

inline unsigned allowed_variables(Role role) {
  switch (role) {
    case Role::A: return kVarX;
    case Role::F: return kVarT;
    case Role::K: return kVarX | kVarTheta;
    case Role::Theta: return kVarTheta;
    case Role::Any: return kVarX | kVarTheta | kVarT;
  }
  return 0;
}

inline const char* role_name(Role role) {
  switch (role) {
    case Role::A: return "a";
    case Role::F: return "F";
    case Role::K: return "k";
    case Role::Theta: return "f";
    case Role::Any: return "any";
  }
  return "?";
}

/** Point at which an expression is evaluated. */
struct Point {
  double x = 0.0;
  double theta = 0.0;
  cplx t = 0.0;
};

namespace detail {

/** Shortest round-trip decimal form of a double. */
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

enum class Op : std::uint8_t {
  Const, VarX, VarTheta, VarT, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Abs
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  cplx value{};
  int exponent = 0;
  NodePtr lhs;
  NodePtr rhs;
};

inline NodePtr make_const(cplx v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

inline NodePtr make_leaf(Op op) {
  auto n = std::make_shared<Node>();
  n->op = op;
  return n;
}

inline NodePtr make_unary(Op op, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(arg);
  return n;
}

inline NodePtr make_binary(Op op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

inline NodePtr make_pow(NodePtr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->lhs = std::move(base);
  n->exponent = exponent;
  return n;
}

inline cplx int_pow(cplx base, int e) {
  if (e == 0) return 1.0;
  bool invert = e < 0;
  unsigned k = invert ? static_cast<unsigned>(-(e + 1)) + 1u : static_cast<unsigned>(e);
  cplx acc = 1.0;
  while (k) {
    if (k & 1u) acc *= base;
    base *= base;
    k >>= 1u;
  }
  return invert ? cplx(1.0) / acc : acc;
}

// Multiplication that keeps real operands exactly real; std::complex
// operator* yields nan for (inf + 0i) * (1 + 0i).
inline cplx mul(cplx a, cplx b) {
  if (a.imag() == 0.0 && b.imag() == 0.0) return a.real() * b.real();
  return a * b;
}

inline cplx div(cplx a, cplx b) {
  if (a.imag() == 0.0 && b.imag() == 0.0) return a.real() / b.real();
  return a / b;
}

inline cplx eval(const Node& n, const Point& p) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::VarX: return p.x;
    case Op::VarTheta: return p.theta;
    case Op::VarT: return p.t;
    case Op::Add: return eval(*n.lhs, p) + eval(*n.rhs, p);
    case Op::Sub: return eval(*n.lhs, p) - eval(*n.rhs, p);
    case Op::Mul: return mul(eval(*n.lhs, p), eval(*n.rhs, p));
    case Op::Div: return div(eval(*n.lhs, p), eval(*n.rhs, p));
    case Op::Pow: {
      cplx b = eval(*n.lhs, p);
      if (b.imag() == 0.0) return std::pow(b.real(), n.exponent);
      return int_pow(b, n.exponent);
    }
    case Op::Neg: return -eval(*n.lhs, p);
    case Op::Sin: {
      cplx a = eval(*n.lhs, p);
      return a.imag() == 0.0 ? cplx(std::sin(a.real())) : std::sin(a);
    }
    case Op::Cos: {
      cplx a = eval(*n.lhs, p);
      return a.imag() == 0.0 ? cplx(std::cos(a.real())) : std::cos(a);
    }
    case Op::Exp: {
      cplx a = eval(*n.lhs, p);
      return a.imag() == 0.0 ? cplx(std::exp(a.real())) : std::exp(a);
    }
    case Op::Abs: return std::abs(eval(*n.lhs, p));
  }
  return std::nan("");
}

inline unsigned free_variables(const Node& n) {
  switch (n.op) {
    case Op::VarX: return kVarX;
    case Op::VarTheta: return kVarTheta;
    case Op::VarT: return kVarT;
    case Op::Const: return 0;
    default: break;
  }
  unsigned v = 0;
  if (n.lhs) v |= free_variables(*n.lhs);
  if (n.rhs) v |= free_variables(*n.rhs);
  return v;
}

inline std::string format_complex(cplx v) {
  if (v.imag() == 0.0) return format_double(v.real());
  if (v.real() == 0.0) return format_double(v.imag()) + "*i";
  return "(" + format_double(v.real()) + "+" + format_double(v.imag()) + "*i)";
}

inline const char* func_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Abs: return "abs";
    default: return "?";
  }
}

inline std::string to_infix(const Node& n) {
  switch (n.op) {
    case Op::Const: {
      // Negative literals are parenthesised so the text re-parses unchanged.
      std::string s = format_complex(n.value);
      return s.front() == '-' ? "(" + s + ")" : s;
    }
    case Op::VarX: return "x";
    case Op::VarTheta: return "theta";
    case Op::VarT: return "t";
    case Op::Add: return "(" + to_infix(*n.lhs) + " + " + to_infix(*n.rhs) + ")";
    case Op::Sub: return "(" + to_infix(*n.lhs) + " - " + to_infix(*n.rhs) + ")";
    case Op::Mul: return "(" + to_infix(*n.lhs) + " * " + to_infix(*n.rhs) + ")";
    case Op::Div: return "(" + to_infix(*n.lhs) + " / " + to_infix(*n.rhs) + ")";
    case Op::Pow: return "(" + to_infix(*n.lhs) + ")^" + std::to_string(n.exponent);
    case Op::Neg: return "(-" + to_infix(*n.lhs) + ")";
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Abs: return std::string(func_name(n.op)) + "(" + to_infix(*n.lhs) + ")";
  }
  return "?";
}

inline std::string to_sexpr(const Node& n) {
  switch (n.op) {
    case Op::Const: return "(const " + format_complex(n.value) + ")";
    case Op::VarX: return "(var x)";
    case Op::VarTheta: return "(var theta)";
    case Op::VarT: return "(var t)";
    case Op::Add: return "(add " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
    case Op::Sub: return "(sub " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
    case Op::Mul: return "(mul " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
    case Op::Div: return "(div " + to_sexpr(*n.lhs) + " " + to_sexpr(*n.rhs) + ")";
    case Op::Pow: return "(pow " + to_sexpr(*n.lhs) + " " + std::to_string(n.exponent) + ")";
    case Op::Neg: return "(neg " + to_sexpr(*n.lhs) + ")";
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Abs: return "(" + std::string(func_name(n.op)) + " " + to_sexpr(*n.lhs) + ")";
  }
  return "?";
}

class Parser {
public:
  Parser(std::string_view src, unsigned allowed) : src_(src), allowed_(allowed) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

private:
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  NodePtr expr() {
    NodePtr lhs = term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      lhs = make_binary(c == '+' ? Op::Add : Op::Sub, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      lhs = make_binary(c == '*' ? Op::Mul : Op::Div, lhs, factor());
    }
    return lhs;
  }

  NodePtr factor() {
    char c = peek();
    if (c == '-' || c == '+') {
      ++pos_;
      NodePtr arg = factor();
      return c == '-' ? make_unary(Op::Neg, arg) : arg;
    }
    NodePtr b = base();
    if (peek() == '^') {
      ++pos_;
      b = make_pow(b, integer());
    }
    return b;
  }

  int integer() {
    skip_ws();
    std::size_t start = pos_;
    bool neg = false;
    if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) {
      neg = src_[pos_] == '-';
      ++pos_;
    }
    std::size_t digits = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (digits == pos_) {
      pos_ = start;
      fail("expected integer exponent");
    }
    int value = 0;
    auto [p, ec] = std::from_chars(src_.data() + digits, src_.data() + pos_, value);
    if (ec != std::errc{} || p != src_.data() + pos_) {
      pos_ = start;
      fail("exponent out of range");
    }
    return neg ? -value : value;
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ == start + 1 && src_[start] == '.') {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      if (digits == pos_) pos_ = mark;  // "2e" without digits: leave 'e' for the caller
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc{} || p != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return make_const(v);
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  NodePtr variable(Op op, unsigned bit, std::size_t at, std::string_view name) {
    if (!(allowed_ & bit)) {
      throw VariableError(at, "variable '" + std::string(name) + "' is not allowed here");
    }
    return make_leaf(op);
  }

  NodePtr base() {
    char c = peek();
    if (c == '\0') fail("unexpected end of input");
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (!is_alpha(c)) fail("unexpected '" + std::string(1, c) + "'");

    std::size_t start = pos_;
    while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    if (name == "i") return make_const(cplx(0.0, 1.0));
    if (name == "pi") return make_const(std::numbers::pi);
    if (name == "x") return variable(Op::VarX, kVarX, start, name);
    if (name == "theta") return variable(Op::VarTheta, kVarTheta, start, name);
    if (name == "t") return variable(Op::VarT, kVarT, start, name);

    Op op;
    if (name == "sin") op = Op::Sin;
    else if (name == "cos") op = Op::Cos;
    else if (name == "exp") op = Op::Exp;
    else if (name == "abs") op = Op::Abs;
    else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    expect('(');
    NodePtr arg = expr();
    expect(')');
    return make_unary(op, arg);
  }

  std::string_view src_;
  unsigned allowed_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/**
 * Immutable parsed expression. Copies share the same tree.
 */
class FuncExpr {
public:
  /** The constant 0. */
  FuncExpr() : FuncExpr(detail::make_const(0.0), Role::Any) {}

  static FuncExpr constant(cplx c) { return FuncExpr(detail::make_const(c), Role::Any); }

  cplx eval(const Point& p) const { return detail::eval(*root_, p); }
  cplx at_x(double x) const { return eval(Point{x, 0.0, 0.0}); }
  cplx at_theta(double theta) const { return eval(Point{0.0, theta, 0.0}); }
  cplx at_t(cplx t) const { return eval(Point{0.0, 0.0, t}); }
  cplx at(double x, double theta) const { return eval(Point{x, theta, 0.0}); }

  const std::string& source() const noexcept { return source_; }
  Role role() const noexcept { return role_; }
  unsigned variables() const { return detail::free_variables(*root_); }

  std::string to_string() const { return detail::to_sexpr(*root_); }

  friend FuncExpr operator+(const FuncExpr& a, const FuncExpr& b) {
    return combine(detail::Op::Add, a, b);
  }
  friend FuncExpr operator-(const FuncExpr& a, const FuncExpr& b) {
    return combine(detail::Op::Sub, a, b);
  }
  friend FuncExpr operator*(const FuncExpr& a, const FuncExpr& b) {
    return combine(detail::Op::Mul, a, b);
  }
  friend FuncExpr operator*(cplx c, const FuncExpr& a) {
    return combine(detail::Op::Mul, constant(c), a);
  }

  /** outer(inner): substitutes `inner` for every t in `outer`. */
  static FuncExpr compose(const FuncExpr& outer, const FuncExpr& inner) {
    return FuncExpr(substitute_t(outer.root_, inner.root_), inner.role_);
  }

private:
  friend FuncExpr parse_expr(std::string_view, Role);

  FuncExpr(detail::NodePtr root, Role role, std::string source)
      : root_(std::move(root)), role_(role), source_(std::move(source)) {}
  FuncExpr(detail::NodePtr root, Role role)
      : root_(std::move(root)), role_(role), source_(detail::to_infix(*root_)) {}

  static FuncExpr combine(detail::Op op, const FuncExpr& a, const FuncExpr& b) {
    Role r = a.role_ == b.role_ ? a.role_ : Role::Any;
    return FuncExpr(detail::make_binary(op, a.root_, b.root_), r);
  }

  static detail::NodePtr substitute_t(const detail::NodePtr& n, const detail::NodePtr& with) {
    if (n->op == detail::Op::VarT) return with;
    if (!n->lhs && !n->rhs) return n;
    auto copy = std::make_shared<detail::Node>(*n);
    if (n->lhs) copy->lhs = substitute_t(n->lhs, with);
    if (n->rhs) copy->rhs = substitute_t(n->rhs, with);
    return copy;
  }

  detail::NodePtr root_;
  Role role_;
  std::string source_;
};

/**
 * Parses `source` for the given role. Throws SyntaxError on malformed input
 * and VariableError when a variable outside the role's set appears.
 */
inline FuncExpr parse_expr(std::string_view source, Role role) {
  bool blank = true;
  for (char c : source) {
    if (static_cast<unsigned char>(c) > 127) throw SyntaxError(0, "non-ASCII input");
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') blank = false;
  }
  if (blank) throw SyntaxError(0, "empty expression");
  detail::Parser parser(source, allowed_variables(role));
  return FuncExpr(parser.parse(), role, std::string(source));
}

}  // namespace glt
