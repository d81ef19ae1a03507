#pragma once

// Expression language for differentiable maps R^n -> R^m.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Variables are x1..xn, with the aliases x, y, z, w when n <= 4. A map source
// is a comma separated list of component expressions. Functions: exp, log,
// sin, cos, sqrt, bump, and the non-smooth abs, min, max. `bump(a)` is the
// smooth step that is 0 for a <= 0, 1 for a >= 1 and strictly increasing in
// between. The constant `pi` is predefined.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "strathom/error.hpp"

namespace strathom::dsl {

enum class Op {
  var,
  constant,
  add,
  sub,
  mul,
  div,
  neg,
  pow,
  exp,
  log,
  sin,
  cos,
  sqrt,
  bump,
  abs,
  min,
  max,
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::constant;
  double value = 0.0;
  std::size_t var = 0;
  std::vector<Expr> args;
};

inline Expr make_const(double v) { return std::make_shared<Node>(Node{Op::constant, v, 0, {}}); }
inline Expr make_var(std::size_t i) { return std::make_shared<Node>(Node{Op::var, 0.0, i, {}}); }
inline Expr make_node(Op op, std::vector<Expr> args) {
  return std::make_shared<Node>(Node{op, 0.0, 0, std::move(args)});
}

inline bool is_nonsmooth_op(Op op) { return op == Op::abs || op == Op::min || op == Op::max; }

inline const char* function_name(Op op) {
  switch (op) {
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::sqrt: return "sqrt";
    case Op::bump: return "bump";
    case Op::abs: return "abs";
    case Op::min: return "min";
    case Op::max: return "max";
    default: return nullptr;
  }
}

inline bool equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->args.size() != b->args.size()) return false;
  if (a->op == Op::constant && a->value != b->value) return false;
  if (a->op == Op::var && a->var != b->var) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

inline bool is_smooth(const Expr& e) {
  if (is_nonsmooth_op(e->op)) return false;
  for (const auto& a : e->args)
    if (!is_smooth(a)) return false;
  return true;
}

inline std::size_t max_var_index(const Expr& e) {
  std::size_t m = e->op == Op::var ? e->var + 1 : 0;
  for (const auto& a : e->args) m = std::max(m, max_var_index(a));
  return m;
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Fully parenthesized rendering; parses back to an equal tree.
inline std::string print(const Expr& e) {
  switch (e->op) {
    case Op::constant:
      return e->value < 0 || std::signbit(e->value) ? "(-" + format_number(-e->value) + ")"
                                                    : format_number(e->value);
    case Op::var: return "x" + std::to_string(e->var + 1);
    case Op::add: return "(" + print(e->args[0]) + " + " + print(e->args[1]) + ")";
    case Op::sub: return "(" + print(e->args[0]) + " - " + print(e->args[1]) + ")";
    case Op::mul: return "(" + print(e->args[0]) + " * " + print(e->args[1]) + ")";
    case Op::div: return "(" + print(e->args[0]) + " / " + print(e->args[1]) + ")";
    case Op::pow: return "(" + print(e->args[0]) + "^" + print(e->args[1]) + ")";
    case Op::neg: return "(-" + print(e->args[0]) + ")";
    default: {
      std::string s = function_name(e->op);
      s += "(";
      for (std::size_t i = 0; i < e->args.size(); ++i) {
        if (i) s += ", ";
        s += print(e->args[i]);
      }
      return s + ")";
    }
  }
}

// ---------------------------------------------------------------------------
// Forward-mode dual numbers

inline constexpr std::size_t kMaxVars = 16;

struct Dual {
  double v = 0.0;
  std::array<double, kMaxVars> d{};
};

namespace detail {

inline void scale_into(Dual& out, const Dual& a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out.d[i] = s * a.d[i];
}

/// Smooth step built from exp(-1/t); returns value and derivative.
inline std::pair<double, double> smooth_step(double a) {
  if (a <= 0.0) return {0.0, 0.0};
  if (a >= 1.0) return {1.0, 0.0};
  const double p = std::exp(-1.0 / a);
  const double q = std::exp(-1.0 / (1.0 - a));
  const double dp = p / (a * a);
  const double dq = -q / ((1.0 - a) * (1.0 - a));
  const double s = p + q;
  return {p / s, (dp * q - p * dq) / (s * s)};
}

inline bool is_integer_exponent(const Expr& e, double& out) {
  if (e->op != Op::constant) return false;
  const double v = e->value;
  if (std::nearbyint(v) != v || std::fabs(v) > 1e6) return false;
  out = v;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Compiled evaluation tape

struct Instr {
  Op op;
  int a = -1;
  int b = -1;
  double c = 0.0;
  std::size_t var = 0;
  bool integer_pow = false;
};

class Tape {
 public:
  Tape() = default;

  /// Appends `e` and returns the slot holding its value.
  int append(const Expr& e) {
    Instr ins{e->op};
    switch (e->op) {
      case Op::constant: ins.c = e->value; break;
      case Op::var: ins.var = e->var; break;
      case Op::pow: {
        ins.a = append(e->args[0]);
        double k = 0.0;
        if (detail::is_integer_exponent(e->args[1], k)) {
          ins.integer_pow = true;
          ins.c = k;
        } else {
          ins.b = append(e->args[1]);
        }
        break;
      }
      default:
        if (!e->args.empty()) ins.a = append(e->args[0]);
        if (e->args.size() > 1) ins.b = append(e->args[1]);
    }
    code_.push_back(ins);
    return static_cast<int>(code_.size()) - 1;
  }

  std::size_t size() const { return code_.size(); }

  void run(const double* x, std::vector<double>& slots) const {
    slots.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      const double a = in.a >= 0 ? slots[in.a] : 0.0;
      const double b = in.b >= 0 ? slots[in.b] : 0.0;
      double r = 0.0;
      switch (in.op) {
        case Op::constant: r = in.c; break;
        case Op::var: r = x[in.var]; break;
        case Op::add: r = a + b; break;
        case Op::sub: r = a - b; break;
        case Op::mul: r = a * b; break;
        case Op::div:
          if (b == 0.0) throw EvaluationError("division by zero");
          r = a / b;
          break;
        case Op::neg: r = -a; break;
        case Op::pow:
          if (in.integer_pow) {
            if (a == 0.0 && in.c < 0) throw EvaluationError("zero raised to a negative power");
            r = std::pow(a, in.c);
          } else {
            if (a <= 0.0) throw EvaluationError("real power of a non-positive base");
            r = std::pow(a, b);
          }
          break;
        case Op::exp: r = std::exp(a); break;
        case Op::log:
          if (a <= 0.0) throw EvaluationError("log of a non-positive number");
          r = std::log(a);
          break;
        case Op::sin: r = std::sin(a); break;
        case Op::cos: r = std::cos(a); break;
        case Op::sqrt:
          if (a < 0.0) throw EvaluationError("sqrt of a negative number");
          r = std::sqrt(a);
          break;
        case Op::bump: r = detail::smooth_step(a).first; break;
        case Op::abs: r = std::fabs(a); break;
        case Op::min: r = std::min(a, b); break;
        case Op::max: r = std::max(a, b); break;
      }
      if (!std::isfinite(r)) throw EvaluationError("non-finite intermediate value");
      slots[k] = r;
    }
  }

  void run(const double* x, std::size_t n, std::vector<Dual>& slots) const {
    using detail::scale_into;
    slots.resize(code_.size());
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      Dual r;
      const Dual* a = in.a >= 0 ? &slots[in.a] : nullptr;
      const Dual* b = in.b >= 0 ? &slots[in.b] : nullptr;
      auto chain = [&](double value, double slope) {
        r.v = value;
        scale_into(r, *a, slope, n);
      };
      switch (in.op) {
        case Op::constant: r.v = in.c; break;
        case Op::var:
          r.v = x[in.var];
          r.d[in.var] = 1.0;
          break;
        case Op::add:
          r.v = a->v + b->v;
          for (std::size_t i = 0; i < n; ++i) r.d[i] = a->d[i] + b->d[i];
          break;
        case Op::sub:
          r.v = a->v - b->v;
          for (std::size_t i = 0; i < n; ++i) r.d[i] = a->d[i] - b->d[i];
          break;
        case Op::mul:
          r.v = a->v * b->v;
          for (std::size_t i = 0; i < n; ++i) r.d[i] = a->d[i] * b->v + a->v * b->d[i];
          break;
        case Op::div: {
          if (b->v == 0.0) throw EvaluationError("division by zero");
          r.v = a->v / b->v;
          const double inv = 1.0 / b->v;
          for (std::size_t i = 0; i < n; ++i) r.d[i] = (a->d[i] - r.v * b->d[i]) * inv;
          break;
        }
        case Op::neg: chain(-a->v, -1.0); break;
        case Op::pow:
          if (in.integer_pow) {
            if (a->v == 0.0 && in.c < 0) throw EvaluationError("zero raised to a negative power");
            const double slope = in.c == 0.0 ? 0.0 : in.c * std::pow(a->v, in.c - 1.0);
            chain(std::pow(a->v, in.c), slope);
          } else {
            if (a->v <= 0.0) throw EvaluationError("real power of a non-positive base");
            r.v = std::pow(a->v, b->v);
            const double la = std::log(a->v);
            for (std::size_t i = 0; i < n; ++i)
              r.d[i] = r.v * (b->d[i] * la + b->v * a->d[i] / a->v);
          }
          break;
        case Op::exp: {
          const double e = std::exp(a->v);
          chain(e, e);
          break;
        }
        case Op::log:
          if (a->v <= 0.0) throw EvaluationError("log of a non-positive number");
          chain(std::log(a->v), 1.0 / a->v);
          break;
        case Op::sin: chain(std::sin(a->v), std::cos(a->v)); break;
        case Op::cos: chain(std::cos(a->v), -std::sin(a->v)); break;
        case Op::sqrt: {
          if (a->v < 0.0) throw EvaluationError("sqrt of a negative number");
          if (a->v == 0.0) throw NonDifferentiableError("sqrt differentiated at 0");
          const double s = std::sqrt(a->v);
          chain(s, 0.5 / s);
          break;
        }
        case Op::bump: {
          const auto [value, slope] = detail::smooth_step(a->v);
          chain(value, slope);
          break;
        }
        case Op::abs:
          if (a->v == 0.0) throw NonDifferentiableError("abs differentiated at its kink");
          chain(std::fabs(a->v), a->v > 0 ? 1.0 : -1.0);
          break;
        case Op::min:
        case Op::max: {
          if (a->v == b->v) throw NonDifferentiableError("min/max differentiated at a tie");
          const bool take_a = (in.op == Op::min) == (a->v < b->v);
          r = take_a ? *a : *b;
          break;
        }
      }
      if (!std::isfinite(r.v)) throw EvaluationError("non-finite intermediate value");
      slots[k] = r;
    }
  }

 private:
  std::vector<Instr> code_;
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

enum class Tok { number, ident, op, end };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t{Tok::end, "", 0.0, line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        t.kind = Tok::number;
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
          advance();
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t look = pos_ + 1;
          if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
          if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
            while (pos_ < look) advance();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
              advance();
          }
        }
        t.text = std::string(src_.substr(start, pos_ - start));
        char* end = nullptr;
        t.number = std::strtod(t.text.c_str(), &end);
        if (end != t.text.c_str() + t.text.size())
          throw ParseError(ParseError::Kind::syntax, "malformed number '" + t.text + "'", t.line,
                           t.column);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::ident;
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
          advance();
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::string_view("+-*/^(),").find(c) != std::string_view::npos) {
        t.kind = Tok::op;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(ParseError::Kind::syntax, std::string("unexpected character '") + c + "'",
                         line_, col_);
      }
      out.push_back(t);
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, std::size_t n) : toks_(Lexer(src).run()), n_(n) {}

  std::vector<Expr> list() {
    std::vector<Expr> out;
    out.push_back(expr());
    while (is_op(",")) {
      ++pos_;
      out.push_back(expr());
    }
    expect_end();
    return out;
  }

  Expr single() {
    Expr e = expr();
    expect_end();
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool is_op(const char* s) const { return peek().kind == Tok::op && peek().text == s; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(ParseError::Kind::syntax, what, peek().line, peek().column);
  }

  void expect_end() const {
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
  }

  void expect(const char* s) {
    if (!is_op(s)) {
      fail(std::string("expected '") + s + "'" +
           (peek().kind == Tok::end ? " before end of input" : " but found '" + peek().text + "'"));
    }
    ++pos_;
  }

  Expr expr() {
    Expr lhs = term();
    while (is_op("+") || is_op("-")) {
      const Op op = peek().text == "+" ? Op::add : Op::sub;
      ++pos_;
      lhs = make_node(op, {lhs, term()});
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (is_op("*") || is_op("/")) {
      const Op op = peek().text == "*" ? Op::mul : Op::div;
      ++pos_;
      lhs = make_node(op, {lhs, unary()});
    }
    return lhs;
  }

  Expr unary() {
    if (is_op("-")) {
      ++pos_;
      return make_node(Op::neg, {unary()});
    }
    if (is_op("+")) {
      ++pos_;
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (is_op("^")) {
      ++pos_;
      return make_node(Op::pow, {base, unary()});
    }
    return base;
  }

  Expr primary() {
    const Token t = peek();
    if (t.kind == Tok::number) {
      ++pos_;
      return make_const(t.number);
    }
    if (is_op("(")) {
      ++pos_;
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.kind == Tok::ident) {
      ++pos_;
      if (is_op("(")) return call(t);
      return identifier(t);
    }
    if (t.kind == Tok::end) fail("unexpected end of input");
    fail("unexpected '" + t.text + "'");
  }

  Expr call(const Token& name) {
    static const std::pair<const char*, Op> table[] = {
        {"exp", Op::exp},   {"log", Op::log}, {"sin", Op::sin}, {"cos", Op::cos},
        {"sqrt", Op::sqrt}, {"bump", Op::bump}, {"abs", Op::abs}, {"min", Op::min},
        {"max", Op::max}};
    Op op{};
    bool found = false;
    for (const auto& [s, o] : table) {
      if (name.text == s) {
        op = o;
        found = true;
      }
    }
    if (!found)
      throw ParseError(ParseError::Kind::unknown_identifier,
                       "unknown function '" + name.text + "'", name.line, name.column);
    ++pos_;  // '('
    std::vector<Expr> args{expr()};
    while (is_op(",")) {
      ++pos_;
      args.push_back(expr());
    }
    expect(")");
    const std::size_t want = (op == Op::min || op == Op::max) ? 2 : 1;
    if (args.size() != want)
      throw ParseError(ParseError::Kind::arity,
                       name.text + " takes " + std::to_string(want) + " argument(s)", name.line,
                       name.column);
    return make_node(op, std::move(args));
  }

  Expr identifier(const Token& t) {
    if (t.text == "pi") return make_const(3.14159265358979323846);
    std::size_t index = 0;
    bool is_var = false;
    if (t.text.size() > 1 && t.text[0] == 'x' &&
        t.text.find_first_not_of("0123456789", 1) == std::string::npos && t.text[1] != '0') {
      index = std::stoul(t.text.substr(1));
      if (index == 0)
        throw ParseError(ParseError::Kind::unknown_identifier, "variables start at x1", t.line,
                         t.column);
      index -= 1;
      is_var = true;
    } else if (t.text.size() == 1) {
      static const std::string aliases = "xyzw";
      const auto k = aliases.find(t.text[0]);
      if (k != std::string::npos) {
        if (n_ > 4)
          throw ParseError(ParseError::Kind::unknown_identifier,
                           "alias '" + t.text + "' is only available when n <= 4", t.line,
                           t.column);
        index = k;
        is_var = true;
      }
    }
    if (!is_var)
      throw ParseError(ParseError::Kind::unknown_identifier,
                       "unknown identifier '" + t.text + "'", t.line, t.column);
    if (index >= n_)
      throw ParseError(ParseError::Kind::arity,
                       "variable '" + t.text + "' exceeds the declared dimension " +
                           std::to_string(n_),
                       t.line, t.column);
    return make_var(index);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t n_;
};

}  // namespace detail

inline Expr parse_expr(std::string_view src, std::size_t n) {
  return detail::Parser(src, n).single();
}

inline std::vector<Expr> parse_list(std::string_view src, std::size_t n) {
  return detail::Parser(src, n).list();
}

// ---------------------------------------------------------------------------
// SmoothMap

/// Immutable map R^n -> R^m with an optional open domain given by a
/// conjunction of strict inequalities `g_k(x) > 0`.
class SmoothMap {
 public:
  SmoothMap() = default;

  SmoothMap(std::size_t n, std::vector<Expr> components, std::vector<Expr> domain = {})
      : n_(n), components_(std::move(components)), domain_(std::move(domain)) {
    if (n_ > kMaxVars)
      throw DimensionError("maps support at most " + std::to_string(kMaxVars) + " inputs");
    for (const auto& c : components_) {
      if (max_var_index(c) > n_) throw DimensionError("component references a variable >= n");
      outputs_.push_back(tape_.append(c));
    }
    for (const auto& d : domain_) {
      if (max_var_index(d) > n_) throw DimensionError("domain references a variable >= n");
      domain_slots_.push_back(domain_tape_.append(d));
    }
  }

  std::size_t input_dim() const { return n_; }
  std::size_t output_dim() const { return components_.size(); }
  const std::vector<Expr>& components() const { return components_; }
  const std::vector<Expr>& domain() const { return domain_; }
  bool has_domain() const { return !domain_.empty(); }

  bool is_smooth() const {
    for (const auto& c : components_)
      if (!dsl::is_smooth(c)) return false;
    return true;
  }

  /// Values of the domain predicates (all must be > 0 inside the domain).
  Eigen::VectorXd domain_values(const Eigen::VectorXd& x) const {
    check_arity(x);
    std::vector<double> slots;
    domain_tape_.run(x.data(), slots);
    Eigen::VectorXd out(static_cast<Eigen::Index>(domain_slots_.size()));
    for (std::size_t k = 0; k < domain_slots_.size(); ++k) out(k) = slots[domain_slots_[k]];
    return out;
  }

  bool in_domain(const Eigen::VectorXd& x) const {
    if (domain_.empty()) return true;
    try {
      return (domain_values(x).array() > 0.0).all();
    } catch (const EvaluationError&) {
      return false;
    }
  }

  /// Smallest predicate value; >= 0 means the point is in the closure (approximately).
  double domain_margin(const Eigen::VectorXd& x) const {
    if (domain_.empty()) return std::numeric_limits<double>::infinity();
    try {
      return domain_values(x).minCoeff();
    } catch (const EvaluationError&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  /// First-order distance to the domain boundary: min_k p_k / |grad p_k|.
  /// Infinite without predicates; predicates with zero gradient are skipped.
  double boundary_distance(const Eigen::VectorXd& x) const {
    check_arity(x);
    double best = std::numeric_limits<double>::infinity();
    if (domain_.empty()) return best;
    std::vector<Dual> slots;
    try {
      domain_tape_.run(x.data(), n_, slots);
    } catch (const Error&) {
      return 0.0;
    }
    for (int slot : domain_slots_) {
      const Dual& d = slots[static_cast<std::size_t>(slot)];
      double g = 0.0;
      for (std::size_t i = 0; i < n_; ++i) g += d.d[i] * d.d[i];
      if (d.v <= 0.0) return 0.0;
      if (g > 0.0) best = std::min(best, d.v / std::sqrt(g));
    }
    return best;
  }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
    check_domain(x);
    return eval_unchecked(x);
  }

  Eigen::VectorXd eval_unchecked(const Eigen::VectorXd& x) const {
    check_arity(x);
    std::vector<double> slots;
    tape_.run(x.data(), slots);
    Eigen::VectorXd out(static_cast<Eigen::Index>(outputs_.size()));
    for (std::size_t k = 0; k < outputs_.size(); ++k) out(k) = slots[outputs_[k]];
    return out;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    check_domain(x);
    return jacobian_unchecked(x);
  }

  Eigen::MatrixXd jacobian_unchecked(const Eigen::VectorXd& x) const {
    Eigen::VectorXd value;
    Eigen::MatrixXd jac;
    evaluate_unchecked(x, value, jac);
    return jac;
  }

  /// Value and Jacobian in one forward sweep.
  void evaluate_unchecked(const Eigen::VectorXd& x, Eigen::VectorXd& value,
                          Eigen::MatrixXd& jac) const {
    check_arity(x);
    std::vector<Dual> slots;
    tape_.run(x.data(), n_, slots);
    const auto m = static_cast<Eigen::Index>(outputs_.size());
    value.resize(m);
    jac.resize(m, static_cast<Eigen::Index>(n_));
    for (Eigen::Index k = 0; k < m; ++k) {
      const Dual& d = slots[outputs_[k]];
      value(k) = d.v;
      for (std::size_t i = 0; i < n_; ++i) jac(k, static_cast<Eigen::Index>(i)) = d.d[i];
    }
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (i) s += ", ";
      s += print(components_[i]);
    }
    return s;
  }

 private:
  void check_arity(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != n_)
      throw DimensionError("point has dimension " + std::to_string(x.size()) + ", map expects " +
                           std::to_string(n_));
  }
  void check_domain(const Eigen::VectorXd& x) const {
    check_arity(x);
    if (!in_domain(x)) throw DomainError("point lies outside the declared domain");
  }

  std::size_t n_ = 0;
  std::vector<Expr> components_;
  std::vector<Expr> domain_;
  Tape tape_;
  Tape domain_tape_;
  std::vector<int> outputs_;
  std::vector<int> domain_slots_;
};

/// Parses a comma separated component list into a map from R^n.
inline SmoothMap parse_map(std::string_view source, std::size_t n,
                           const std::vector<std::string>& domain = {}) {
  std::vector<Expr> dom;
  for (const auto& d : domain) dom.push_back(parse_expr(d, n));
  return SmoothMap(n, parse_list(source, n), std::move(dom));
}

/// Central finite-difference Jacobian (test oracle and diagnostics).
inline Eigen::MatrixXd finite_difference_jacobian(const SmoothMap& map, const Eigen::VectorXd& x) {
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(map.output_dim()), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = h0 * std::max(1.0, std::fabs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (map.eval_unchecked(xp) - map.eval_unchecked(xm)) / (xp(j) - xm(j));
  }
  return jac;
}

}  // namespace strathom::dsl
