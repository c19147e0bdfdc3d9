#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slicebox/errors.hpp"

// Density expressions: a small infix language over the single variable x.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          exponent must not depend on x
//   primary := NUMBER | 'x' | NAME '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: exp(e), log(e), abs(e), gaussian_logpdf(x, mu, sigma),
// mixture(w1, f1, w2, f2, ...) = w1*f1 + w2*f2 + ...
//
// The text denotes f(x). log_evaluate() computes log f(x) in signed-log
// arithmetic so that log(exp(g)) is g itself and products become sums;
// exp(-(x-1000)^2/100) is therefore usable at x = 0.

namespace slicebox::expr {

enum class Op {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Exp,
  Log,
  Abs,
  GaussianLogPdf,
  Mixture,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable AST node. Constants are finite and non-negative; a negative
/// literal is Neg(Constant).
struct Node {
  Op op = Op::Constant;
  double value = 0.0;
  std::vector<NodePtr> args;
};

inline NodePtr constant(double v) {
  if (!std::isfinite(v)) throw ArgumentError("constant must be finite");
  if (v < 0.0) return std::make_shared<const Node>(Node{Op::Neg, 0.0, {constant(-v)}});
  return std::make_shared<const Node>(Node{Op::Constant, v, {}});
}

inline NodePtr variable() { return std::make_shared<const Node>(Node{Op::Variable, 0.0, {}}); }

inline NodePtr make(Op op, std::vector<NodePtr> args) {
  return std::make_shared<const Node>(Node{op, 0.0, std::move(args)});
}

inline bool depends_on_x(const Node& n) {
  if (n.op == Op::Variable) return true;
  return std::any_of(n.args.begin(), n.args.end(),
                     [](const NodePtr& a) { return depends_on_x(*a); });
}

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Constant && a.value != b.value) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

inline std::size_t node_count(const Node& n) {
  std::size_t c = 1;
  for (const auto& a : n.args) c += node_count(*a);
  return c;
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Exp:
      return "exp";
    case Op::Log:
      return "log";
    case Op::Abs:
      return "abs";
    case Op::GaussianLogPdf:
      return "gaussian_logpdf";
    case Op::Mixture:
      return "mixture";
    default:
      return nullptr;
  }
}

inline void print_into(std::string& out, const Node& n, int min_prec);

inline void print_child(std::string& out, const Node& child, int min_prec) {
  if (precedence(child.op) < min_prec) {
    out += '(';
    print_into(out, child, 0);
    out += ')';
  } else {
    print_into(out, child, min_prec);
  }
}

inline void print_into(std::string& out, const Node& n, int /*min_prec*/) {
  switch (n.op) {
    case Op::Constant:
      out += format_real(n.value);
      return;
    case Op::Variable:
      out += 'x';
      return;
    case Op::Add:
    case Op::Sub:
      print_child(out, *n.args[0], 1);
      out += n.op == Op::Add ? " + " : " - ";
      print_child(out, *n.args[1], 2);
      return;
    case Op::Mul:
    case Op::Div:
      print_child(out, *n.args[0], 2);
      out += n.op == Op::Mul ? " * " : " / ";
      print_child(out, *n.args[1], 3);
      return;
    case Op::Neg:
      out += '-';
      print_child(out, *n.args[0], 3);
      return;
    case Op::Pow:
      print_child(out, *n.args[0], 5);
      out += '^';
      print_child(out, *n.args[1], 3);
      return;
    default:
      out += function_name(n.op);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_into(out, *n.args[i], 0);
      }
      out += ')';
      return;
  }
}

}  // namespace detail

/// Canonical text for an AST; parse(print(e)) is structurally equal to e.
inline std::string print(const Node& n) {
  std::string out;
  detail::print_into(out, n, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    if (text_.empty()) throw ParseError(0, "empty expression");
    for (std::size_t i = 0; i < text_.size(); ++i) {
      if (static_cast<unsigned char>(text_[i]) > 127) throw ParseError(i, "non-ASCII character");
    }
    NodePtr root = expression();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    }
    return root;
  }

 private:
  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      skip_space();
      if (accept('+')) {
        lhs = make(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      skip_space();
      if (accept('*')) {
        lhs = make(Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    skip_space();
    if (accept('-')) return make(Op::Neg, {unary()});
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    skip_space();
    const std::size_t at = pos_;
    if (!accept('^')) return base;
    NodePtr exponent = unary();
    if (depends_on_x(*exponent)) throw ParseError(at, "exponent must not depend on x");
    return make(Op::Pow, {base, exponent});
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "expected number, 'x', function or '('");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(v)) {
      throw ParseError(start, "malformed number");
    }
    return constant(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "x") return variable();

    Op op;
    if (name == "exp") {
      op = Op::Exp;
    } else if (name == "log") {
      op = Op::Log;
    } else if (name == "abs") {
      op = Op::Abs;
    } else if (name == "gaussian_logpdf") {
      op = Op::GaussianLogPdf;
    } else if (name == "mixture") {
      op = Op::Mixture;
    } else {
      throw ParseError(start, "unknown identifier '" + std::string(name) +
                                  "' (known: x, exp, log, abs, gaussian_logpdf, mixture)");
    }

    skip_space();
    expect('(');
    std::vector<NodePtr> args{expression()};
    skip_space();
    while (accept(',')) {
      args.push_back(expression());
      skip_space();
    }
    expect(')');

    const std::size_t n = args.size();
    const bool ok = op == Op::GaussianLogPdf ? n == 3 : op == Op::Mixture ? n % 2 == 0 : n == 1;
    if (!ok) {
      const char* want = op == Op::GaussianLogPdf ? "3 arguments"
                         : op == Op::Mixture      ? "an even number of arguments (weight, term pairs)"
                                                  : "1 argument";
      throw ParseError(start, std::string(name) + " takes " + want + ", got " + std::to_string(n));
    }
    return make(op, std::move(args));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (!accept(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline NodePtr parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

/// value = sign * exp(log_abs); sign is -1, 0 or +1 (log_abs = -inf when 0).
struct SignedLog {
  int sign = 0;
  double log_abs = -std::numeric_limits<double>::infinity();

  static SignedLog from_value(double v) {
    if (std::isnan(v)) return {1, std::numeric_limits<double>::quiet_NaN()};
    if (v == 0.0) return {};
    return {v > 0.0 ? 1 : -1, std::log(std::fabs(v))};
  }

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
};

namespace detail {

inline double gaussian_logpdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

[[noreturn]] inline void nan_at(const Node& n, double x) {
  throw EvaluationError("'" + print(n) + "' is undefined at x = " + format_real(x));
}

/// Signed sum of terms held in signed-log form.
inline SignedLog signed_log_sum(const std::vector<SignedLog>& terms) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) {
    if (std::isnan(t.log_abs)) return {1, t.log_abs};
    if (t.sign != 0) top = std::max(top, t.log_abs);
  }
  if (top == -std::numeric_limits<double>::infinity()) return {};
  if (top == std::numeric_limits<double>::infinity()) {
    int s = 0;
    for (const auto& t : terms) {
      if (t.log_abs != top) continue;
      if (s != 0 && s != t.sign) return {1, std::numeric_limits<double>::quiet_NaN()};
      s = t.sign;
    }
    return {s, top};
  }
  double acc = 0.0;
  for (const auto& t : terms) {
    if (t.sign != 0) acc += t.sign * std::exp(t.log_abs - top);
  }
  if (acc == 0.0) return {};
  return {acc > 0.0 ? 1 : -1, top + std::log(std::fabs(acc))};
}

inline SignedLog log_eval_node(const Node& n, double x);

inline double eval_node(const Node& n, double x) {
  double v = 0.0;
  switch (n.op) {
    case Op::Constant:
      return n.value;
    case Op::Variable:
      return x;
    case Op::Add:
      v = eval_node(*n.args[0], x) + eval_node(*n.args[1], x);
      break;
    case Op::Sub:
      v = eval_node(*n.args[0], x) - eval_node(*n.args[1], x);
      break;
    case Op::Mul:
      v = eval_node(*n.args[0], x) * eval_node(*n.args[1], x);
      break;
    case Op::Div:
      v = eval_node(*n.args[0], x) / eval_node(*n.args[1], x);
      break;
    case Op::Neg:
      v = -eval_node(*n.args[0], x);
      break;
    case Op::Pow:
      v = std::pow(eval_node(*n.args[0], x), eval_node(*n.args[1], x));
      break;
    case Op::Exp:
      v = std::exp(eval_node(*n.args[0], x));
      break;
    case Op::Log: {
      const SignedLog inner = log_eval_node(*n.args[0], x);
      v = inner.sign < 0 ? std::numeric_limits<double>::quiet_NaN() : inner.log_abs;
      break;
    }
    case Op::Abs:
      v = std::fabs(eval_node(*n.args[0], x));
      break;
    case Op::GaussianLogPdf:
      v = gaussian_logpdf(eval_node(*n.args[0], x), eval_node(*n.args[1], x),
                          eval_node(*n.args[2], x));
      break;
    case Op::Mixture:
      for (std::size_t i = 0; i < n.args.size(); i += 2) {
        v += eval_node(*n.args[i], x) * eval_node(*n.args[i + 1], x);
      }
      break;
  }
  if (std::isnan(v)) nan_at(n, x);
  return v;
}

inline SignedLog log_eval_node(const Node& n, double x) {
  SignedLog r;
  switch (n.op) {
    case Op::Constant:
    case Op::Variable:
    case Op::Abs:
    case Op::GaussianLogPdf:
    case Op::Log:
      if (n.op == Op::Abs) {
        r = log_eval_node(*n.args[0], x);
        if (r.sign != 0) r.sign = 1;
      } else {
        r = SignedLog::from_value(eval_node(n, x));
      }
      break;
    case Op::Add:
    case Op::Sub: {
      SignedLog b = log_eval_node(*n.args[1], x);
      if (n.op == Op::Sub) b.sign = -b.sign;
      r = signed_log_sum({log_eval_node(*n.args[0], x), b});
      break;
    }
    case Op::Mul:
    case Op::Div: {
      const SignedLog a = log_eval_node(*n.args[0], x);
      const SignedLog b = log_eval_node(*n.args[1], x);
      if (n.op == Op::Div && b.sign == 0) {
        r = a.sign == 0 ? SignedLog{1, std::numeric_limits<double>::quiet_NaN()}
                        : SignedLog{a.sign, std::numeric_limits<double>::infinity()};
      } else if (a.sign == 0 || b.sign == 0) {
        const double other = a.sign == 0 ? b.log_abs : a.log_abs;
        r = other == std::numeric_limits<double>::infinity()
                ? SignedLog{1, std::numeric_limits<double>::quiet_NaN()}
                : SignedLog{};
      } else {
        r = {a.sign * b.sign, n.op == Op::Mul ? a.log_abs + b.log_abs : a.log_abs - b.log_abs};
      }
      break;
    }
    case Op::Neg:
      r = log_eval_node(*n.args[0], x);
      r.sign = -r.sign;
      break;
    case Op::Pow: {
      const SignedLog base = log_eval_node(*n.args[0], x);
      const double e = eval_node(*n.args[1], x);
      if (e == 0.0) {
        r = {1, 0.0};
      } else if (base.sign == 0) {
        r = e > 0.0 ? SignedLog{} : SignedLog{1, std::numeric_limits<double>::infinity()};
      } else if (base.sign < 0 && e != std::trunc(e)) {
        r = {1, std::numeric_limits<double>::quiet_NaN()};
      } else {
        const bool odd = base.sign < 0 && std::fmod(std::fabs(e), 2.0) == 1.0;
        r = {odd ? -1 : 1, e * base.log_abs};
      }
      break;
    }
    case Op::Exp:
      r = {1, eval_node(*n.args[0], x)};
      break;
    case Op::Mixture: {
      std::vector<SignedLog> terms;
      terms.reserve(n.args.size() / 2);
      for (std::size_t i = 0; i < n.args.size(); i += 2) {
        const SignedLog w = log_eval_node(*n.args[i], x);
        const SignedLog f = log_eval_node(*n.args[i + 1], x);
        terms.push_back(w.sign == 0 || f.sign == 0 ? SignedLog{}
                                                   : SignedLog{w.sign * f.sign, w.log_abs + f.log_abs});
      }
      r = signed_log_sum(terms);
      break;
    }
  }
  if (std::isnan(r.log_abs)) nan_at(n, x);
  return r;
}

}  // namespace detail

/// Value of the expression at x. Throws EvaluationError naming the innermost
/// subexpression that produced NaN.
inline double evaluate(const Node& n, double x) { return detail::eval_node(n, x); }

/// log of the expression's value at x, computed in signed-log arithmetic.
inline SignedLog log_evaluate(const Node& n, double x) { return detail::log_eval_node(n, x); }

// ---------------------------------------------------------------------------
// Constant folding

/// Replaces every x-free subtree whose value is finite by a constant.
inline NodePtr fold_constants(const NodePtr& n) {
  if (n->op == Op::Constant || n->op == Op::Variable) return n;
  if (!depends_on_x(*n)) {
    try {
      const double v = evaluate(*n, 0.0);
      if (std::isfinite(v)) return constant(v);
    } catch (const EvaluationError&) {
    }
  }
  std::vector<NodePtr> args;
  args.reserve(n->args.size());
  for (const auto& a : n->args) args.push_back(fold_constants(a));
  return make(n->op, std::move(args));
}

}  // namespace slicebox::expr
