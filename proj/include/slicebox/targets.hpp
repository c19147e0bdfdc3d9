#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "slicebox/errors.hpp"
#include "slicebox/expression.hpp"

namespace slicebox {

enum class Support { RealLine, PositiveReals };

inline const char* to_string(Support s) {
  return s == Support::RealLine ? "real-line" : "positive-reals";
}

inline bool in_support(Support s, double x) {
  return std::isfinite(x) && (s == Support::RealLine || x > 0.0);
}

/// What the samplers need from a target: log f(x), its support, and a count
/// of evaluations so far.
template <class D>
concept LogDensityModel = requires(D& d, const D& cd, double x) {
  { d.log_eval(x) } -> std::convertible_to<double>;
  { cd.support() } -> std::same_as<Support>;
  { cd.eval_count() } -> std::convertible_to<std::uint64_t>;
};

/// The experimental targets shipped with the library.
enum class Builtin { Quartic, Gauss500, Gauss1000, Gamma51, Gmm };

struct BuiltinInfo {
  Builtin id;
  std::string_view name;
  Support support;
  std::string_view formula;  // f(x) in density-expression syntax
};

inline constexpr std::array<BuiltinInfo, 5> kBuiltins{{
    {Builtin::Quartic, "quartic", Support::RealLine, "exp(-x*(x-1)*(x-2)*(x-3.5))"},
    {Builtin::Gauss500, "gauss500", Support::RealLine, "exp(-(x-500)^2/10)"},
    {Builtin::Gauss1000, "gauss1000", Support::RealLine, "exp(-(x-1000)^2/100)"},
    {Builtin::Gamma51, "gamma51", Support::PositiveReals, "x^4*exp(-x)"},
    {Builtin::Gmm, "gmm", Support::RealLine,
     "mixture(0.8, exp(gaussian_logpdf(x, 0, 1)), 0.2, exp(gaussian_logpdf(x, 10, 1)))"},
}};

inline std::string builtin_names() {
  std::string out;
  for (const auto& b : kBuiltins) {
    if (!out.empty()) out += ", ";
    out += b.name;
  }
  return out;
}

inline const BuiltinInfo& builtin_info(Builtin id) {
  for (const auto& b : kBuiltins) {
    if (b.id == id) return b;
  }
  throw LookupError("unknown builtin id");
}

inline const BuiltinInfo& builtin_info(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return b;
  }
  throw LookupError("unknown target '" + std::string(name) + "'; available: " + builtin_names());
}

/// Closed-form log f for the builtin targets. gmm is the normalized mixture
/// 0.8 N(0, 1) + 0.2 N(10, 1); the others are unnormalized.
inline double builtin_log_density(Builtin id, double x) {
  switch (id) {
    case Builtin::Quartic:
      return -x * (x - 1.0) * (x - 2.0) * (x - 3.5);
    case Builtin::Gauss500:
      return -(x - 500.0) * (x - 500.0) / 10.0;
    case Builtin::Gauss1000:
      return -(x - 1000.0) * (x - 1000.0) / 100.0;
    case Builtin::Gamma51:
      return 4.0 * std::log(x) - x;
    case Builtin::Gmm: {
      constexpr double kLogNorm = -0.91893853320467274178;  // -log(sqrt(2 pi))
      const double a = std::log(0.8) + kLogNorm - 0.5 * x * x;
      const double b = std::log(0.2) + kLogNorm - 0.5 * (x - 10.0) * (x - 10.0);
      const double top = std::max(a, b);
      return top + std::log1p(std::exp(std::min(a, b) - top));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Unnormalized log-density with an evaluation counter.
///
/// Evaluation is deterministic. The counter is not synchronized: one
/// LogDensity per chain.
class LogDensity {
 public:
  struct Expression {
    expr::NodePtr root;
    std::string text;
  };

  static LogDensity builtin(std::string_view name) {
    const BuiltinInfo& info = builtin_info(name);
    return LogDensity(info.id, info.support);
  }

  static LogDensity builtin(Builtin id) { return LogDensity(id, builtin_info(id).support); }

  static LogDensity expression(std::string_view text, Support support = Support::RealLine) {
    return LogDensity(Expression{expr::parse(text), std::string(text)}, support);
  }

  /// "name" for builtins, or "expr:<text>" for parsed densities; the same
  /// strings the CLI accepts.
  static LogDensity from_spec(std::string_view spec, Support support = Support::RealLine) {
    if (spec.starts_with("expr:")) return expression(spec.substr(5), support);
    return builtin(spec);
  }

  /// The same density restricted to x > 0.
  LogDensity restricted_to_positive() const {
    LogDensity copy = *this;
    copy.support_ = Support::PositiveReals;
    copy.evals_ = 0;
    return copy;
  }

  double log_eval(double x) {
    if (!in_support(support_, x)) {
      throw DomainError("x = " + format_real(x) + " is outside the support (" +
                        to_string(support_) + ") of " + name());
    }
    ++evals_;
    if (const auto* id = std::get_if<Builtin>(&source_)) return builtin_log_density(*id, x);

    const auto& e = std::get<Expression>(source_);
    const expr::SignedLog v = expr::log_evaluate(*e.root, x);
    if (v.sign < 0) {
      throw EvaluationError("density '" + e.text + "' is negative at x = " + format_real(x));
    }
    return v.sign == 0 ? -std::numeric_limits<double>::infinity() : v.log_abs;
  }

  Support support() const noexcept { return support_; }
  std::uint64_t eval_count() const noexcept { return evals_; }
  void reset_count() noexcept { evals_ = 0; }

  bool is_builtin() const noexcept { return std::holds_alternative<Builtin>(source_); }

  std::optional<Builtin> builtin_id() const {
    if (const auto* id = std::get_if<Builtin>(&source_)) return *id;
    return std::nullopt;
  }

  const expr::NodePtr* ast() const {
    if (const auto* e = std::get_if<Expression>(&source_)) return &e->root;
    return nullptr;
  }

  std::string name() const {
    if (const auto* id = std::get_if<Builtin>(&source_)) return std::string(builtin_info(*id).name);
    return "expr:" + std::get<Expression>(source_).text;
  }

 private:
  LogDensity(std::variant<Builtin, Expression> source, Support support)
      : source_(std::move(source)), support_(support) {}

  std::variant<Builtin, Expression> source_;
  Support support_;
  std::uint64_t evals_ = 0;
};

/// Adapts a plain callable log f into a LogDensityModel, mostly for tests and
/// library users with their own targets.
template <class F>
class FunctionDensity {
 public:
  FunctionDensity(F f, Support support = Support::RealLine) : f_(std::move(f)), support_(support) {}

  double log_eval(double x) {
    if (!in_support(support_, x)) {
      throw DomainError("x = " + format_real(x) + " is outside the support");
    }
    ++evals_;
    return f_(x);
  }

  Support support() const noexcept { return support_; }
  std::uint64_t eval_count() const noexcept { return evals_; }
  void reset_count() noexcept { evals_ = 0; }

 private:
  F f_;
  Support support_;
  std::uint64_t evals_ = 0;
};

}  // namespace slicebox
