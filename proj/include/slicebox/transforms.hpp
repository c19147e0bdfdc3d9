#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "slicebox/errors.hpp"

namespace slicebox {

/// Candidates closer than this to 0 or 1 are never expanded; the shrinking
/// interval cannot legitimately reach the endpoints.
inline constexpr double kUnitGuard = 1e-15;

/// A point of the open unit interval held as the pair (p, 1 - p). Near 1 a
/// double p keeps only a few significant bits of 1 - p; carrying q separately
/// lets expand(shrink(x)) recover x to full precision for large |x|.
struct UnitPoint {
  double p;
  double q;

  static UnitPoint from_p(double p) noexcept { return {p, 1.0 - p}; }
};

inline bool inside_unit_guard(double p) noexcept {
  return p > kUnitGuard && p < 1.0 - kUnitGuard;
}

inline bool inside_unit_guard(const UnitPoint& u) noexcept {
  return std::min(u.p, u.q) > kUnitGuard;
}

/// Bijection between the unit interval (sampler space) and the variable
/// space of the target.
///
///   ScaledSigmoid:  p = 1 / (1 + exp(-x / A)),  x = A (log p - log(1 - p)),
///                   dx/dp = A / (p (1 - p))
///   PositiveRatio:  p = x / (1 + x),            x = p / (1 - p),
///                   dx/dp = 1 / (1 - p)^2
///
/// Values are immutable after construction.
class Transform {
 public:
  enum class Kind { ScaledSigmoid, PositiveRatio };

  static Transform scaled_sigmoid(double scale = 100.0) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw ArgumentError("sigmoid scale must be positive and finite, got " + format_real(scale));
    }
    return Transform(Kind::ScaledSigmoid, scale);
  }

  static Transform positive_ratio() { return Transform(Kind::PositiveRatio, 1.0); }

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }

  /// Variable space -> (0, 1). Saturates to 0 or 1 for |x| far beyond the
  /// scale; callers check inside_unit_guard() before expanding.
  UnitPoint shrink(double x) const {
    if (!std::isfinite(x)) throw DomainError("shrink: x is not finite");
    if (kind_ == Kind::ScaledSigmoid) {
      const double z = x / scale_;
      return {1.0 / (1.0 + std::exp(-z)), 1.0 / (1.0 + std::exp(z))};
    }
    if (!(x > 0.0)) throw DomainError("shrink: positive map needs x > 0, got " + format_real(x));
    return {x / (1.0 + x), 1.0 / (1.0 + x)};
  }

  /// (0, 1) -> variable space.
  double expand(const UnitPoint& u) const {
    check_unit(u, "expand");
    if (kind_ == Kind::ScaledSigmoid) return scale_ * (std::log(u.p) - std::log(u.q));
    return u.p / u.q;
  }

  double expand(double p) const { return expand(UnitPoint::from_p(p)); }

  /// log(dx/dp), evaluated term by term in log space.
  double log_jacobian(const UnitPoint& u) const {
    check_unit(u, "log_jacobian");
    if (kind_ == Kind::ScaledSigmoid) return std::log(scale_) - std::log(u.p) - std::log(u.q);
    return -2.0 * std::log(u.q);
  }

  double log_jacobian(double p) const { return log_jacobian(UnitPoint::from_p(p)); }

 private:
  Transform(Kind kind, double scale) : kind_(kind), scale_(scale) {}

  static void check_unit(const UnitPoint& u, const char* op) {
    if (!inside_unit_guard(u)) {
      throw DomainError(std::string(op) + ": p must lie strictly inside (0, 1), got " +
                        format_real(u.p));
    }
  }

  Kind kind_;
  double scale_;
};

}  // namespace slicebox
