#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slicebox/errors.hpp"
#include "slicebox/rng.hpp"
#include "slicebox/targets.hpp"
#include "slicebox/transforms.hpp"

namespace slicebox {

enum class Method { Bounded, Unbounded, Positive, SteppingOut };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Bounded:
      return "bounded";
    case Method::Unbounded:
      return "unbounded";
    case Method::Positive:
      return "positive";
    case Method::SteppingOut:
      return "stepout";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  if (name == "bounded") return Method::Bounded;
  if (name == "unbounded") return Method::Unbounded;
  if (name == "positive") return Method::Positive;
  if (name == "stepout" || name == "stepping-out") return Method::SteppingOut;
  throw ArgumentError("unknown method '" + std::string(name) +
                      "'; expected unbounded, positive, bounded or stepout");
}

struct Bounds {
  double lo;
  double hi;
};

struct SamplerConfig {
  Method method = Method::Unbounded;
  double a_scale = 100.0;         // Unbounded: scale A of the sigmoid map
  std::optional<Bounds> bounds;   // Bounded only
  double width = 1.0;             // SteppingOut: initial interval width
  std::size_t max_iter = 1000;    // cap on candidate draws per sample
  std::size_t max_stepout = 1'000'000;  // cap on expansions per side
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iter == 0) throw ArgumentError("max_iter must be positive");
    switch (method) {
      case Method::Bounded:
        if (!bounds) throw ArgumentError("bounded sampling needs bounds");
        if (!(bounds->lo < bounds->hi) || !std::isfinite(bounds->lo) || !std::isfinite(bounds->hi)) {
          throw ArgumentError("bounds must be finite with lo < hi");
        }
        break;
      case Method::Unbounded:
        if (!(a_scale > 0.0) || !std::isfinite(a_scale)) {
          throw ArgumentError("a_scale must be positive and finite");
        }
        break;
      case Method::SteppingOut:
        if (!(width > 0.0) || !std::isfinite(width)) {
          throw ArgumentError("width must be positive and finite");
        }
        if (max_stepout == 0) throw ArgumentError("max_stepout must be positive");
        break;
      case Method::Positive:
        break;
    }
  }
};

/// Current draw of a chain plus its private random stream. log_density
/// caches log f(x) for the target the chain runs on; reset() clears it.
struct ChainState {
  double x;
  std::size_t t = 0;
  RngStream rng;
  std::optional<double> log_density;

  ChainState(double x0, RngStream stream) : x(x0), rng(std::move(stream)) {}

  void reset(double x0) {
    x = x0;
    log_density.reset();
  }
};

struct DrawRecord {
  double x = 0.0;
  std::uint64_t n_evals = 0;    // target evaluations during this draw
  std::uint64_t n_shrinks = 0;  // candidate draws (loop iterations)
  bool max_iter_hit = false;    // loop cap reached; x is the previous value
  bool stepout_capped = false;  // stepping-out stopped at max_stepout
};

/// Search interval seen by an observer: after initialization and after every
/// shrink. anchor is the point the interval must keep enclosing (the current
/// p for reparameterized samplers, the current x otherwise).
struct ShrinkStep {
  double lo;
  double hi;
  double anchor;
};

struct NoObserver {
  void operator()(const ShrinkStep&) const noexcept {}
};

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <LogDensityModel D>
double current_log_density(ChainState& s, D& d) {
  if (!s.log_density) s.log_density = d.log_eval(s.x);
  const double lf = *s.log_density;
  if (!std::isfinite(lf)) {
    throw StateError("log f(x) = " + format_real(lf) + " at the current state x = " +
                     format_real(s.x) + "; the slice level is undefined");
  }
  return lf;
}

/// Shrinkage slice sampling on the unit interval for the density exchanged
/// through `tr`: g(p) = f(expand(p)) * dx/dp.
///
/// Subtracting log(A r (1 - r)) instead of adding log(dx/dp) =
/// log A - log r - log(1 - r) gives the same chain: the two differ by the
/// constant 2 log A, which cancels between level and candidate. Writing
/// log(A r (r - 1)) would take the log of a negative number.
template <LogDensityModel D, class Observer>
DrawRecord slice_transformed(ChainState& s, D& d, const Transform& tr, std::size_t max_iter,
                             Observer&& observe) {
  const std::uint64_t evals_before = d.eval_count();
  const UnitPoint anchor = tr.shrink(s.x);
  const double r = anchor.p;
  if (!inside_unit_guard(anchor)) {
    throw StateError("x = " + format_real(s.x) + " maps to p = " + format_real(r) +
                     ", too close to the edge of (0, 1); rescale x or use a larger scale A");
  }
  const double level = current_log_density(s, d) + tr.log_jacobian(anchor) + s.rng.log_uniform01();

  DrawRecord rec;
  rec.x = s.x;
  double lo = 0.0;
  double hi = 1.0;
  observe(ShrinkStep{lo, hi, r});

  auto finish = [&] {
    ++s.t;
    rec.n_evals = d.eval_count() - evals_before;
    return rec;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const double p = s.rng.uniform(lo, hi);
    ++rec.n_shrinks;

    double x_new = 0.0;
    double lf_new = kNegInf;
    double candidate = kNegInf;
    if (inside_unit_guard(p)) {
      x_new = tr.expand(p);
      lf_new = d.log_eval(x_new);
      candidate = lf_new + tr.log_jacobian(p);
    }

    if (candidate > level) {
      s.x = x_new;
      s.log_density = lf_new;
      rec.x = x_new;
      return finish();
    }
    if (p > r) {
      hi = p;
    } else if (p < r) {
      lo = p;
    } else {
      return finish();  // candidate collided with the current point
    }
    observe(ShrinkStep{lo, hi, r});
  }
  rec.max_iter_hit = true;
  return finish();
}

/// Shrinkage loop in x-space around the current point, shared by the bounded
/// and stepping-out samplers.
template <LogDensityModel D, class Observer>
void shrink_in_interval(ChainState& s, D& d, double level, double lo, double hi,
                        std::size_t max_iter, DrawRecord& rec, Observer& observe) {
  const double x_prev = s.x;
  observe(ShrinkStep{lo, hi, x_prev});
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const double x = s.rng.uniform(lo, hi);
    ++rec.n_shrinks;
    const double lf = in_support(d.support(), x) ? d.log_eval(x) : kNegInf;
    if (lf > level) {
      s.x = x;
      s.log_density = lf;
      rec.x = x;
      return;
    }
    if (x < x_prev) {
      lo = x;
    } else if (x > x_prev) {
      hi = x;
    } else {
      return;
    }
    observe(ShrinkStep{lo, hi, x_prev});
  }
  rec.max_iter_hit = true;
}

}  // namespace detail

/// Shrinkage slice sampling on fixed bounds [lo, hi]; the bounds are never
/// expanded.
template <LogDensityModel D, class Observer = NoObserver>
DrawRecord slice_bounded(ChainState& s, D& d, const SamplerConfig& cfg, Observer&& observe = {}) {
  if (!cfg.bounds) throw ArgumentError("slice_bounded: config has no bounds");
  const auto [lo, hi] = *cfg.bounds;
  if (!(lo < hi)) throw ArgumentError("slice_bounded: need lo < hi");
  if (!(s.x >= lo && s.x <= hi)) {
    throw StateError("x = " + format_real(s.x) + " lies outside the bounds [" + format_real(lo) +
                     ", " + format_real(hi) + "]");
  }
  const std::uint64_t evals_before = d.eval_count();
  const double level = detail::current_log_density(s, d) + s.rng.log_uniform01();

  DrawRecord rec;
  rec.x = s.x;
  detail::shrink_in_interval(s, d, level, lo, hi, cfg.max_iter, rec, observe);
  ++s.t;
  rec.n_evals = d.eval_count() - evals_before;
  return rec;
}

/// Slice sampling of x on the real line through the scaled sigmoid map.
template <LogDensityModel D, class Observer = NoObserver>
DrawRecord slice_unbounded(ChainState& s, D& d, const SamplerConfig& cfg, Observer&& observe = {}) {
  if (d.support() != Support::RealLine) {
    throw ArgumentError("slice_unbounded needs a target on the real line");
  }
  if (!std::isfinite(s.x)) throw StateError("current x is not finite");
  return detail::slice_transformed(s, d, Transform::scaled_sigmoid(cfg.a_scale), cfg.max_iter,
                                   observe);
}

/// Slice sampling of x > 0 through the ratio map x = p / (1 - p).
template <LogDensityModel D, class Observer = NoObserver>
DrawRecord slice_positive(ChainState& s, D& d, const SamplerConfig& cfg, Observer&& observe = {}) {
  if (d.support() != Support::PositiveReals) {
    throw ArgumentError("slice_positive needs a target supported on x > 0");
  }
  if (!(s.x > 0.0) || !std::isfinite(s.x)) {
    throw StateError("positive sampler needs x > 0, got " + format_real(s.x));
  }
  return detail::slice_transformed(s, d, Transform::positive_ratio(), cfg.max_iter, observe);
}

/// Stepping-out baseline: an interval of cfg.width placed at random around
/// x grows by whole widths while its ends stay above the slice level, then
/// shrinks on rejection. Every evaluation, including the endpoint checks,
/// counts toward n_evals.
template <LogDensityModel D, class Observer = NoObserver>
DrawRecord stepping_out(ChainState& s, D& d, const SamplerConfig& cfg, Observer&& observe = {}) {
  if (d.support() != Support::RealLine) {
    throw ArgumentError("stepping_out needs a target on the real line");
  }
  if (!std::isfinite(s.x)) throw StateError("current x is not finite");
  const std::uint64_t evals_before = d.eval_count();
  const double level = detail::current_log_density(s, d) + s.rng.log_uniform01();

  DrawRecord rec;
  rec.x = s.x;
  const double w = cfg.width;
  double lo = s.x - w * s.rng.uniform01();
  double hi = lo + w;

  auto above = [&](double at) { return d.log_eval(at) > level; };
  for (std::size_t k = 0; above(lo); ++k) {
    if (k == cfg.max_stepout) {
      rec.stepout_capped = true;
      break;
    }
    lo -= w;
  }
  for (std::size_t k = 0; above(hi); ++k) {
    if (k == cfg.max_stepout) {
      rec.stepout_capped = true;
      break;
    }
    hi += w;
  }

  detail::shrink_in_interval(s, d, level, lo, hi, cfg.max_iter, rec, observe);
  ++s.t;
  rec.n_evals = d.eval_count() - evals_before;
  return rec;
}

/// One draw with the sampler selected by cfg.method.
template <LogDensityModel D, class Observer = NoObserver>
DrawRecord draw(ChainState& s, D& d, const SamplerConfig& cfg, Observer&& observe = {}) {
  switch (cfg.method) {
    case Method::Bounded:
      return slice_bounded(s, d, cfg, observe);
    case Method::Unbounded:
      return slice_unbounded(s, d, cfg, observe);
    case Method::Positive:
      return slice_positive(s, d, cfg, observe);
    case Method::SteppingOut:
      return stepping_out(s, d, cfg, observe);
  }
  throw ArgumentError("unknown method");
}

struct ChainRun {
  std::vector<DrawRecord> burn_in;
  std::vector<DrawRecord> draws;
};

/// Runs burn_in + n draws from x0 and keeps both phases.
template <LogDensityModel D>
ChainRun run_chain_full(D& d, const SamplerConfig& cfg, double x0, std::size_t n,
                        std::size_t burn_in, RngStream rng) {
  if (n == 0) throw ArgumentError("run_chain: n must be positive");
  cfg.validate();
  if (!in_support(d.support(), x0)) {
    throw ArgumentError("run_chain: x0 = " + format_real(x0) + " is outside the target's support");
  }
  ChainState state(x0, std::move(rng));
  ChainRun run;
  run.burn_in.reserve(burn_in);
  run.draws.reserve(n);
  for (std::size_t i = 0; i < burn_in + n; ++i) {
    DrawRecord rec;
    try {
      rec = draw(state, d, cfg);
    } catch (const ChainError&) {
      throw;
    } catch (const std::exception& e) {
      throw ChainError(i + 1, e.what());
    }
    (i < burn_in ? run.burn_in : run.draws).push_back(rec);
  }
  return run;
}

/// n post-burn-in records; the stream is RngStream(cfg.seed).
template <LogDensityModel D>
std::vector<DrawRecord> run_chain(D& d, const SamplerConfig& cfg, double x0, std::size_t n,
                                  std::size_t burn_in) {
  return run_chain_full(d, cfg, x0, n, burn_in, RngStream(cfg.seed)).draws;
}

}  // namespace slicebox
