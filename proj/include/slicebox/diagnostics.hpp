#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slicebox/errors.hpp"
#include "slicebox/samplers.hpp"
#include "slicebox/targets.hpp"

namespace slicebox {

/// Asymptotic Kolmogorov-Smirnov coefficient for alpha = 0.01.
inline constexpr double kKsCoefficient01 = 1.628;

struct HistogramBin {
  double left;
  double right;
  std::uint64_t count;
};

struct RunReport {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_evals = 0.0;
  double mean_shrinks = 0.0;
  std::uint64_t max_iter_hits = 0;
  std::vector<HistogramBin> histogram;
  // Autocorrelation summaries need at least 100 draws; absent otherwise.
  std::optional<double> ess;
  std::optional<double> act;
  std::optional<double> ks_stat;
  std::optional<bool> ks_pass;
  std::size_t ks_thin = 1;
  std::optional<double> mode_occupancy;
  std::optional<double> threshold;
};

// ---------------------------------------------------------------------------
// Moments and histogram

struct Moments {
  double mean;
  double variance;  // unbiased (n - 1); 0 for a single value
  double min;
  double max;
};

inline Moments moments(std::span<const double> xs) {
  if (xs.empty()) throw ArgumentError("moments of an empty sequence");
  double sum = 0.0;
  double lo = xs[0];
  double hi = xs[0];
  for (double x : xs) {
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / static_cast<double>(xs.size() - 1) : 0.0;
  return {mean, var, lo, hi};
}

/// Equal-width bins tiling [min, max]; the last bin is closed on the right.
/// A zero-width range yields one bin holding everything.
inline std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t bins) {
  if (xs.empty()) throw ArgumentError("histogram of an empty sequence");
  if (bins == 0) throw ArgumentError("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return {{lo, hi, xs.size()}};

  const double width = (hi - lo) / static_cast<double>(bins);
  auto edge = [&](std::size_t i) { return i == bins ? hi : lo + width * static_cast<double>(i); };
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) out[i] = {edge(i), edge(i + 1), 0};
  for (double x : xs) {
    auto i = static_cast<std::size_t>((x - lo) / width);
    i = std::min(i, bins - 1);
    // floating-point division can land one bin off near an edge
    while (i > 0 && x < out[i].left) --i;
    while (i + 1 < bins && x >= out[i + 1].left) ++i;
    ++out[i].count;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

inline double ks_critical(std::size_t n, double coefficient = kKsCoefficient01) {
  return coefficient * std::sqrt(1.0 / static_cast<double>(n));
}

/// sup |F_n - F| for ascending samples.
template <class Cdf>
double ks_statistic(std::span<const double> sorted, const Cdf& cdf) {
  if (sorted.size() < 10) throw ArgumentError("ks_statistic needs at least 10 samples");
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw ArgumentError("ks_statistic needs samples sorted ascending");
  }
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Effective sample size

struct EssResult {
  double ess;
  double act;  // integrated autocorrelation time
};

/// Integrated autocorrelation time with Geyer's initial positive sequence:
/// act = -1 + 2 * sum_k (rho(2k) + rho(2k+1)), summed while the pair sums
/// stay positive. ess = n / act clamped to [1, n]; a constant series has
/// act = n.
inline EssResult ess(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 100) throw ArgumentError("ess needs at least 100 samples");
  const double nd = static_cast<double>(n);
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*lo == *hi) return {1.0, nd};

  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= nd;
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = xs[i] - mean;

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += dev[i] * dev[i + lag];
    return s / nd;
  };
  const double gamma0 = autocov(0);

  double pair_sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocov(2 * k) + autocov(2 * k + 1)) / gamma0;
    if (pair <= 0.0) break;
    pair_sum += pair;
  }
  const double act = -1.0 + 2.0 * pair_sum;
  const double e = act > 0.0 ? std::clamp(nd / act, 1.0, nd) : nd;
  return {e, act};
}

// ---------------------------------------------------------------------------
// Reference CDFs

struct Grid {
  double lo;
  double hi;
  double step;
};

/// Monotone reference CDF: either a closed form or a tabulated cumulative
/// trapezoid integral, linearly interpolated, 0 below and 1 above the grid.
class ReferenceCdf {
 public:
  static ReferenceCdf closed_form(std::function<double(double)> cdf) {
    ReferenceCdf r;
    r.closed_ = std::move(cdf);
    return r;
  }

  static ReferenceCdf tabulated(Grid grid, std::vector<double> values) {
    ReferenceCdf r;
    r.grid_ = grid;
    r.table_ = std::move(values);
    return r;
  }

  double operator()(double x) const {
    if (closed_) return closed_(x);
    if (x <= grid_.lo) return 0.0;
    const double pos = (x - grid_.lo) / grid_.step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= table_.size()) return 1.0;
    const double frac = pos - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

  bool is_closed_form() const noexcept { return static_cast<bool>(closed_); }
  const std::vector<double>& table() const noexcept { return table_; }

 private:
  ReferenceCdf() = default;

  std::function<double(double)> closed_;
  Grid grid_{0.0, 0.0, 1.0};
  std::vector<double> table_;
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Quadrature grid used for builtins without a closed-form CDF.
inline constexpr Grid kQuarticGrid{-3.0, 7.0, 1e-3};

/// Closed-form CDF of a builtin, when one exists.
inline std::optional<ReferenceCdf> builtin_closed_form_cdf(Builtin id) {
  switch (id) {
    case Builtin::Gauss500:
      return ReferenceCdf::closed_form([](double x) { return normal_cdf((x - 500.0) / std::sqrt(5.0)); });
    case Builtin::Gauss1000:
      return ReferenceCdf::closed_form([](double x) { return normal_cdf((x - 1000.0) / std::sqrt(50.0)); });
    case Builtin::Gamma51:
      // P(5, x) = 1 - exp(-x) * sum_{k<5} x^k / k!
      return ReferenceCdf::closed_form([](double x) {
        if (x <= 0.0) return 0.0;
        const double tail = 1.0 + x * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0)));
        return -std::expm1(-x) - std::exp(-x) * (tail - 1.0);
      });
    case Builtin::Gmm:
      return ReferenceCdf::closed_form(
          [](double x) { return 0.8 * normal_cdf(x) + 0.2 * normal_cdf(x - 10.0); });
    case Builtin::Quartic:
      return std::nullopt;
  }
  return std::nullopt;
}

/// Normalized cumulative trapezoid integral of exp(log f) over `grid`.
template <LogDensityModel D>
ReferenceCdf quadrature_cdf(D& d, Grid grid) {
  if (!(grid.hi > grid.lo) || !(grid.step > 0.0)) throw ArgumentError("quadrature grid needs lo < hi, step > 0");
  const auto intervals = static_cast<std::size_t>(std::llround((grid.hi - grid.lo) / grid.step));
  if (intervals == 0) throw ArgumentError("quadrature grid has no intervals");
  grid.step = (grid.hi - grid.lo) / static_cast<double>(intervals);

  std::vector<double> logf(intervals + 1);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double x = grid.lo + grid.step * static_cast<double>(i);
    logf[i] = in_support(d.support(), x) ? d.log_eval(x) : -std::numeric_limits<double>::infinity();
    if (std::isnan(logf[i])) throw IntegrationError("log density is NaN at x = " + format_real(x));
    top = std::max(top, logf[i]);
  }
  if (!std::isfinite(top)) throw IntegrationError("density has no finite mass on the grid");

  std::vector<double> cum(intervals + 1, 0.0);
  double prev = std::exp(logf[0] - top);
  for (std::size_t i = 1; i <= intervals; ++i) {
    const double cur = std::exp(logf[i] - top);
    cum[i] = cum[i - 1] + 0.5 * (prev + cur) * grid.step;
    prev = cur;
  }
  const double total = cum.back();
  const double log_mass = std::log(total) + top;
  if (!std::isfinite(log_mass) || log_mass < std::log(1e-12)) {
    throw IntegrationError("quadrature mass " + format_real(std::exp(log_mass)) +
                           " is too small or not finite");
  }
  for (double& c : cum) c /= total;
  cum.back() = 1.0;
  return ReferenceCdf::tabulated(grid, std::move(cum));
}

/// Reference CDF for `d`: closed form for builtins that have one, otherwise
/// quadrature over `grid`.
inline ReferenceCdf reference_cdf(LogDensity& d, Grid grid) {
  if (const auto id = d.builtin_id()) {
    if (auto cdf = builtin_closed_form_cdf(*id)) return *cdf;
  }
  return quadrature_cdf(d, grid);
}

/// Reference CDF for a builtin by name, using its fixed grid when needed.
inline ReferenceCdf builtin_reference_cdf(std::string_view name) {
  LogDensity d = LogDensity::builtin(name);
  return reference_cdf(d, kQuarticGrid);
}

// ---------------------------------------------------------------------------
// Summaries

struct ReportOptions {
  std::size_t bins = 20;
  std::optional<double> threshold;
  std::optional<ReferenceCdf> reference;
  std::size_t ks_thin = 10;
  double ks_coefficient = kKsCoefficient01;
};

inline std::vector<double> draws_of(std::span<const DrawRecord> records) {
  std::vector<double> xs;
  xs.reserve(records.size());
  for (const auto& r : records) xs.push_back(r.x);
  return xs;
}

inline RunReport summarize(std::span<const DrawRecord> records, const ReportOptions& opts = {}) {
  if (records.empty()) throw ArgumentError("summarize: no records");
  if (opts.ks_thin == 0) throw ArgumentError("summarize: ks_thin must be positive");

  const std::vector<double> xs = draws_of(records);
  const Moments m = moments(xs);

  RunReport rep;
  rep.n = xs.size();
  rep.mean = m.mean;
  rep.variance = m.variance;
  rep.min = m.min;
  rep.max = m.max;

  double evals = 0.0;
  double shrinks = 0.0;
  for (const auto& r : records) {
    evals += static_cast<double>(r.n_evals);
    shrinks += static_cast<double>(r.n_shrinks);
    if (r.max_iter_hit) ++rep.max_iter_hits;
  }
  rep.mean_evals = evals / static_cast<double>(rep.n);
  rep.mean_shrinks = shrinks / static_cast<double>(rep.n);
  rep.histogram = histogram(xs, opts.bins);

  if (rep.n >= 100) {
    const EssResult e = ess(xs);
    rep.ess = e.ess;
    rep.act = e.act;
  }

  rep.ks_thin = opts.ks_thin;
  if (opts.reference) {
    std::vector<double> thinned;
    for (std::size_t i = 0; i < xs.size(); i += opts.ks_thin) thinned.push_back(xs[i]);
    std::sort(thinned.begin(), thinned.end());
    rep.ks_stat = ks_statistic(thinned, *opts.reference);
    rep.ks_pass = *rep.ks_stat < ks_critical(thinned.size(), opts.ks_coefficient);
  }

  if (opts.threshold) {
    const double t = *opts.threshold;
    const auto above = std::count_if(xs.begin(), xs.end(), [t](double x) { return x > t; });
    rep.threshold = t;
    rep.mode_occupancy = static_cast<double>(above) / static_cast<double>(rep.n);
  }
  return rep;
}

}  // namespace slicebox
