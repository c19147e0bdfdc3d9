#pragma once

#include <charconv>
#include <cstdint>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "slicebox/diagnostics.hpp"
#include "slicebox/errors.hpp"
#include "slicebox/report_io.hpp"
#include "slicebox/rng.hpp"
#include "slicebox/samplers.hpp"
#include "slicebox/targets.hpp"

namespace slicebox {

/// One experiment: a target, the samplers to run on it, and how to report.
///
/// Text form, one `key = value` per line, `#` starts a comment:
///
///   name = fig4
///   target = gmm                 # builtin name or expr:<density text>
///   methods = unbounded, stepout
///   x0 = 1
///   n = 10000
///   threshold = 5
struct ScenarioSpec {
  std::string name;
  std::string description;
  std::string target;
  std::vector<Method> methods;
  double x0 = 0.0;
  std::size_t n = 10000;
  std::size_t burn_in = 100;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  double a_scale = 100.0;
  double width = 1.0;
  std::optional<Bounds> bounds;
  std::size_t max_iter = 1000;
  std::size_t bins = 20;
  std::optional<double> threshold;
  std::optional<std::string> reference;
  std::size_t ks_thin = 10;

  SamplerConfig config(Method m) const {
    SamplerConfig c;
    c.method = m;
    c.a_scale = a_scale;
    c.width = width;
    c.bounds = bounds;
    c.max_iter = max_iter;
    c.seed = seed;
    return c;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view text, std::size_t line, std::string_view key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(line, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = text.find(',');
    out.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) return out;
    text.remove_prefix(comma + 1);
  }
}

}  // namespace detail

inline Bounds parse_bounds(std::string_view text) {
  const auto parts = detail::split_list(text);
  if (parts.size() != 2) throw ArgumentError("bounds must be 'lo,hi', got '" + std::string(text) + "'");
  Bounds b{};
  for (int i = 0; i < 2; ++i) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(parts[i].data(), parts[i].data() + parts[i].size(), v);
    if (ec != std::errc() || ptr != parts[i].data() + parts[i].size()) {
      throw ArgumentError("bad bound '" + std::string(parts[i]) + "'");
    }
    (i == 0 ? b.lo : b.hi) = v;
  }
  if (!(b.lo < b.hi)) throw ArgumentError("bounds need lo < hi");
  return b;
}

/// Target density for a sampler: positive-map runs see the target
/// restricted to x > 0.
inline LogDensity make_target(std::string_view spec, Method method) {
  const Support support = method == Method::Positive ? Support::PositiveReals : Support::RealLine;
  LogDensity d = LogDensity::from_spec(spec, support);
  if (method == Method::Positive && d.support() != Support::PositiveReals) {
    d = d.restricted_to_positive();
  }
  if (method != Method::Positive && method != Method::Bounded && d.support() != Support::RealLine) {
    throw ArgumentError("target " + d.name() + " lives on x > 0; use --method positive or bounded");
  }
  return d;
}

/// Checks what parsing alone cannot: the target exists and the parameters
/// fit the methods.
inline void validate(const ScenarioSpec& s) {
  if (s.name.empty()) throw ArgumentError("scenario has no name");
  if (s.target.empty()) throw ArgumentError("scenario '" + s.name + "' has no target");
  if (s.methods.empty()) throw ArgumentError("scenario '" + s.name + "' lists no methods");
  if (s.n == 0 || s.thin == 0 || s.ks_thin == 0) throw ArgumentError("n, thin and ks_thin must be positive");
  for (Method m : s.methods) {
    s.config(m).validate();
    LogDensity d = make_target(s.target, m);
    if (!in_support(d.support(), s.x0)) {
      throw ArgumentError("x0 = " + format_real(s.x0) + " is outside the support of " + d.name());
    }
  }
  if (s.reference) builtin_info(*s.reference);
}

inline ScenarioSpec parse_scenario(std::string_view text) {
  ScenarioSpec s;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view l(raw);
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = detail::trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw FormatError(line, "expected 'key = value'");
    const std::string_view key = detail::trim(l.substr(0, eq));
    const std::string_view value = detail::trim(l.substr(eq + 1));
    using detail::parse_number;
    try {
      if (key == "name") {
        s.name = value;
      } else if (key == "description") {
        s.description = value;
      } else if (key == "target") {
        s.target = value;
      } else if (key == "methods") {
        s.methods.clear();
        for (auto m : detail::split_list(value)) s.methods.push_back(parse_method(m));
      } else if (key == "x0") {
        s.x0 = parse_number<double>(value, line, key);
      } else if (key == "n") {
        s.n = parse_number<std::size_t>(value, line, key);
      } else if (key == "burn_in") {
        s.burn_in = parse_number<std::size_t>(value, line, key);
      } else if (key == "thin") {
        s.thin = parse_number<std::size_t>(value, line, key);
      } else if (key == "seed") {
        s.seed = parse_number<std::uint64_t>(value, line, key);
      } else if (key == "a") {
        s.a_scale = parse_number<double>(value, line, key);
      } else if (key == "width") {
        s.width = parse_number<double>(value, line, key);
      } else if (key == "bounds") {
        s.bounds = parse_bounds(value);
      } else if (key == "max_iter") {
        s.max_iter = parse_number<std::size_t>(value, line, key);
      } else if (key == "bins") {
        s.bins = parse_number<std::size_t>(value, line, key);
      } else if (key == "threshold") {
        s.threshold = parse_number<double>(value, line, key);
      } else if (key == "reference") {
        s.reference = std::string(value);
      } else if (key == "ks_thin") {
        s.ks_thin = parse_number<std::size_t>(value, line, key);
      } else {
        throw FormatError(line, "unknown key '" + std::string(key) + "'");
      }
    } catch (const ArgumentError& e) {
      throw FormatError(line, e.what());
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Running

/// Output of one chain: the kept (thinned, post-burn-in) draws and the cost
/// of the very first draw from x0.
struct SampleRun {
  std::vector<StoredDraw> draws;
  std::uint64_t first_draw_evals = 0;
};

/// Runs burn_in + n draws and keeps every thin-th post-burn-in draw. t is the
/// 1-based iteration number counted from x0.
template <LogDensityModel D>
SampleRun sample_chain(D& d, const SamplerConfig& cfg, double x0, std::size_t n, std::size_t burn_in,
                       std::size_t thin, RngStream rng) {
  if (thin == 0) throw ArgumentError("thin must be positive");
  const ChainRun run = run_chain_full(d, cfg, x0, n, burn_in, std::move(rng));
  SampleRun out;
  out.first_draw_evals = run.burn_in.empty() ? run.draws.front().n_evals : run.burn_in.front().n_evals;
  out.draws.reserve(n / thin + 1);
  for (std::size_t i = 0; i < run.draws.size(); i += thin) {
    out.draws.push_back({static_cast<std::uint64_t>(burn_in + i + 1), run.draws[i]});
  }
  return out;
}

inline ReportOptions report_options(const ScenarioSpec& s) {
  ReportOptions o;
  o.bins = s.bins;
  o.threshold = s.threshold;
  o.ks_thin = s.ks_thin;
  if (s.reference) o.reference = builtin_reference_cdf(*s.reference);
  return o;
}

struct MethodResult {
  Method method;
  RunReport report;
  std::uint64_t first_draw_evals;
  SampleRun run;
};

/// Runs every method of the scenario on its own stream RngStream(seed, i),
/// i being the method's position. Chains run concurrently; results keep the
/// scenario's method order.
inline std::vector<MethodResult> run_scenario(const ScenarioSpec& s) {
  validate(s);
  const ReportOptions opts = report_options(s);
  std::vector<std::future<MethodResult>> jobs;
  for (std::size_t i = 0; i < s.methods.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&s, &opts, i] {
      const Method m = s.methods[i];
      LogDensity d = make_target(s.target, m);
      SampleRun run = sample_chain(d, s.config(m), s.x0, s.n, s.burn_in, s.thin, RngStream(s.seed, i));
      const auto records = records_of(run.draws);
      RunReport rep = summarize(records, opts);
      return MethodResult{m, std::move(rep), run.first_draw_evals, std::move(run)};
    }));
  }
  std::vector<MethodResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

inline void write_comparison(std::ostream& out, const std::vector<MethodResult>& results) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %12s %12s %12s %12s %10s %10s %8s\n", "method", "mean",
                "mean_shrinks", "mean_evals", "first_evals", "occupancy", "ess", "ks_pass");
  out << buf;
  for (const auto& r : results) {
    const RunReport& rep = r.report;
    const std::string occ = rep.mode_occupancy ? detail::fixed(*rep.mode_occupancy, 4) : "-";
    const std::string e = rep.ess ? detail::fixed(*rep.ess, 1) : "-";
    const char* ks = rep.ks_pass ? (*rep.ks_pass ? "true" : "false") : "-";
    std::snprintf(buf, sizeof buf, "%-10s %12.4f %12.4f %12.4f %12llu %10s %10s %8s\n",
                  to_string(r.method), rep.mean, rep.mean_shrinks, rep.mean_evals,
                  static_cast<unsigned long long>(r.first_draw_evals), occ.c_str(), e.c_str(), ks);
    out << buf;
  }
}

}  // namespace slicebox
