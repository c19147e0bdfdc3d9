#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicebox/shipped_scenarios.hpp"
#include "slicebox/slicebox.hpp"

// Subcommand bodies of the slicebox CLI. Each returns the process exit
// status: 0 success, 1 runtime failure (or failed KS check in diagnose),
// 2 bad usage.
namespace slicebox::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for flag combinations the parser cannot reject by itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --seed, else SLICEBOX_SEED, else `fallback`.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback = 0) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SLICEBOX_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("SLICEBOX_SEED is not an unsigned integer: '" + std::string(s) + "'");
    }
    return v;
  }
  return fallback;
}

struct SampleOptions {
  std::string target;
  std::string method = "unbounded";
  double x0 = 1.0;
  std::size_t n = 10000;
  std::size_t burn_in = 100;
  std::size_t thin = 1;
  std::optional<std::uint64_t> seed;
  std::optional<double> a_scale;
  std::optional<double> width;
  std::optional<std::string> bounds;
  std::size_t max_iter = 1000;
  std::optional<std::string> out;
  std::string format = "csv";
  std::optional<std::string> reference;
  std::size_t bins = 20;
  std::optional<double> threshold;
  std::size_t ks_thin = 10;
};

struct CompareOptions {
  std::optional<std::string> scenario;
  std::optional<std::string> scenario_file;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
};

struct DiagnoseOptions {
  std::string in;
  std::optional<std::string> reference;
  std::size_t bins = 20;
  std::optional<double> threshold;
  std::size_t ks_thin = 10;
  std::size_t max_iter = 1000;
  std::string format = "text";
};

inline SamplerConfig sampler_config(const SampleOptions& o) {
  SamplerConfig cfg;
  try {
    cfg.method = parse_method(o.method);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  if (o.a_scale && cfg.method != Method::Unbounded) throw UsageError("--a applies to --method unbounded only");
  if (o.width && cfg.method != Method::SteppingOut) throw UsageError("--width applies to --method stepout only");
  if (o.bounds && cfg.method != Method::Bounded) throw UsageError("--bounds applies to --method bounded only");
  if (cfg.method == Method::Bounded && !o.bounds) throw UsageError("--method bounded needs --bounds LO,HI");
  if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json");
  if (o.n == 0 || o.thin == 0 || o.ks_thin == 0) throw UsageError("--n, --thin and --ks-thin must be positive");

  if (o.a_scale) cfg.a_scale = *o.a_scale;
  if (o.width) cfg.width = *o.width;
  if (o.bounds) {
    try {
      cfg.bounds = parse_bounds(*o.bounds);
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
  }
  cfg.max_iter = o.max_iter;
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

inline ReportOptions report_options(std::size_t bins, std::optional<double> threshold,
                                    const std::optional<std::string>& reference, std::size_t ks_thin) {
  ReportOptions opts;
  opts.bins = bins;
  opts.threshold = threshold;
  opts.ks_thin = ks_thin;
  if (reference) {
    try {
      opts.reference = builtin_reference_cdf(*reference);
    } catch (const LookupError& e) {
      throw UsageError(e.what());
    }
  }
  return opts;
}

/// Draws to --out (or `out`) as CSV or JSON; the report goes to `err`.
inline int cmd_sample(const SampleOptions& o, std::ostream& out, std::ostream& err) {
  SamplerConfig cfg;
  ReportOptions ropts;
  try {
    cfg = sampler_config(o);
    cfg.seed = resolve_seed(o.seed);
    ropts = report_options(o.bins, o.threshold, o.reference, o.ks_thin);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    LogDensity d = make_target(o.target, cfg.method);
    const SampleRun run = sample_chain(d, cfg, o.x0, o.n, o.burn_in, o.thin, RngStream(cfg.seed, 0));
    const auto records = records_of(run.draws);
    const RunReport report = summarize(records, ropts);

    std::ofstream file;
    if (o.out) {
      file.open(*o.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open '" + *o.out + "' for writing");
    }
    std::ostream& sink = o.out ? static_cast<std::ostream&>(file) : out;
    if (o.format == "csv") {
      write_csv(sink, run.draws);
    } else {
      sink << nlohmann::json{{"draws", to_json(run.draws)}, {"report", to_json(report)}}.dump(2) << '\n';
    }
    sink.flush();
    if (!sink) throw std::runtime_error("failed writing draws");

    err << "target          " << d.name() << '\n'
        << "method          " << to_string(cfg.method) << '\n'
        << "seed            " << cfg.seed << '\n';
    write_text(err, report);
    if (report.max_iter_hits > 0) {
      err << "warning: " << report.max_iter_hits << " draw(s) hit the max-iteration cap\n";
    }
    return kExitOk;
  } catch (const ParseError& e) {
    err << "error: density " << e.what() << '\n';
    return kExitUsage;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline std::string shipped_scenario_names() {
  std::string names;
  for (const auto& [name, text] : kShippedScenarios) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  return names;
}

inline std::optional<std::string_view> shipped_scenario(std::string_view name) {
  for (const auto& [n, text] : kShippedScenarios) {
    if (n == name) return text;
  }
  return std::nullopt;
}

inline int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  ScenarioSpec spec;
  try {
    if (o.scenario.has_value() == o.scenario_file.has_value()) {
      throw UsageError("give exactly one of --scenario NAME or --scenario-file PATH");
    }
    if (o.format != "text" && o.format != "json") throw UsageError("--format must be text or json");
    std::string text;
    if (o.scenario) {
      const auto shipped = shipped_scenario(*o.scenario);
      if (!shipped) {
        throw UsageError("unknown scenario '" + *o.scenario + "'; available: " + shipped_scenario_names());
      }
      text = *shipped;
    } else {
      std::ifstream in(*o.scenario_file);
      if (!in) throw UsageError("cannot read scenario file '" + *o.scenario_file + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    spec = parse_scenario(text);
    spec.seed = resolve_seed(o.seed, spec.seed);
    validate(spec);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: scenario: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const auto results = run_scenario(spec);
    if (o.format == "json") {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : results) {
        rows.push_back({{"method", to_string(r.method)},
                        {"first_draw_evals", r.first_draw_evals},
                        {"report", to_json(r.report)}});
      }
      out << nlohmann::json{{"scenario", spec.name}, {"target", spec.target}, {"seed", spec.seed},
                            {"results", rows}}
                 .dump(2)
          << '\n';
      return kExitOk;
    }
    out << "scenario        " << spec.name << '\n'
        << "target          " << spec.target << '\n'
        << "seed            " << spec.seed << "\n\n";
    for (const auto& r : results) {
      out << "== " << to_string(r.method) << " ==\n";
      out << "first_evals     " << r.first_draw_evals << '\n';
      write_text(out, r.report);
      out << '\n';
    }
    write_comparison(out, results);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline int cmd_diagnose(const DiagnoseOptions& o, std::ostream& out, std::ostream& err) {
  ReportOptions ropts;
  try {
    if (o.format != "text" && o.format != "json") throw UsageError("--format must be text or json");
    if (o.ks_thin == 0) throw UsageError("--ks-thin must be positive");
    ropts = report_options(o.bins, o.threshold, o.reference, o.ks_thin);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::ifstream in(o.in, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + o.in + "'");
    const auto draws = read_csv(in, o.max_iter);
    const auto records = records_of(draws);
    const RunReport report = summarize(records, ropts);
    if (o.format == "json") {
      out << to_json(report).dump(2) << '\n';
    } else {
      write_text(out, report);
    }
    if (report.max_iter_hits > 0) {
      err << "warning: " << report.max_iter_hits << " draw(s) reached the max-iteration cap\n";
    }
    return report.ks_pass.value_or(true) ? kExitOk : kExitFailure;
  } catch (const FormatError& e) {
    err << "error: " << o.in << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace slicebox::cli
