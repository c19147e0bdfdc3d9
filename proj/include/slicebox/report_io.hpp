#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicebox/diagnostics.hpp"
#include "slicebox/errors.hpp"
#include "slicebox/samplers.hpp"

namespace slicebox {

/// A malformed draw file; line() is 1-based.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A draw as stored on disk: iteration index plus the record fields.
struct StoredDraw {
  std::uint64_t t;
  DrawRecord record;
};

inline constexpr std::string_view kCsvHeader = "t,x,n_evals,n_shrinks";

inline void write_csv(std::ostream& out, const std::vector<StoredDraw>& draws) {
  out << kCsvHeader << '\n';
  char buf[96];
  for (const auto& d : draws) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%llu,%llu\n", static_cast<unsigned long long>(d.t),
                  d.record.x, static_cast<unsigned long long>(d.record.n_evals),
                  static_cast<unsigned long long>(d.record.n_shrinks));
    out << buf;
  }
}

/// Reads a file written by write_csv. Records with n_shrinks >= max_iter are
/// flagged as loop-cap hits, since the flag itself is not stored.
inline std::vector<StoredDraw> read_csv(std::istream& in, std::uint64_t max_iter = 1000) {
  std::vector<StoredDraw> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError(1, "empty file, expected header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw FormatError(1, "expected header '" + std::string(kCsvHeader) + "'");

  auto parse_field = [&](std::string_view field, auto& value, const char* name) {
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw FormatError(line_no, std::string("bad ") + name + " '" + std::string(field) + "'");
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 4) {
      throw FormatError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    StoredDraw d{};
    parse_field(fields[0], d.t, "t");
    parse_field(fields[1], d.record.x, "x");
    parse_field(fields[2], d.record.n_evals, "n_evals");
    parse_field(fields[3], d.record.n_shrinks, "n_shrinks");
    if (!std::isfinite(d.record.x)) throw FormatError(line_no, "x is not finite");
    d.record.max_iter_hit = d.record.n_shrinks >= max_iter;
    out.push_back(d);
  }
  if (out.empty()) throw FormatError(line_no, "no draws after header");
  return out;
}

inline std::vector<DrawRecord> records_of(const std::vector<StoredDraw>& draws) {
  std::vector<DrawRecord> out;
  out.reserve(draws.size());
  for (const auto& d : draws) out.push_back(d.record);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace detail

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.histogram) {
    bins.push_back({{"bin_left", b.left}, {"bin_right", b.right}, {"count", b.count}});
  }
  return {
      {"n", r.n},
      {"mean", r.mean},
      {"variance", r.variance},
      {"min", r.min},
      {"max", r.max},
      {"mean_evals", r.mean_evals},
      {"mean_shrinks", r.mean_shrinks},
      {"max_iter_hits", r.max_iter_hits},
      {"histogram", bins},
      {"ess", detail::optional_json(r.ess)},
      {"act", detail::optional_json(r.act)},
      {"ks_stat", detail::optional_json(r.ks_stat)},
      {"ks_pass", detail::optional_json(r.ks_pass)},
      {"ks_thin", r.ks_thin},
      {"mode_occupancy", detail::optional_json(r.mode_occupancy)},
      {"threshold", detail::optional_json(r.threshold)},
  };
}

inline nlohmann::json to_json(const std::vector<StoredDraw>& draws) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& d : draws) {
    out.push_back({{"t", d.t},
                   {"x", d.record.x},
                   {"n_evals", d.record.n_evals},
                   {"n_shrinks", d.record.n_shrinks}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline void text_row(std::ostream& out, std::string_view key, const std::string& value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%-16.*s", static_cast<int>(key.size()), key.data());
  out << buf << value << '\n';
}

}  // namespace detail

inline void write_text(std::ostream& out, const RunReport& r) {
  using detail::fixed;
  using detail::text_row;
  text_row(out, "n", std::to_string(r.n));
  text_row(out, "mean", fixed(r.mean));
  text_row(out, "variance", fixed(r.variance));
  text_row(out, "min", fixed(r.min));
  text_row(out, "max", fixed(r.max));
  text_row(out, "mean_evals", fixed(r.mean_evals, 4));
  text_row(out, "mean_shrinks", fixed(r.mean_shrinks, 4));
  text_row(out, "max_iter_hits", std::to_string(r.max_iter_hits));
  text_row(out, "ess", r.ess ? fixed(*r.ess, 1) : "n/a");
  text_row(out, "act", r.act ? fixed(*r.act, 3) : "n/a");
  if (r.ks_stat) {
    text_row(out, "ks_stat", fixed(*r.ks_stat) + " (thin " + std::to_string(r.ks_thin) + ")");
    text_row(out, "ks_pass", *r.ks_pass ? "true" : "false");
  }
  if (r.mode_occupancy) {
    text_row(out, "mode_occupancy", fixed(*r.mode_occupancy, 4) + " (x > " + fixed(*r.threshold, 3) + ")");
  }
  out << "histogram\n";
  for (const auto& b : r.histogram) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  [%14.6f, %14.6f) %10llu\n", b.left, b.right,
                  static_cast<unsigned long long>(b.count));
    out << buf;
  }
}

inline std::string to_text(const RunReport& r) {
  std::ostringstream out;
  write_text(out, r);
  return out.str();
}

}  // namespace slicebox
