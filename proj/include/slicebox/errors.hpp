#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace slicebox {

/// Shortest-roundtrip-safe text for a double (17 significant digits).
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Bad caller input: empty sequences, inverted ranges, non-positive sizes.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value lies outside the domain of a map or density.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The chain cannot advance from its current state.
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in density text. offset() is a zero-based byte offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : std::runtime_error("at offset " + std::to_string(offset) + ": " + message),
        offset_(offset),
        detail_(message) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t offset_;
  std::string detail_;
};

/// A draw failed inside run_chain; iteration() is the 1-based draw index.
class ChainError : public std::runtime_error {
 public:
  ChainError(std::size_t iteration, const std::string& what)
      : std::runtime_error("draw " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace slicebox
