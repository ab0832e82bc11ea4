#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lumpkit {

/// Malformed model text. Carries 1-based line and column of the offending token.
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &msg, std::size_t line, std::size_t column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg)
      , line_(line)
      , column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

/// A model that parsed but violates a structural constraint (rank, dimensions, horizon).
class ModelError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Drift evaluation hit an exactly zero denominator.
class EvaluationError : public std::runtime_error {
  public:
    EvaluationError(const std::string &msg, std::size_t component)
      : std::runtime_error(msg)
      , component_(component) {}

    /// Index of the drift component whose evaluation failed.
    std::size_t component() const noexcept { return component_; }

  private:
    std::size_t component_;
};

/// Sampling domain unsuitable (too many singular samples, empty box).
class DomainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: rank deficiency, integrator breakdown, iteration limits.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace lumpkit
