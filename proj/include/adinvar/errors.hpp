#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace adinvar {

/// Malformed SAC text or rule expression. Line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// An elemental was evaluated outside its domain, or differentiated at a
/// point where it is not differentiable. Carries the 1-based SAC step once
/// the evaluator has attached it.
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string elemental, std::string reason, std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(format(elemental, reason, step)),
        elemental_(std::move(elemental)),
        reason_(std::move(reason)),
        step_(step) {}

  const std::string& elemental() const noexcept { return elemental_; }
  const std::string& reason() const noexcept { return reason_; }
  std::optional<std::size_t> step() const noexcept { return step_; }

  DomainError at_step(std::size_t step) const { return DomainError(elemental_, reason_, step); }

 private:
  static std::string format(const std::string& elemental, const std::string& reason, std::optional<std::size_t> step) {
    std::string msg = "domain error in " + elemental + ": " + reason;
    if (step) msg += " (step " + std::to_string(*step) + ")";
    return msg;
  }

  std::string elemental_;
  std::string reason_;
  std::optional<std::size_t> step_;
};

/// Seed or input vector whose length does not match the expected shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested derivative order exceeds the configured cap.
class OrderCapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad configuration or arguments (size guard, empty corpus, unknown names).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace adinvar
