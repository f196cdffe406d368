#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace byzset {

/// Malformed graph: self-loop, out-of-range endpoint, too many agents.
class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive enumeration would exceed the configured work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t predicted, std::uint64_t budget)
      : std::runtime_error("enumeration budget exceeded: predicted " + std::to_string(predicted) +
                           " items, budget " + std::to_string(budget)),
        predicted_(predicted),
        budget_(budget) {}
  std::uint64_t predicted() const { return predicted_; }
  std::uint64_t budget() const { return budget_; }

 private:
  std::uint64_t predicted_;
  std::uint64_t budget_;
};

/// Text-format error carrying the 1-based line it was found on.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Inputs are well-formed but semantically inconsistent (e.g. |F| > f).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace byzset
