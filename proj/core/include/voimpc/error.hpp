#pragma once

#include <stdexcept>
#include <string>

namespace voimpc {

// Bad argument or malformed input at an API boundary.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A (f_s, f_t) pair that breaks the duty-cycle, ordering or bound constraints.
class InfeasibleDecision : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Quantity would be infinite (e.g. shutdown time under zero drain).
class UnboundedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Brute-force search refused because the enumeration guard was exceeded.
class SearchTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

// File parse failure; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string{}) +
                           ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace voimpc
