#pragma once

#include <stdexcept>
#include <string>

namespace embedcap {

// Invalid problem data: malformed tables, normalization failures, axis
// mismatches, unknown case tags. Maps to CLI exit code 2.
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// A requested computation exceeds a configured enumeration budget.
// Refused rather than approximated. Maps to CLI exit code 3.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace embedcap
