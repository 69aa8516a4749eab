#pragma once

#include <stdexcept>
#include <string>

namespace tnsketch {

/// Malformed inputs: bad indices, inconsistent networks, invalid configuration.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File and parse failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exact enumeration would exceed the configured budget.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tnsketch
