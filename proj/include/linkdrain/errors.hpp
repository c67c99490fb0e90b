#pragma once

#include <stdexcept>
#include <string>

namespace linkdrain {

/// An operation exceeded its enumeration/size budget (CLI exit code 2).
struct BudgetExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A scheduling strategy cannot drain the queues (CLI exit code 3).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file or schema violation (CLI exit code 4).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace linkdrain
