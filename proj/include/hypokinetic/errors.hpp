#pragma once

#include <stdexcept>
#include <string>

namespace hypokinetic {

// Bad input: maps to exit code 2 in the CLI.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Time step outside the admissible range: exit code 3.
struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate operators (no spectral gap, coercivity failure, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace hypokinetic
