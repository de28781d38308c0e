#pragma once

#include <stdexcept>
#include <string>

namespace cocyclelab {

// Error taxonomy. The CLI maps these onto exit statuses:
// ConfigError -> 2, NumericalError -> 3, RefusalError -> 4.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct RangeError : std::range_error {
  using std::range_error::range_error;
};

struct TypeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a hypothesis guard fails (no bunching certificate,
/// nonvanishing exponents where vanishing ones are required, ...).
struct RefusalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cocyclelab
