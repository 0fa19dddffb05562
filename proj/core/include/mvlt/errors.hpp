#pragma once

#include <stdexcept>

namespace mvlt {

// Malformed or inconsistent configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable, malformed, or inconsistent dataset or checkpoint content.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced non-finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mvlt
