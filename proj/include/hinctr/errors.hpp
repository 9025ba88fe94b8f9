#pragma once

#include <stdexcept>
#include <string>

namespace hinctr {

// Error taxonomy mirrors the CLI exit codes: usage errors exit 1,
// data/validation errors exit 2, numeric failures exit 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hinctr
