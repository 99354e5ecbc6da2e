#pragma once

#include <stdexcept>

namespace xintent {

// Malformed input that the caller handed us (bad file, bad flags, bad
// schema). The CLI maps this to exit code 2.
struct UserError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hard parse failure inside a stream (reported with a line number).
struct ParseError : UserError {
  using UserError::UserError;
};

}  // namespace xintent
