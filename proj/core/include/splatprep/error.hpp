#pragma once

#include <stdexcept>

namespace splatprep {

// Bad user input: malformed files, out-of-range parameters, missing pairs.
// The CLI maps this to exit code 1; anything else escaping is an internal
// error (exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splatprep
