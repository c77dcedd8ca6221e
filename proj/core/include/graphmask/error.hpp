#pragma once

#include <stdexcept>
#include <string>

namespace graphmask {

/// Bad user input: malformed files, invalid configs, violated preconditions.
/// The CLI maps this to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced NaN/Inf or otherwise could not complete.
/// The CLI maps this to exit code 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace graphmask
