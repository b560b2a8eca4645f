#pragma once

#include <stdexcept>
#include <string>

namespace corrkit {

// Invalid inputs, malformed files, violated preconditions. CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed on otherwise valid input (solver non-convergence,
// loss of positive-definiteness, ...). CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace corrkit
