#pragma once

#include <stdexcept>
#include <string>

namespace atdr {

// Invalid caller input (bad flags, malformed requests). Maps to exit code 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent data: parse failures, invariant violations,
// unsolvable recipes. Maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atdr
