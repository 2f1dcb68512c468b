#pragma once

#include <stdexcept>
#include <string>

namespace influence {

// Bad user input: malformed files, invalid configuration, schema mismatch.
// The CLI maps this to exit code 2.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numeric procedure failed (root bracket not found, degenerate problem).
// The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// An internal invariant was violated. The CLI maps this to exit code 4.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace influence
