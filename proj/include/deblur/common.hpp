#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace deblur {

// Invalid arguments, shape mismatches, malformed configs.
struct ValueError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite values or singular systems encountered mid-computation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem and stream failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValueError(msg);
}

}  // namespace deblur
