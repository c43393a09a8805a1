#pragma once

#include <cstdio>
#include <string>

namespace kamtorus::detail {

/// Shortest readable rendering of a number for error messages.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace kamtorus::detail
