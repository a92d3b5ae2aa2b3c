#pragma once

#include <cstdio>
#include <string>

namespace platoon::csv {

/// Shortest decimal form at the given precision. 12 digits is the default
/// for human-facing trajectory files; 17 round-trips doubles bit-exactly
/// and is used wherever a file is read back (datasets, models).
inline std::string num(double v, int significant_digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

inline std::string num17(double v) { return num(v, 17); }

}  // namespace platoon::csv
