#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace wigmore {

// All analytical numbers leave the library with 12 significant digits.
inline constexpr int kSignificantDigits = 12;

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
  return buf;
}

// Value whose shortest round-trip representation is its 12-digit form.
inline double round_significant(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

}  // namespace wigmore
