#include "optocool/csv.hpp"

#include <cmath>
#include <cstdio>

namespace optocool {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.11e", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace optocool
