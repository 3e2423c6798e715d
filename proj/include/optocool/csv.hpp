#pragma once

#include <string>

namespace optocool {

/// Fixed CSV number format: 12 significant digits, scientific notation.
/// Non-finite values print as "nan", "inf", "-inf".
std::string format_number(double value);

}  // namespace optocool
