#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace votespread {

// Shortest round-trip decimal form; empty for NaN.
inline std::string format_double(double value) {
  if (std::isnan(value)) return {};
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace votespread
