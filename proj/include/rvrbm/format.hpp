#pragma once

#include <charconv>
#include <string>

namespace rvrbm {

/// Shortest round-trip decimal form of a double; locale independent.
inline std::string format_double(double value)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

} // namespace rvrbm
