#pragma once

#include <cstdint>
#include <string>

namespace xbarsim {

/// Shortest round-trip decimal form of a double (deterministic across runs).
std::string format_double(double value);

/// FNV-1a 64-bit hash of a byte string, as fixed-width hex.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace xbarsim
