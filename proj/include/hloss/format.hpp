#pragma once

#include <cstdio>
#include <string>

namespace hloss {

/// Fixed six-decimal rendering, or round-trip precision when `full` is set.
inline std::string format_number(double value, bool full = false) {
    char buf[64];
    std::snprintf(buf, sizeof buf, full ? "%.17g" : "%.6f", value);
    return buf;
}

} // namespace hloss
