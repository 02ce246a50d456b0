#pragma once

#include <cstdio>
#include <string>

namespace tfi {

/// Round-trip decimal form: 17 significant digits, '.' separator.
inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace tfi
