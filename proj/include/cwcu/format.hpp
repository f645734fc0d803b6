#pragma once

#include <cstdio>
#include <string>

namespace cwcu {

/// 17 significant digits; parses back to the identical double.
inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace cwcu
