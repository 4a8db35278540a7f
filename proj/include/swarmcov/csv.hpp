#pragma once

#include <cstdio>
#include <string>

namespace swarmcov {

// Fixed 12-significant-digit rendering shared by every CSV writer so output is
// byte-stable across runs.
inline std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace swarmcov
