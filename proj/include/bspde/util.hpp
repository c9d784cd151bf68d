#pragma once

#include <cstdio>
#include <string>

namespace bspde {

// 17 significant digits: round-trips any double exactly.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Compensated (Kahan) accumulator for long reductions in checks and oracles.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

} // namespace bspde
