#ifndef TKOSTAT_SPECIAL_HPP
#define TKOSTAT_SPECIAL_HPP

#include <cmath>

namespace tkostat {

// log(cosh(x)), overflow-safe for large |x|
inline double log_cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

// log(I0(x)); asymptotic form past the range where cyl_bessel_i overflows
inline double log_bessel_i0(double x) {
    const double ax = std::abs(x);
    if (ax < 500.0) {
        return std::log(std::cyl_bessel_i(0.0, ax));
    }
    // I0(x) ~ e^x/sqrt(2*pi*x) * (1 + 1/8x + 9/128x^2)
    const double inv = 1.0 / ax;
    return ax - 0.5 * std::log(2.0 * M_PI * ax) +
           std::log1p(inv * (0.125 + inv * 9.0 / 128.0));
}

inline double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

} // namespace tkostat

#endif
