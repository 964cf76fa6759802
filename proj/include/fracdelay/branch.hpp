#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "fracdelay/errors.hpp"

// Branch convention shared by every frequency-domain evaluation:
// z^{3-a}(z-1)^a is defined as z^3 (1 - 1/z)^a with the principal power.
// On |z| = 1 this is g_a(t) = e^{3it}(1 - e^{-it})^a, smooth on t != 0 because
// Re(1 - e^{-it}) = 1 - cos t > 0. For |z| > 1 it is the analytic continuation
// of the z-transform of the recursion, since Re(1 - 1/z) > 0 there as well.

namespace fracdelay {

/// g_a(t) = e^{3it}(1 - e^{-it})^a. Uses 1 - e^{-it} = 2|sin(t/2)| e^{i(+-pi/2 - t/2)}.
inline std::complex<double> g_symbol(double alpha, double t) {
    if (t == 0.0) throw domain_error("g_symbol: t = 0 is the branch point");
    const double s = 2.0 * std::abs(std::sin(t / 2.0));
    const double arg = (t > 0.0 ? std::numbers::pi / 2.0 : -std::numbers::pi / 2.0) - t / 2.0;
    return std::polar(std::pow(s, alpha), 3.0 * t + alpha * arg);
}

/// z^3 (1 - 1/z)^a off the unit circle.
inline std::complex<double> fractional_symbol_z(double alpha, std::complex<double> z) {
    return z * z * z * std::pow(1.0 - 1.0 / z, alpha);
}

} // namespace fracdelay
