#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

/// k^beta(j) = Gamma(beta+j) / (Gamma(beta) Gamma(j+1)), j = 0..N.
struct KernelSeq {
    double order = 1.0;
    std::vector<double> values;

    std::size_t horizon() const noexcept { return values.size() - 1; }
    double operator[](std::size_t j) const { return values[j]; }
};

/// h_a(0..N), the scalar sequence that turns S_a into the solution operator.
struct HSeq {
    double alpha = 2.5;
    std::vector<double> values;

    std::size_t horizon() const noexcept { return values.size() - 1; }
    double operator[](std::size_t j) const { return values[j]; }
};

inline void require_fractional_order(double alpha) {
    if (!(alpha > 2.0 && alpha < 3.0))
        throw domain_error("order alpha must lie in (2,3), got " + std::to_string(alpha));
}

/// Kernel values by the term-ratio recurrence k(j+1) = k(j) (beta+j)/(j+1).
/// Works for any Real with field operations, including extended precision types.
/// Negative non-integer beta is allowed here; k^{-a} is the Grunwald weight sequence.
template <class Real>
std::vector<Real> kernel_values(const Real& beta, std::size_t N) {
    std::vector<Real> k(N + 1);
    k[0] = Real(1);
    for (std::size_t j = 0; j < N; ++j)
        k[j + 1] = k[j] * (beta + Real(static_cast<double>(j))) / Real(static_cast<double>(j + 1));
    return k;
}

inline KernelSeq kernel_sequence(double beta, std::size_t N) {
    if (!(beta > 0.0)) throw domain_error("kernel order must be positive, got " + std::to_string(beta));
    check_horizon(N);
    return {beta, kernel_values<double>(beta, N)};
}

/// Three-term recursion h(n+3) = (a-1) h(n+2) - (a-1)(a-2)/2 h(n+1).
template <class Real>
std::vector<Real> h_values(const Real& alpha, std::size_t N) {
    std::vector<Real> h(N + 1);
    const Real one(1), two(2);
    const Real a1 = alpha - one;
    const Real c = a1 * (alpha - two) / two;
    h[0] = one;
    if (N >= 1) h[1] = a1;
    if (N >= 2) h[2] = alpha * a1 / two;
    for (std::size_t n = 0; n + 3 <= N; ++n) h[n + 3] = a1 * h[n + 2] - c * h[n + 1];
    return h;
}

inline HSeq h_sequence(double alpha, std::size_t N) {
    require_fractional_order(alpha);
    check_horizon(N);
    HSeq h{alpha, h_values<double>(alpha, N)};
    for (std::size_t n = 0; n <= N; ++n)
        if (!(std::abs(h.values[n]) < 1e300))
            throw capacity_error("h_alpha(" + std::to_string(n) + ") exceeds 1e300; reduce the horizon");
    return h;
}

/// Largest root of z^2 + (1-a) z + (a-1)(a-2)/2, the geometric growth rate of h_a.
inline double h_growth_rate(double alpha) {
    return ((alpha - 1.0) + std::sqrt((alpha - 1.0) * (3.0 - alpha))) / 2.0;
}

/// max_n |(k^beta * k^gamma)(n) - k^{beta+gamma}(n)| / max(1, k^{beta+gamma}(n)).
inline double kernel_semigroup_residual(double beta, double gamma, std::size_t N) {
    const auto kb = kernel_sequence(beta, N);
    const auto kg = kernel_sequence(gamma, N);
    const auto ks = kernel_sequence(beta + gamma, N);
    double worst = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        double s = 0.0;
        for (std::size_t j = 0; j <= n; ++j) s += kb[n - j] * kg[j];
        worst = std::max(worst, std::abs(s - ks[n]) / std::max(1.0, std::abs(ks[n])));
    }
    return worst;
}

} // namespace fracdelay
