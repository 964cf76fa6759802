#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fracdelay/fracdelay.hpp"

namespace testsupport {

using fracdelay::cmat;
using fracdelay::complex;
using fracdelay::cvec;

inline cmat random_matrix(int d, std::mt19937_64& rng, double norm_bound = 1.0) {
    std::normal_distribution<double> nd;
    cmat A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = complex(nd(rng), nd(rng));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    return A * (norm_bound * u(rng) / fracdelay::norm2(A));
}

inline fracdelay::Signal random_signal(int d, std::size_t N, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    fracdelay::Signal f(d, N);
    for (auto& v : f.values())
        for (int i = 0; i < d; ++i) v(i) = complex(nd(rng), nd(rng));
    return f;
}

inline cmat scalar(complex a) { return cmat::Constant(1, 1, a); }

/// Gamma-function form of k^b(j), an oracle independent of the ratio recurrence.
inline double kernel_lgamma(double beta, std::size_t j) {
    return std::exp(std::lgamma(beta + static_cast<double>(j)) - std::lgamma(beta) -
                    std::lgamma(static_cast<double>(j) + 1.0));
}

/// (-1)^j binom(a, j) by an explicit product.
inline long double gl_weight(long double a, std::size_t j) {
    long double w = 1.0L;
    for (std::size_t i = 0; i < j; ++i) w *= -(a - static_cast<long double>(i)) / static_cast<long double>(i + 1);
    return w;
}

/// Scalar resolvent recursion in long double, every convolution recomputed from scratch,
/// kernel values from lgammal.
inline std::vector<long double> scalar_resolvent_oracle(long double a, long double alpha, long double gamma,
                                                        int lambda, std::size_t N) {
    std::vector<long double> k(N + 1);
    const long double beta = alpha - 2.0L;
    for (std::size_t j = 0; j <= N; ++j)
        k[j] = std::exp(std::lgamma(beta + j) - std::lgamma(beta) - std::lgamma(static_cast<long double>(j) + 1.0L));
    const long double c = (alpha - 1.0L) * (alpha - 2.0L) / 2.0L;
    std::vector<long double> S(N + 1, 0.0L);
    S[0] = S[1] = S[2] = 1.0L;
    auto Sd = [&](long long n) { return n < 0 ? 0.0L : S[static_cast<std::size_t>(n)]; };
    for (std::size_t n = 0; n + 3 <= N; ++n) {
        long double c1 = 0.0L, c2 = 0.0L;
        for (std::size_t j = 0; j <= n; ++j) {
            c1 += k[n - j] * S[j];
            c2 += k[n - j] * Sd(static_cast<long long>(j) - lambda);
        }
        S[n + 3] = 2.0L * S[n + 2] - S[n + 1] + a * c1 + gamma * c2 + k[n + 3] + (1.0L - alpha) * k[n + 2] +
                   c * k[n + 1];
    }
    return S;
}

} // namespace testsupport
