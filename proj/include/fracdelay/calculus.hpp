#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/kernels.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

namespace detail {

template <class E>
E zero_like(const E& e) {
    return E::Zero(e.rows(), e.cols());
}

/// (a * g)(n) = sum_{j<=n} a(n-j) g(j) for n = 0..N.
template <class Scalar, class E>
std::vector<E> convolve(const std::vector<Scalar>& a, const std::vector<E>& g) {
    if (a.size() != g.size())
        throw shape_error("convolution horizon mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(g.size()));
    std::vector<E> out(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        E acc = zero_like(g[0]);
        for (std::size_t j = 0; j <= n; ++j) acc += a[n - j] * g[j];
        out[n] = std::move(acc);
    }
    return out;
}

template <class E>
std::vector<E> forward_difference(std::vector<E> u, int m) {
    if (m < 1) throw domain_error("difference order must be >= 1");
    if (static_cast<std::size_t>(m) + 1 > u.size())
        throw shape_error("difference order " + std::to_string(m) + " exceeds horizon " +
                          std::to_string(u.size() == 0 ? 0 : u.size() - 1));
    for (int step = 0; step < m; ++step) {
        for (std::size_t n = 0; n + 1 < u.size(); ++n) u[n] = u[n + 1] - u[n];
        u.pop_back();
    }
    return u;
}

/// Delta^a u = Delta^3 (k^{3-a} * u); output covers n = 0..N-3.
template <class E>
std::vector<E> fractional_difference(const std::vector<E>& u, double alpha) {
    require_fractional_order(alpha);
    if (u.size() < 4) throw shape_error("fractional difference needs horizon N >= 3");
    const auto k = kernel_values<double>(3.0 - alpha, u.size() - 1);
    return forward_difference(convolve(k, u), 3);
}

} // namespace detail

template <class Scalar>
Signal convolve(const std::vector<Scalar>& a, const Signal& g) {
    Signal out(g.dim(), g.horizon());
    out.values() = detail::convolve(a, g.values());
    return out;
}

/// Negative-index entries of g are ignored; the result is indexed 0..N.
template <class Scalar>
OperatorSeq convolve(const std::vector<Scalar>& a, const OperatorSeq& g) {
    auto vals = detail::convolve(a, g.nonnegative());
    OperatorSeq out(g.dim(), 0, g.horizon());
    for (std::size_t n = 0; n < vals.size(); ++n) out[static_cast<long long>(n)] = std::move(vals[n]);
    return out;
}

inline Signal forward_difference(const Signal& u, int m) {
    auto vals = detail::forward_difference(u.values(), m);
    Signal out(u.dim(), vals.size() - 1);
    out.values() = std::move(vals);
    return out;
}

/// Delta^{-beta} u = k^beta * u, 0 < beta <= 1.
inline Signal fractional_sum(const Signal& u, double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw domain_error("fractional sum order must lie in (0,1], got " + std::to_string(beta));
    return convolve(kernel_sequence(beta, u.horizon()).values, u);
}

inline Signal fractional_difference(const Signal& u, double alpha) {
    auto vals = detail::fractional_difference(u.values(), alpha);
    Signal out(u.dim(), vals.size() - 1);
    out.values() = std::move(vals);
    return out;
}

/// Columnwise Delta^a of a matrix sequence restricted to n >= 0.
inline OperatorSeq fractional_difference(const OperatorSeq& S, double alpha) {
    auto vals = detail::fractional_difference(S.nonnegative(), alpha);
    OperatorSeq out(S.dim(), 0, vals.size() - 1);
    for (std::size_t n = 0; n < vals.size(); ++n) out[static_cast<long long>(n)] = std::move(vals[n]);
    return out;
}

/// Largest violation of
///   Delta^a(b*P)(n) = (b * Delta^a P)(n) + b(n+3) P(0) + b(n+2) [P(1) - a P(0)]
///                     + b(n+1) [P(2) - a P(1) + a(a-1)/2 P(0)]
/// over n = 0..N-3.
template <class Scalar>
double conv_diff_identity_residual(const std::vector<Scalar>& b, const Signal& P, double alpha) {
    require_fractional_order(alpha);
    if (P.horizon() < 6) throw shape_error("identity check needs horizon N >= 6");
    if (b.size() != P.size()) throw shape_error("b and P horizons differ");
    const auto lhs = fractional_difference(convolve(b, P), alpha);
    const auto dP = fractional_difference(P, alpha);
    const std::size_t M = dP.size();
    std::vector<Scalar> b_head(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(M));
    const auto conv = detail::convolve(b_head, dP.values());
    const cvec c0 = P[0];
    const cvec c1 = P[1] - alpha * P[0];
    const cvec c2 = P[2] - alpha * P[1] + (alpha * (alpha - 1.0) / 2.0) * P[0];
    double worst = 0.0;
    for (std::size_t n = 0; n < M; ++n) {
        const cvec rhs = conv[n] + b[n + 3] * c0 + b[n + 2] * c1 + b[n + 1] * c2;
        worst = std::max(worst, (lhs[n] - rhs).norm());
    }
    return worst;
}

} // namespace fracdelay
