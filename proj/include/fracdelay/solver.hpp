#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracdelay/calculus.hpp"
#include "fracdelay/errors.hpp"
#include "fracdelay/kernels.hpp"
#include "fracdelay/resolvent.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

/// Delta^a u(n) = A u(n) + g u(n-l) + f(n), n = 0..N, with u(-l..2) = 0.
struct ProblemSpec {
    cmat A;
    double alpha = 2.5;
    double gamma = 0.0;
    int lambda = 1;
    std::size_t N = 0;
    Signal f;

    ResolventParams params() const { return {A, alpha, gamma, lambda}; }

    void validate() const {
        params().validate();
        check_horizon(N + 3);
        if (f.dim() != A.rows())
            throw shape_error("forcing dimension " + std::to_string(f.dim()) + " does not match A (" +
                              std::to_string(A.rows()) + ")");
        if (f.horizon() != N)
            throw shape_error("forcing horizon " + std::to_string(f.horizon()) + " differs from N = " +
                              std::to_string(N));
        if (!f.all_finite()) throw domain_error("forcing has non-finite entries");
    }
};

enum class Method { convolution, direct };

inline const char* method_name(Method m) { return m == Method::convolution ? "convolution" : "direct"; }

struct Solution {
    Signal u;         ///< 0..N+3, u(0) = u(1) = u(2) = 0
    Signal dalpha_u;  ///< Delta^a u on 0..N
    double residual_max = 0.0;
    Method method = Method::convolution;
    unsigned precision_bits = 0;  ///< working precision of the kernel, convolution path only
    std::vector<std::string> warnings;
};

namespace detail {

inline double max_norm_upto(const Signal& s, std::vector<double>& running) {
    running.resize(s.size());
    double m = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        m = std::max(m, s[n].norm());
        running[n] = m;
    }
    return m;
}

} // namespace detail

/// ||Delta^a u(n) - A u(n) - g u(n-l) - f(n)|| for n = 0..N, each divided by
/// max(1, max_{m<=n+3} |u(m)|, max_{m<=n} |f(m)|). u(n-l) reads zero for n < l.
inline std::vector<double> residual_profile(const ProblemSpec& spec, const Signal& u) {
    if (u.horizon() != spec.N + 3) throw shape_error("u must be given on 0..N+3");
    if (u.dim() != spec.A.rows()) throw shape_error("u dimension does not match A");
    const auto du = fractional_difference(u, spec.alpha);
    std::vector<double> su, sf;
    detail::max_norm_upto(u, su);
    detail::max_norm_upto(spec.f, sf);
    std::vector<double> out(spec.N + 1);
    const auto l = static_cast<std::size_t>(spec.lambda);
    for (std::size_t n = 0; n <= spec.N; ++n) {
        cvec r = du[n] - spec.A * u[n] - spec.f[n];
        if (n >= l) r -= spec.gamma * u[n - l];
        out[n] = r.norm() / std::max({1.0, su[n + 3], sf[n]});
    }
    return out;
}

inline double residual(const ProblemSpec& spec, const Signal& u) {
    const auto r = residual_profile(spec, u);
    return *std::max_element(r.begin(), r.end());
}

namespace detail {

inline Solution finish(const ProblemSpec& spec, Signal u, Method m) {
    Solution s;
    s.method = m;
    s.dalpha_u = fractional_difference(u, spec.alpha);
    s.u = std::move(u);
    s.residual_max = residual(spec, s.u);
    if (!s.u.all_finite()) s.warnings.push_back("solution contains non-finite values");
    return s;
}

/// Explicit stepping of the equation written as Delta^3 w = A u + g u(.-l) + f with
/// w = k^{3-a} * u. Since k^{3-a}(0) = 1 each u(n+3) follows from earlier values.
/// A nonzero seed replaces u(3) and is only used by negative controls.
inline Signal direct_steps(const ProblemSpec& spec, std::optional<cvec> seed_u3 = std::nullopt) {
    const std::size_t N = spec.N;
    const int d = static_cast<int>(spec.A.rows());
    const auto k = kernel_values<double>(3.0 - spec.alpha, N + 3);
    const auto l = static_cast<std::size_t>(spec.lambda);
    Signal u(d, N + 3);
    std::vector<cvec> w(N + 4, cvec::Zero(d));
    for (std::size_t n = 0; n <= N; ++n) {
        const std::size_t m = n + 3;
        cvec v = spec.A * u[n] + spec.f[n];
        if (n >= l) v += spec.gamma * u[n - l];
        v += 3.0 * w[n + 2] - 3.0 * w[n + 1] + w[n];
        for (std::size_t j = 1; j <= m; ++j) v -= k[j] * u[m - j];
        if (n == 0 && seed_u3) v = *seed_u3;
        u[m] = std::move(v);
        for (std::size_t j = 0; j <= m; ++j) w[m] += k[m - j] * u[j];
    }
    return u;
}

} // namespace detail

/// u(n) = (h_a * S_a * f)(n-3). The kernel h_a * S_a is formed in extended precision because
/// the sum cancels about n log10(rho) digits, rho the growth rate of h_a.
inline Solution solve_convolution(const ProblemSpec& spec) {
    spec.validate();
    const auto P = solution_kernel(spec.params(), spec.N);
    const int d = static_cast<int>(spec.A.rows());
    Signal u(d, spec.N + 3);
    for (std::size_t n = 3; n <= spec.N + 3; ++n) {
        const std::size_t m = n - 3;
        cvec acc = cvec::Zero(d);
        for (std::size_t j = 0; j <= m; ++j) acc += P.values[static_cast<long long>(m - j)] * spec.f[j];
        u[n] = std::move(acc);
    }
    auto s = detail::finish(spec, std::move(u), Method::convolution);
    s.precision_bits = P.precision_bits;
    if (P.overflow_risk) s.warnings.push_back("solution kernel norm exceeds 1e280; overflow risk");
    return s;
}

inline Solution solve_direct(const ProblemSpec& spec) {
    spec.validate();
    return detail::finish(spec, detail::direct_steps(spec), Method::direct);
}

inline Solution solve(const ProblemSpec& spec, Method m) {
    return m == Method::convolution ? solve_convolution(spec) : solve_direct(spec);
}

/// |u_a - u_b|_inf / max(1, |u_b|_inf) over the common horizon.
inline double method_deviation(const Solution& a, const Solution& b) {
    if (a.u.size() != b.u.size()) throw shape_error("solutions have different horizons");
    double diff = 0.0;
    for (std::size_t n = 0; n < a.u.size(); ++n) diff = std::max(diff, (a.u[n] - b.u[n]).norm());
    return diff / std::max(1.0, b.u.sup_norm());
}

struct HomogeneousVerdict {
    bool zero = false;   ///< every entry of u is exactly 0
    double sup_norm = 0.0;
};

/// Runs the direct stepping with f = 0. An optional u(3) seed breaks uniqueness on purpose.
inline HomogeneousVerdict homogeneous_check(const ResolventParams& p, std::size_t N,
                                            std::optional<cvec> seed_u3 = std::nullopt) {
    p.validate();
    ProblemSpec spec{p.A, p.alpha, p.gamma, p.lambda, N, Signal(p.dim(), N)};
    if (seed_u3 && seed_u3->size() != p.A.rows()) throw shape_error("seed dimension does not match A");
    const auto u = detail::direct_steps(spec, seed_u3);
    HomogeneousVerdict v;
    v.zero = true;
    for (const auto& x : u.values())
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x(i) != complex(0.0, 0.0)) v.zero = false;
    v.sup_norm = u.sup_norm();
    return v;
}

} // namespace fracdelay
