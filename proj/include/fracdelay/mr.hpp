#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/resolvent.hpp"
#include "fracdelay/solver.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

enum class MrKind { E, F };

inline const char* mr_kind_name(MrKind k) { return k == MrKind::E ? "E" : "F"; }

/// Lower-triangular block-Toeplitz truncation (Tf)(n) = sum_{j<=n} c(n-j) f(j), n = 0..N,
/// with c = A (h_a * S_a) for E and c = h_a * S_a^l for F.
struct TruncatedOperator {
    MrKind kind = MrKind::E;
    std::vector<cmat> kernel;
    int d = 1;
    std::size_t N = 0;
    std::vector<std::string> warnings;

    static TruncatedOperator from_kernel(MrKind kind, std::vector<cmat> kernel) {
        if (kernel.empty()) throw shape_error("empty kernel");
        TruncatedOperator T;
        T.kind = kind;
        T.d = static_cast<int>(kernel[0].rows());
        T.N = kernel.size() - 1;
        T.kernel = std::move(kernel);
        return T;
    }
};

/// E and F share the kernel h_a * S_a, so both come from one evaluation.
struct MrPair {
    TruncatedOperator E;
    TruncatedOperator F;
};

inline MrPair build_pair(const ResolventParams& p, std::size_t N) {
    const auto P = solution_kernel(p, N);
    const int d = p.dim();
    std::vector<cmat> ce(N + 1), cf(N + 1, cmat::Zero(d, d));
    for (std::size_t n = 0; n <= N; ++n) {
        ce[n] = p.A * P.values[static_cast<long long>(n)];
        if (n >= static_cast<std::size_t>(p.lambda)) cf[n] = P.values[static_cast<long long>(n) - p.lambda];
    }
    MrPair out{TruncatedOperator::from_kernel(MrKind::E, std::move(ce)),
               TruncatedOperator::from_kernel(MrKind::F, std::move(cf))};
    if (P.overflow_risk) {
        const std::string w = "kernel norm exceeds 1e280; overflow risk from the growth of h_alpha * S_alpha";
        out.E.warnings.push_back(w);
        out.F.warnings.push_back(w);
    }
    return out;
}

inline TruncatedOperator build(MrKind kind, const ResolventParams& p, std::size_t N) {
    auto pair = build_pair(p, N);
    return kind == MrKind::E ? std::move(pair.E) : std::move(pair.F);
}

inline Signal apply(const TruncatedOperator& T, const Signal& f) {
    if (f.dim() != T.d || f.horizon() != T.N) throw shape_error("signal shape does not match the operator");
    Signal out(T.d, T.N);
    for (std::size_t n = 0; n <= T.N; ++n)
        for (std::size_t j = 0; j <= n; ++j) out[n] += T.kernel[n - j] * f[j];
    return out;
}

namespace detail {

/// Matrix-free action of the leading (n+1)-block truncation and of its adjoint on flat vectors.
struct ToeplitzAction {
    const std::vector<cmat>& c;
    std::size_t n;
    int d;
    double scale;

    cvec mul(const cvec& x) const {
        cvec y = cvec::Zero(x.size());
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                y.segment(static_cast<Eigen::Index>(i) * d, d).noalias() +=
                    c[i - j] * x.segment(static_cast<Eigen::Index>(j) * d, d);
        return y / scale;
    }
    cvec adj(const cvec& y) const {
        cvec x = cvec::Zero(y.size());
        for (std::size_t j = 0; j <= n; ++j)
            for (std::size_t i = j; i <= n; ++i)
                x.segment(static_cast<Eigen::Index>(j) * d, d).noalias() +=
                    c[i - j].adjoint() * y.segment(static_cast<Eigen::Index>(i) * d, d);
        return x / scale;
    }
};

inline double kernel_scale(const std::vector<cmat>& c, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) s = std::max(s, c[i].cwiseAbs().maxCoeff());
    return s;
}

inline cvec random_unit(Eigen::Index len, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    cvec v(len);
    for (Eigen::Index i = 0; i < len; ++i) v(i) = complex(nd(rng), nd(rng));
    return v / v.norm();
}

} // namespace detail

/// Largest singular value of the truncation to 0..n (default: the full horizon), by
/// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization. Matrix-free, so the
/// cost is O(n^2 d^2) per step.
inline double operator_norm_p2(const TruncatedOperator& T, std::size_t n = std::numeric_limits<std::size_t>::max()) {
    if (n == std::numeric_limits<std::size_t>::max()) n = T.N;
    if (n > T.N) throw shape_error("truncation beyond the operator horizon");
    if (n * static_cast<std::size_t>(T.d) > limits::dense_limit)
        throw capacity_error("N*d = " + std::to_string(n * T.d) + " exceeds the dense limit " +
                             std::to_string(limits::dense_limit));
    const double scale = detail::kernel_scale(T.kernel, n);
    if (scale == 0.0) return 0.0;
    if (!std::isfinite(scale)) throw capacity_error("kernel has non-finite entries");
    const detail::ToeplitzAction op{T.kernel, n, T.d, scale};
    const auto len = static_cast<Eigen::Index>((n + 1) * T.d);
    const Eigen::Index kmax = std::min<Eigen::Index>(len, 400);
    std::mt19937_64 rng(0x5eed);
    std::vector<cvec> U, V;
    std::vector<double> alphas, betas;
    cvec v = detail::random_unit(len, rng);
    cvec u_prev;
    double beta = 0.0, sigma = 0.0;
    int stable_steps = 0;
    for (Eigen::Index k = 0; k < kmax; ++k) {
        V.push_back(v);
        cvec u = op.mul(v);
        if (k > 0) u -= beta * u_prev;
        for (const auto& q : U) u -= q * q.dot(u);
        const double a = u.norm();
        alphas.push_back(a);
        if (a == 0.0) break;
        u /= a;
        U.push_back(u);
        cvec w = op.adj(u) - a * v;
        for (const auto& q : V) w -= q * q.dot(w);
        beta = w.norm();
        // Largest singular value of the current upper bidiagonal matrix.
        const auto m = static_cast<Eigen::Index>(alphas.size());
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            B(i, i) = alphas[static_cast<std::size_t>(i)];
            if (i + 1 < m) B(i, i + 1) = betas[static_cast<std::size_t>(i)];
        }
        const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()(0);
        stable_steps = std::abs(s - sigma) <= 1e-13 * s ? stable_steps + 1 : 0;
        sigma = s;
        if (stable_steps >= 3 || beta <= 1e-14 * sigma) break;
        betas.push_back(beta);
        u_prev = u;
        v = w / beta;
    }
    return sigma * scale;
}

/// max ||T x||_p / ||x||_p along Higham's p-norm power iterations from `trials` seeded random
/// starts. Only a lower bound on the truncated l^p norm.
inline double operator_norm_lower_bound(const TruncatedOperator& T, double p, int trials = 256,
                                        std::uint64_t seed = 1, int iterations = 8,
                                        std::size_t n = std::numeric_limits<std::size_t>::max()) {
    if (!(p > 1.0 && std::isfinite(p))) throw domain_error("p must satisfy 1 < p < infinity");
    if (n == std::numeric_limits<std::size_t>::max()) n = T.N;
    if (n > T.N) throw shape_error("truncation beyond the operator horizon");
    const double scale = detail::kernel_scale(T.kernel, n);
    if (scale == 0.0) return 0.0;
    const detail::ToeplitzAction op{T.kernel, n, T.d, scale};
    const auto len = static_cast<Eigen::Index>((n + 1) * T.d);
    const double q = p / (p - 1.0);
    auto pnorm = [](const cvec& x, double r) {
        double m = x.cwiseAbs().maxCoeff();
        if (m == 0.0) return 0.0;
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / m, r);
        return m * std::pow(s, 1.0 / r);
    };
    // dual(x) realizes <dual(x), x> = ||x||_r with ||dual(x)||_{r'} = 1.
    auto dual = [&](const cvec& x, double r) {
        const double nr = pnorm(x, r);
        cvec y = cvec::Zero(x.size());
        if (nr == 0.0) return y;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double a = std::abs(x(i));
            if (a > 0.0) y(i) = std::pow(a / nr, r - 1.0) * (x(i) / a);
        }
        return y;
    };
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        cvec x = detail::random_unit(len, rng);
        x /= pnorm(x, p);
        for (int it = 0; it < iterations; ++it) {
            const cvec y = op.mul(x);
            best = std::max(best, pnorm(y, p));
            const cvec z = op.adj(dual(y, p));
            cvec xn = dual(z, q);
            const double nx = pnorm(xn, p);
            if (nx == 0.0) break;
            x = xn / nx;
        }
    }
    return best * scale;
}

struct TrendRow {
    std::size_t N = 0;
    double norm_E = 0.0;
    double norm_F = 0.0;
    double ratio_E = 1.0;  ///< against the previous horizon; 0/0 counts as 1
    double ratio_F = 1.0;
};

struct RegularityTrend {
    std::vector<TrendRow> rows;
    bool mr_consistent = false;
    std::vector<std::string> warnings;
    std::string failure;  ///< set when the operators could not be evaluated
};

/// l^2 norms of the nested truncations of E and F at increasing horizons. Consistent with
/// maximal regularity iff no ratio between successive horizons exceeds 1.05. Evidence only.
inline RegularityTrend regularity_trend(const ResolventParams& p,
                                        std::vector<std::size_t> horizons = {256, 512, 1024, 2048}) {
    RegularityTrend tr;
    if (horizons.empty()) throw domain_error("regularity_trend needs at least one horizon");
    if (!std::is_sorted(horizons.begin(), horizons.end()) ||
        std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end())
        throw domain_error("horizons must be strictly increasing");
    try {
        const auto pair = build_pair(p, horizons.back());
        tr.warnings = pair.E.warnings;
        auto ratio = [](double now, double before) {
            if (before == 0.0) return now == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
            return now / before;
        };
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            TrendRow row;
            row.N = horizons[i];
            row.norm_E = operator_norm_p2(pair.E, horizons[i]);
            row.norm_F = operator_norm_p2(pair.F, horizons[i]);
            if (i > 0) {
                row.ratio_E = ratio(row.norm_E, tr.rows.back().norm_E);
                row.ratio_F = ratio(row.norm_F, tr.rows.back().norm_F);
            }
            tr.rows.push_back(row);
        }
    } catch (const capacity_error& e) {
        tr.failure = e.what();
        tr.mr_consistent = false;
        return tr;
    }
    tr.mr_consistent = std::all_of(tr.rows.begin(), tr.rows.end(),
                                   [](const TrendRow& r) { return r.ratio_E <= 1.05 && r.ratio_F <= 1.05; });
    return tr;
}

/// max_{3<=n<=N} ||Delta^a u(n) - (E f)(n-3) - g (F f)(n-3) - f(n)||, relative to
/// max(1, max_{m<=n} ||Delta^a u(m)||).
inline double reconstruction_residual(const ProblemSpec& spec, const Solution& sol, const MrPair& ops) {
    if (ops.E.N < spec.N) throw shape_error("operators are shorter than the problem horizon");
    const auto& du = sol.dalpha_u;
    double worst = 0.0, scale = 1.0;
    for (std::size_t n = 0; n <= spec.N; ++n) {
        scale = std::max(scale, du[n].norm());
        if (n < 3) continue;
        cvec r = du[n] - spec.f[n];
        for (std::size_t j = 0; j <= n - 3; ++j)
            r -= (ops.E.kernel[n - 3 - j] + spec.gamma * ops.F.kernel[n - 3 - j]) * spec.f[j];
        worst = std::max(worst, r.norm() / scale);
    }
    return worst;
}

} // namespace fracdelay
