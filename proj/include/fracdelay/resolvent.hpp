#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fracdelay/branch.hpp"
#include "fracdelay/calculus.hpp"
#include "fracdelay/errors.hpp"
#include "fracdelay/extended.hpp"
#include "fracdelay/kernels.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

/// Generator data (A, a, g, l) of the a-resolvent sequence.
struct ResolventParams {
    cmat A;
    double alpha = 2.5;
    double gamma = 0.0;
    int lambda = 1;

    int dim() const { return static_cast<int>(A.rows()); }

    void validate() const {
        if (A.rows() != A.cols() || A.rows() < 1) throw shape_error("A must be a non-empty square matrix");
        if (!A.allFinite()) throw domain_error("A has non-finite entries");
        require_fractional_order(alpha);
        if (!std::isfinite(gamma)) throw domain_error("gamma must be finite");
        if (lambda < 1) throw domain_error("delay lambda must be >= 1, got " + std::to_string(lambda));
    }
};

namespace detail {

/// Explicit stepping of
///   S(n+3) = 2 S(n+2) - S(n+1) + A (k*S)(n) + g (k*S)(n-l) + [k(n+3) + (1-a) k(n+2) + c k(n+1)] I,
/// with k = k^{a-2}, c = (a-1)(a-2)/2 and (k*S^l)(n) = (k*S)(n-l). Complex matrices are kept
/// as split real/imaginary row-major storage so the same code runs in double and in mp_real.
/// State (kernel, partial sums) is retained, so extend_to() only pays for new terms.
template <class Real>
class ResolventStepper {
public:
    explicit ResolventStepper(const ResolventParams& p)
        : d_(static_cast<std::size_t>(p.dim())), dd_(d_ * d_), lambda_(static_cast<std::size_t>(p.lambda)),
          has_delay_(p.gamma != 0.0), alpha_(p.alpha), gamma_(p.gamma), beta_(Real(p.alpha) - Real(2)) {
        p.validate();
        const Real one(1), two(2);
        c_ = (alpha_ - one) * (alpha_ - two) / two;
        ar_.resize(dd_);
        ai_.resize(dd_);
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) {
                ar_[i * d_ + j] = Real(p.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).real());
                ai_[i * d_ + j] = Real(p.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)).imag());
            }
        k_.push_back(one);
        sre_.assign(3 * dd_, Real(0));
        sim_.assign(3 * dd_, Real(0));
        for (std::size_t n = 0; n < 3; ++n)
            for (std::size_t i = 0; i < d_; ++i) sre_[n * dd_ + i * d_ + i] = one;
    }

    std::size_t dim() const noexcept { return d_; }
    std::size_t horizon() const noexcept { return sre_.size() / dd_ - 1; }
    const std::vector<Real>& re() const noexcept { return sre_; }
    const std::vector<Real>& im() const noexcept { return sim_; }

    void extend_to(std::size_t N) {
        if (N <= horizon()) return;
        ensure_kernel(N);
        sre_.resize((N + 1) * dd_);
        sim_.resize((N + 1) * dd_);
        cre_.resize((N + 1) * dd_);
        cim_.resize((N + 1) * dd_);
        for (std::size_t n = computed_ - 2; n + 3 <= N; ++n) step(n);
        computed_ = N;
    }

private:
    void ensure_kernel(std::size_t N) {
        while (k_.size() < N + 1) {
            const std::size_t j = k_.size() - 1;
            k_.push_back(k_[j] * (beta_ + Real(static_cast<double>(j))) / Real(static_cast<double>(j + 1)));
        }
    }

    void step(std::size_t n) {
        Real* cr = &cre_[n * dd_];
        Real* ci = &cim_[n * dd_];
        for (std::size_t e = 0; e < dd_; ++e) {
            Real accr(0), acci(0);
            for (std::size_t j = 0; j <= n; ++j) {
                accr += k_[n - j] * sre_[j * dd_ + e];
                acci += k_[n - j] * sim_[j * dd_ + e];
            }
            cr[e] = accr;
            ci[e] = acci;
        }
        const Real one(1);
        const Real diag = k_[n + 3] + (one - alpha_) * k_[n + 2] + c_ * k_[n + 1];
        const std::size_t o3 = (n + 3) * dd_, o2 = (n + 2) * dd_, o1 = (n + 1) * dd_;
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) {
                Real vr = Real(2) * sre_[o2 + i * d_ + j] - sre_[o1 + i * d_ + j];
                Real vi = Real(2) * sim_[o2 + i * d_ + j] - sim_[o1 + i * d_ + j];
                for (std::size_t l = 0; l < d_; ++l) {
                    const Real& a_r = ar_[i * d_ + l];
                    const Real& a_i = ai_[i * d_ + l];
                    vr += a_r * cr[l * d_ + j];
                    vr -= a_i * ci[l * d_ + j];
                    vi += a_r * ci[l * d_ + j];
                    vi += a_i * cr[l * d_ + j];
                }
                if (has_delay_ && n >= lambda_) {
                    const std::size_t od = (n - lambda_) * dd_ + i * d_ + j;
                    vr += gamma_ * cre_[od];
                    vi += gamma_ * cim_[od];
                }
                if (i == j) vr += diag;
                sre_[o3 + i * d_ + j] = vr;
                sim_[o3 + i * d_ + j] = vi;
            }
    }

    std::size_t d_, dd_, lambda_;
    bool has_delay_;
    Real alpha_, gamma_, beta_, c_;
    std::vector<Real> ar_, ai_, k_;
    std::vector<Real> sre_, sim_, cre_, cim_;
    std::size_t computed_ = 2;
};

template <class Real>
cmat split_entry(const std::vector<Real>& re, const std::vector<Real>& im, std::size_t n, std::size_t d) {
    cmat m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const std::size_t e = n * d * d + i * d + j;
            if constexpr (std::is_same_v<Real, double>)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = complex(re[e], im[e]);
            else
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    complex(re[e].template convert_to<double>(), im[e].template convert_to<double>());
        }
    return m;
}

} // namespace detail

/// S_a(n) for n = -l..N together with its generator.
class ResolventSeq {
public:
    ResolventSeq(ResolventParams params, OperatorSeq seq) : params_(std::move(params)), seq_(std::move(seq)) {}

    const ResolventParams& params() const noexcept { return params_; }
    const OperatorSeq& seq() const noexcept { return seq_; }
    std::size_t horizon() const noexcept { return seq_.horizon(); }
    int dim() const noexcept { return seq_.dim(); }
    const cmat& operator[](long long n) const { return seq_[n]; }

private:
    ResolventParams params_;
    OperatorSeq seq_;
};

inline ResolventSeq resolvent_sequence(const ResolventParams& p, std::size_t N) {
    p.validate();
    check_horizon(N);
    if (N < 2) throw shape_error("resolvent horizon must be >= 2");
    detail::ResolventStepper<double> stepper(p);
    stepper.extend_to(N);
    const auto d = static_cast<std::size_t>(p.dim());
    OperatorSeq seq(p.dim(), -p.lambda, N);
    for (std::size_t n = 0; n <= N; ++n) {
        seq[static_cast<long long>(n)] = detail::split_entry(stepper.re(), stepper.im(), n, d);
        if (!seq[static_cast<long long>(n)].allFinite())
            throw capacity_error("S_alpha(" + std::to_string(n) + ") overflows double precision");
    }
    return {p, std::move(seq)};
}

inline ResolventSeq resolvent_sequence(const cmat& A, double alpha, double gamma, int lambda, std::size_t N) {
    return resolvent_sequence(ResolventParams{A, alpha, gamma, lambda}, N);
}

/// S_a^l(n) = S_a(n - l) on 0..N, reading the stored zeros for n < l.
inline OperatorSeq delayed(const ResolventSeq& S) {
    const int l = S.params().lambda;
    OperatorSeq out(S.dim(), 0, S.horizon());
    for (long long n = 0; n <= static_cast<long long>(S.horizon()); ++n) out[n] = S[n - l];
    return out;
}

namespace detail {

/// Running max(1, max_{m<=n} ||seq(m)||) for n = 0..N.
inline std::vector<double> running_scale(const OperatorSeq& s) {
    std::vector<double> out(s.horizon() + 1);
    double m = 1.0;
    for (std::size_t n = 0; n < out.size(); ++n) {
        m = std::max(m, norm2(s[static_cast<long long>(n)]));
        out[n] = m;
    }
    return out;
}

} // namespace detail

/// max over n in [n_lo, min(n_hi, N-3)] of ||Delta^a S(n) - A S(n) - g S^l(n)|| relative to
/// max(1, max_{m<=n+3} ||S(m)||).
inline double resolvent_residual(const ResolventSeq& S, std::size_t n_lo = 0,
                                 std::size_t n_hi = std::numeric_limits<std::size_t>::max()) {
    if (S.horizon() < 6) throw shape_error("resolvent_residual needs N >= 6");
    const auto& p = S.params();
    const auto dS = fractional_difference(S.seq(), p.alpha);
    const auto scale = detail::running_scale(S.seq());
    const std::size_t last = std::min(n_hi, dS.horizon());
    double worst = 0.0;
    for (std::size_t n = n_lo; n <= last; ++n) {
        const auto m = static_cast<long long>(n);
        const cmat r = dS[m] - p.A * S[m] - p.gamma * S[m - p.lambda];
        worst = std::max(worst, norm2(r) / scale[n + 3]);
    }
    return worst;
}

/// Post-hoc residual of the defining recursion, recomputing both convolutions from stored values.
inline double recursion_residual(const ResolventSeq& S) {
    const auto& p = S.params();
    const std::size_t N = S.horizon();
    const auto k = kernel_values<double>(p.alpha - 2.0, N);
    const double c = (p.alpha - 1.0) * (p.alpha - 2.0) / 2.0;
    const auto scale = detail::running_scale(S.seq());
    const int d = S.dim();
    const cmat I = cmat::Identity(d, d);
    double worst = 0.0;
    for (std::size_t n = 0; n + 3 <= N; ++n) {
        cmat ks = cmat::Zero(d, d), ksl = cmat::Zero(d, d);
        for (std::size_t j = 0; j <= n; ++j) {
            const auto jj = static_cast<long long>(j);
            ks += k[n - j] * S[jj];
            ksl += k[n - j] * S[jj - p.lambda];
        }
        const auto m = static_cast<long long>(n);
        const cmat r = S[m + 3] - 2.0 * S[m + 2] + S[m + 1] - p.A * ks - p.gamma * ksl -
                       (k[n + 3] + (1.0 - p.alpha) * k[n + 2] + c * k[n + 1]) * I;
        worst = std::max(worst, norm2(r) / scale[n + 3]);
    }
    return worst;
}

struct BoundednessProbe {
    double sup_norm = 0.0;
    std::size_t argmax = 0;
    double tail_growth = 0.0;  ///< max over last quarter / max over third quarter
    bool bounded_looking = false;  ///< heuristic, not a proof
};

/// Heuristic check of sup_n ||S(n)|| < infinity on a finite horizon.
inline BoundednessProbe boundedness_probe(const ResolventSeq& S) {
    const std::size_t N = S.horizon();
    if (N < 64) throw shape_error("boundedness_probe needs N >= 64");
    BoundednessProbe out;
    double m3 = 0.0, m4 = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        const double v = norm2(S[static_cast<long long>(n)]);
        if (v > out.sup_norm) {
            out.sup_norm = v;
            out.argmax = n;
        }
        if (4 * n >= 2 * N && 4 * n < 3 * N) m3 = std::max(m3, v);
        if (4 * n >= 3 * N) m4 = std::max(m4, v);
    }
    out.tail_growth = m3 > 0.0 ? m4 / m3 : (m4 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    out.bounded_looking = out.tail_growth <= 1.0 + 1e-3;
    return out;
}

/// Per-step geometric growth estimated from the last two quarters of a norm profile.
inline double tail_growth_rate(const std::vector<double>& norms) {
    const std::size_t N = norms.size() - 1;
    const std::size_t q = std::max<std::size_t>(1, N / 4);
    double m3 = 0.0, m4 = 0.0;
    for (std::size_t n = N / 2; n <= N; ++n) (n < N - q + 1 ? m3 : m4) = std::max(n < N - q + 1 ? m3 : m4, norms[n]);
    if (m3 == 0.0) return 0.0;
    return std::pow(m4 / m3, 1.0 / static_cast<double>(q));
}

/// [z^3(1-1/z)^a - g z^{-l} - A]^{-1}; throws quadrature_error when numerically singular.
inline cmat symbol_resolvent_z(const ResolventParams& p, complex z) {
    const int d = p.dim();
    const complex s = fractional_symbol_z(p.alpha, z) - p.gamma * std::pow(z, -p.lambda);
    const cmat D = s * cmat::Identity(d, d) - p.A;
    Eigen::JacobiSVD<cmat> svd(D);
    const auto& sv = svd.singularValues();
    if (!(sv(d - 1) > 1e-14 * sv(0)))
        throw quadrature_error(z, "symbol is singular at contour node z = (" + std::to_string(z.real()) + "," +
                                      std::to_string(z.imag()) + ")");
    return D.fullPivLu().inverse();
}

struct ContourResult {
    int n = 3;
    cmat value;
    double relative_change = 0.0;  ///< ||I_M - I_2M|| / ||I_2M||
    bool accuracy_warning = false;
};

namespace detail {

/// Trapezoid sums (1/M) sum_k z_k^{n+1} q(z_k) R(z_k) for all requested n at once.
inline std::vector<cmat> contour_sums(const ResolventParams& p, const std::vector<int>& ns, double r, int M) {
    const int d = p.dim();
    const double c = (p.alpha - 1.0) * (p.alpha - 2.0) / 2.0;
    std::vector<cmat> acc(ns.size(), cmat::Zero(d, d));
    for (int k = 0; k < M; ++k) {
        const complex z = std::polar(r, 2.0 * std::numbers::pi * k / M);
        const cmat R = symbol_resolvent_z(p, z);
        const complex q = z * z + (1.0 - p.alpha) * z + c;
        for (std::size_t i = 0; i < ns.size(); ++i) acc[i] += (std::pow(z, ns[i] + 1) * q) * R;
    }
    for (auto& a : acc) a /= static_cast<double>(M);
    return acc;
}

} // namespace detail

/// (1/2 pi i) contour integral over |z| = r of z^n [z^2+(1-a)z+c][z^{3-a}(z-1)^a - g z^{-l} - A]^{-1} dz
/// by the M-node trapezoid rule, with a 2M comparison for the accuracy flag.
inline std::vector<ContourResult> contour_resolvent(const ResolventParams& p, const std::vector<int>& ns, double r,
                                                    int M) {
    p.validate();
    if (M < 256) throw domain_error("contour_resolvent needs M >= 256");
    if (!(r > 0.0)) throw domain_error("contour radius must be positive");
    for (int n : ns)
        if (n < 3) throw domain_error("contour representation holds for n >= 3");
    const auto coarse = detail::contour_sums(p, ns, r, M);
    const auto fine = detail::contour_sums(p, ns, r, 2 * M);
    std::vector<ContourResult> out;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        ContourResult res;
        res.n = ns[i];
        res.value = coarse[i];
        const double denom = std::max(norm2(fine[i]), std::numeric_limits<double>::min());
        res.relative_change = norm2(cmat(coarse[i] - fine[i])) / denom;
        res.accuracy_warning = res.relative_change > 1e-6;
        out.push_back(std::move(res));
    }
    return out;
}

inline ContourResult contour_resolvent(const cmat& A, double alpha, double gamma, int lambda, int n, double r,
                                       int M) {
    return contour_resolvent(ResolventParams{A, alpha, gamma, lambda}, std::vector<int>{n}, r, M).front();
}

struct ContourCheck {
    double radius = 0.0;
    int M = 0;
    std::vector<double> relative_error;  ///< per n, against the recursion
    double max_relative_error = 0.0;
    bool accuracy_warning = false;
    bool agrees = false;
    std::string failure;  ///< non-empty when a node was singular
};

struct ContourValidation {
    std::vector<int> ns;
    double growth_rate = 0.0;  ///< empirical per-step growth of ||S(n)||
    ContourCheck requested;
    std::optional<ContourCheck> fallback;  ///< evaluated when the requested radius disagrees
    bool validated = false;
    double validated_radius = 0.0;
    std::string discrepancy;
};

/// Compares the contour representation with the recursion for n in [n_lo, n_hi]. When the
/// requested radius disagrees, a radius outside every singularity of the z-transform is
/// tried and the disagreement is reported, not hidden.
inline ContourValidation validate_contour(const ResolventParams& p, double r, int M, int n_lo = 3, int n_hi = 10,
                                          double tol = 1e-8) {
    ContourValidation v;
    for (int n = n_lo; n <= n_hi; ++n) v.ns.push_back(n);
    const std::size_t probe_N = std::max<std::size_t>(512, static_cast<std::size_t>(n_hi) + 3);
    const auto S = resolvent_sequence(p, probe_N);
    std::vector<double> norms(probe_N + 1);
    for (std::size_t n = 0; n <= probe_N; ++n) norms[n] = norm2(S[static_cast<long long>(n)]);
    v.growth_rate = tail_growth_rate(norms);

    auto check = [&](double radius) {
        ContourCheck c;
        c.radius = radius;
        c.M = M;
        try {
            const auto res = contour_resolvent(p, v.ns, radius, M);
            for (std::size_t i = 0; i < res.size(); ++i) {
                const cmat& ref = S[res[i].n];
                const double e = norm2(cmat(res[i].value - ref)) / std::max(1.0, norm2(ref));
                c.relative_error.push_back(e);
                c.max_relative_error = std::max(c.max_relative_error, e);
                c.accuracy_warning = c.accuracy_warning || res[i].accuracy_warning;
            }
            c.agrees = c.max_relative_error <= tol;
        } catch (const quadrature_error& e) {
            c.failure = e.what();
            c.max_relative_error = std::numeric_limits<double>::infinity();
        }
        return c;
    };

    v.requested = check(r);
    if (v.requested.agrees) {
        v.validated = true;
        v.validated_radius = r;
        return v;
    }
    const double r_out = std::max(1.05, 1.25 * v.growth_rate);
    v.fallback = check(r_out);
    v.validated = v.fallback->agrees;
    v.validated_radius = v.validated ? r_out : 0.0;
    v.discrepancy = "radius " + std::to_string(r) + " disagrees with the recursion (max relative error " +
                    std::to_string(v.requested.max_relative_error) + "); radius " + std::to_string(r_out) +
                    (v.fallback->agrees ? " agrees" : " also disagrees") + " (max relative error " +
                    std::to_string(v.fallback->max_relative_error) + ", growth rate " +
                    std::to_string(v.growth_rate) + ")";
    return v;
}

/// (h_a * S_a)(0..N), the kernel of the solution operator, evaluated in extended precision
/// and rounded to double.
struct SolutionKernel {
    OperatorSeq values;  ///< indexed 0..N
    unsigned precision_bits = 0;
    double max_norm = 0.0;
    bool overflow_risk = false;  ///< some entry norm exceeds 1e280
};

inline SolutionKernel solution_kernel(const ResolventParams& p, std::size_t N) {
    p.validate();
    check_horizon(N);
    SolutionKernel out;
    out.precision_bits = solution_kernel_bits(p.alpha, std::max<std::size_t>(N, 2));
    precision_scope scope(out.precision_bits);
    detail::ResolventStepper<mp_real> stepper(p);
    stepper.extend_to(std::max<std::size_t>(N, 2));
    const auto h = h_values<mp_real>(mp_real(p.alpha), N);
    const std::size_t d = stepper.dim(), dd = d * d;
    const auto& sre = stepper.re();
    const auto& sim = stepper.im();
    std::vector<mp_real> pre((N + 1) * dd), pim((N + 1) * dd);
    for (std::size_t n = 0; n <= N; ++n)
        for (std::size_t e = 0; e < dd; ++e) {
            mp_real ar(0), ai(0);
            for (std::size_t j = 0; j <= n; ++j) {
                ar += h[n - j] * sre[j * dd + e];
                ai += h[n - j] * sim[j * dd + e];
            }
            pre[n * dd + e] = ar;
            pim[n * dd + e] = ai;
        }
    out.values = OperatorSeq(p.dim(), 0, N);
    for (std::size_t n = 0; n <= N; ++n) {
        cmat m = detail::split_entry(pre, pim, n, d);
        if (!m.allFinite())
            throw capacity_error("(h_alpha * S_alpha)(" + std::to_string(n) + ") overflows double precision");
        const double nm = norm2(m);
        out.max_norm = std::max(out.max_norm, nm);
        out.values[static_cast<long long>(n)] = std::move(m);
    }
    out.overflow_risk = out.max_norm > 1e280;
    return out;
}

} // namespace fracdelay
