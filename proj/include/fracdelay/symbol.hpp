#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "fracdelay/branch.hpp"
#include "fracdelay/errors.hpp"
#include "fracdelay/kernels.hpp"
#include "fracdelay/resolvent.hpp"
#include "fracdelay/types.hpp"

namespace fracdelay {

/// f(t) = g_a(t) - g e^{-i l t}; at t = 0 the continuous extension -g is returned.
inline complex delay_symbol(double alpha, double gamma, int lambda, double t) {
    const complex shift = std::polar(1.0, -lambda * t);
    if (t == 0.0) return -gamma;
    return g_symbol(alpha, t) - gamma * shift;
}

struct ResolventSymbols {
    double t = 0.0;
    complex g;
    complex f;
    cmat R;   ///< [f(t) - A]^{-1}
    cmat G1;  ///< g R
    cmat G2;  ///< e^{-i l t} R
};

namespace detail {

inline cmat checked_inverse(const cmat& D, double t) {
    const Eigen::Index d = D.rows();
    Eigen::JacobiSVD<cmat> svd(D);
    const auto& sv = svd.singularValues();
    if (!(sv(d - 1) > 1e-14 * std::max(1.0, sv(0))))
        throw spectral_hit(t, "f(t) - A is singular at t = " + std::to_string(t));
    return D.partialPivLu().inverse();
}

} // namespace detail

inline ResolventSymbols resolvent_symbols(const ResolventParams& p, double t) {
    ResolventSymbols s;
    s.t = t;
    s.g = t == 0.0 ? complex(0.0) : g_symbol(p.alpha, t);
    const complex e = std::polar(1.0, -p.lambda * t);
    s.f = s.g - p.gamma * e;
    const int d = p.dim();
    s.R = detail::checked_inverse(s.f * cmat::Identity(d, d) - p.A, t);
    s.G1 = s.g * s.R;
    s.G2 = e * s.R;
    return s;
}

struct SymbolDerivatives {
    cmat G1p;
    cmat G2p;          ///< derived from the symbol definition
    cmat G2p_printed;  ///< variant with -g i G2 as the leading term
};

/// Closed-form t-derivatives with kappa = 3i + a i / (e^{it} - 1):
///   G1' = kappa (G1 - G1^2) - g l i G1 G2
///   G2' = -l i G2 - kappa G1 G2 - g l i G2^2
inline SymbolDerivatives symbol_derivatives(const ResolventParams& p, double t) {
    if (t == 0.0) throw domain_error("symbol derivatives are singular at t = 0");
    const auto s = resolvent_symbols(p, t);
    const complex I(0.0, 1.0);
    const complex kappa = 3.0 * I + p.alpha * I / (std::polar(1.0, t) - 1.0);
    const double gl = p.gamma * p.lambda;
    SymbolDerivatives out;
    const cmat G12 = s.G1 * s.G2;
    out.G1p = kappa * (s.G1 - s.G1 * s.G1) - (gl * I) * G12;
    const cmat tail = -kappa * G12 - (gl * I) * (s.G2 * s.G2);
    out.G2p = -(static_cast<double>(p.lambda) * I) * s.G2 + tail;
    out.G2p_printed = -(p.gamma * I) * s.G2 + tail;
    return out;
}

struct FiniteDifference {
    cmat G1p;
    cmat G2p;
};

/// Central differences of G1 and G2 with step h.
inline FiniteDifference central_difference(const ResolventParams& p, double t, double h) {
    const auto a = resolvent_symbols(p, t + h);
    const auto b = resolvent_symbols(p, t - h);
    return {(a.G1 - b.G1) / (2.0 * h), (a.G2 - b.G2) / (2.0 * h)};
}

/// Central difference with Richardson extrapolation from steps h and h/2; the step is
/// scaled with the distance to the branch point so that nodes near t = 0 stay resolved.
inline FiniteDifference richardson_difference(const ResolventParams& p, double t, double rel_step = 1e-3) {
    const double h = rel_step * std::min(1.0, std::abs(t));
    const auto c = central_difference(p, t, h);
    const auto f = central_difference(p, t, h / 2.0);
    return {(4.0 * f.G1p - c.G1p) / 3.0, (4.0 * f.G2p - c.G2p) / 3.0};
}

/// Sorted nodes in [-pi, pi] avoiding neighbourhoods of t = 0 and t = +-pi.
struct CircleGrid {
    int M = 4096;
    double exclusion_zero = 1e-4;
    double exclusion_pi = 1e-4;
    std::vector<double> nodes;

    /// M uniform midpoints plus geometric clusters of `per_decade` points per decade
    /// approaching the excluded points, where suprema of the symbols tend to sit.
    static CircleGrid make(int M = 4096, double excl_zero = 1e-4, double excl_pi = 1e-4, int per_decade = 8) {
        if (M < 16) throw domain_error("circle grid needs M >= 16");
        if (!(excl_zero >= 0.0) || !(excl_pi >= 0.0)) throw domain_error("exclusion radii must be >= 0");
        CircleGrid g;
        g.M = M;
        g.exclusion_zero = excl_zero;
        g.exclusion_pi = excl_pi;
        const double pi = std::numbers::pi;
        const double hstep = 2.0 * pi / M;
        auto admissible = [&](double t) {
            return std::abs(t) >= excl_zero && pi - std::abs(t) >= excl_pi && t != 0.0;
        };
        for (int k = 0; k < M; ++k) {
            const double t = -pi + (k + 0.5) * hstep;
            if (admissible(t)) g.nodes.push_back(t);
        }
        if (per_decade > 0) {
            auto ladder = [&](double start, double stop, auto emit) {
                if (!(start > 0.0) || start >= stop) return;
                const double q = std::pow(10.0, 1.0 / per_decade);
                for (double x = start; x < stop; x *= q) emit(x);
            };
            ladder(excl_zero, hstep, [&](double x) {
                g.nodes.push_back(x);
                g.nodes.push_back(-x);
            });
            ladder(excl_pi, hstep, [&](double x) {
                g.nodes.push_back(pi - x);
                g.nodes.push_back(-(pi - x));
            });
        }
        std::sort(g.nodes.begin(), g.nodes.end());
        g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
        return g;
    }

    /// Same construction with twice the uniform density.
    CircleGrid refined() const { return make(2 * M, exclusion_zero, exclusion_pi); }
};

struct SymbolRecord {
    double t = 0.0;
    complex f;
    double G1 = 0.0, G2 = 0.0;  ///< spectral norms
    double B1 = 0.0, B2 = 0.0;  ///< ||(e^{it}-1)(e^{it}+1) G_j'(t)|| from finite differences
    double G1p_residual = 0.0;          ///< closed form vs finite difference, relative
    double G2p_residual = 0.0;          ///< derived closed form
    double G2p_printed_residual = 0.0;  ///< printed closed form
};

struct ScanSummary {
    double sup_G1 = 0.0, sup_G2 = 0.0, sup_B1 = 0.0, sup_B2 = 0.0;
    double arg_G1 = 0.0, arg_G2 = 0.0, arg_B1 = 0.0, arg_B2 = 0.0;
    double min_abs_f = std::numeric_limits<double>::infinity();
    double arg_min_f = 0.0;
    std::size_t spectral_hits = 0;
    double max_G1p_residual = 0.0, max_G2p_residual = 0.0, max_G2p_printed_residual = 0.0;
};

struct SymbolScan {
    std::vector<SymbolRecord> records;
    ScanSummary summary;
    ScanSummary refined;    ///< same quantities at 2M uniform nodes
    double refinement_change = 0.0;  ///< max relative change of the four suprema
    bool stable = false;             ///< refinement_change <= 1e-2
};

namespace detail {

inline double rel(const cmat& a, const cmat& b) { return norm2(cmat(a - b)) / std::max(1e-300, norm2(b)); }

inline ScanSummary scan_nodes(const ResolventParams& p, const std::vector<double>& nodes,
                              std::vector<SymbolRecord>* out) {
    ScanSummary s;
    for (double t : nodes) {
        SymbolRecord r;
        r.t = t;
        try {
            const auto sym = resolvent_symbols(p, t);
            const auto fd = richardson_difference(p, t);
            const auto cf = symbol_derivatives(p, t);
            const complex w = (std::polar(1.0, t) - 1.0) * (std::polar(1.0, t) + 1.0);
            r.f = sym.f;
            r.G1 = norm2(sym.G1);
            r.G2 = norm2(sym.G2);
            r.B1 = std::abs(w) * norm2(fd.G1p);
            r.B2 = std::abs(w) * norm2(fd.G2p);
            r.G1p_residual = rel(cf.G1p, fd.G1p);
            r.G2p_residual = rel(cf.G2p, fd.G2p);
            r.G2p_printed_residual = rel(cf.G2p_printed, fd.G2p);
        } catch (const spectral_hit&) {
            ++s.spectral_hits;
            continue;
        }
        auto upd = [t](double v, double& sup, double& arg) {
            if (v > sup) {
                sup = v;
                arg = t;
            }
        };
        upd(r.G1, s.sup_G1, s.arg_G1);
        upd(r.G2, s.sup_G2, s.arg_G2);
        upd(r.B1, s.sup_B1, s.arg_B1);
        upd(r.B2, s.sup_B2, s.arg_B2);
        if (std::abs(r.f) < s.min_abs_f) {
            s.min_abs_f = std::abs(r.f);
            s.arg_min_f = t;
        }
        s.max_G1p_residual = std::max(s.max_G1p_residual, r.G1p_residual);
        s.max_G2p_residual = std::max(s.max_G2p_residual, r.G2p_residual);
        s.max_G2p_printed_residual = std::max(s.max_G2p_printed_residual, r.G2p_printed_residual);
        if (out) out->push_back(r);
    }
    return s;
}

inline double rel_change(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

} // namespace detail

/// Suprema of ||G_j|| and of the Blunck quantities ||(e^{it}-1)(e^{it}+1) G_j'|| over the grid,
/// with finite differences as the authoritative derivative and closed forms logged beside.
inline SymbolScan blunck_scan(const ResolventParams& p, const CircleGrid& grid) {
    p.validate();
    SymbolScan scan;
    scan.summary = detail::scan_nodes(p, grid.nodes, &scan.records);
    scan.refined = detail::scan_nodes(p, grid.refined().nodes, nullptr);
    const auto& a = scan.summary;
    const auto& b = scan.refined;
    scan.refinement_change = std::max({detail::rel_change(a.sup_G1, b.sup_G1), detail::rel_change(a.sup_G2, b.sup_G2),
                                       detail::rel_change(a.sup_B1, b.sup_B1), detail::rel_change(a.sup_B2, b.sup_B2)});
    scan.stable = scan.refinement_change <= 1e-2;
    return scan;
}

struct OmegaF {
    double omega = 0.0;
    double argmin = 0.0;
};

/// min of |f| over the closure of the circle: grid nodes, t = 0 (value |g|) and t = +-pi,
/// refined by golden-section search around the best grid node.
inline OmegaF omega_f(double alpha, double gamma, int lambda, const CircleGrid& grid) {
    require_fractional_order(alpha);
    const double pi = std::numbers::pi;
    std::vector<double> t = grid.nodes;
    t.push_back(0.0);
    t.push_back(-pi);
    t.push_back(pi);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    auto F = [&](double x) { return std::abs(delay_symbol(alpha, gamma, lambda, x)); };
    std::size_t best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = F(t[i]);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    OmegaF out{best_v, t[best]};
    if (t[best] == 0.0) return out;
    double lo = best > 0 ? t[best - 1] : t[best];
    double hi = best + 1 < t.size() ? t[best + 1] : t[best];
    // Keep the bracket on one side of the branch point.
    if (t[best] > 0.0) lo = std::max(lo, std::nextafter(0.0, 1.0));
    if (t[best] < 0.0) hi = std::min(hi, -std::nextafter(0.0, 1.0));
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = F(x1), f2 = F(x2);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = F(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = F(x2);
        }
    }
    const double tm = (lo + hi) / 2.0;
    const double vm = F(tm);
    if (vm < out.omega) out = {vm, tm};
    return out;
}

struct ConditionC {
    bool holds = false;
    double norm_A = 0.0;
    double omega = 0.0;
    double argmin = 0.0;
    double margin_low = 0.0;   ///< omega - ||A||
    double margin_high = 0.0;  ///< 1 - omega
    bool neumann_checked = false;
    bool neumann_holds = false;
    double neumann_worst_ratio = 0.0;  ///< max_k ||(f - A)^{-1}|| (omega - ||A||)
};

/// ||A|| < omega_f < 1 with the spectral norm, plus the Neumann bound
/// ||(f(t) - A)^{-1}|| <= 1/(omega_f - ||A||) at 32 nodes when the condition holds.
inline ConditionC condition_C_check(const ResolventParams& p, const CircleGrid& grid) {
    p.validate();
    ConditionC c;
    c.norm_A = norm2(p.A);
    const auto w = omega_f(p.alpha, p.gamma, p.lambda, grid);
    c.omega = w.omega;
    c.argmin = w.argmin;
    c.margin_low = c.omega - c.norm_A;
    c.margin_high = 1.0 - c.omega;
    c.holds = c.norm_A < c.omega && c.omega < 1.0;
    if (c.holds) {
        c.neumann_checked = true;
        c.neumann_holds = true;
        const double pi = std::numbers::pi;
        for (int k = 0; k < 32; ++k) {
            const double t = -pi + (k + 0.5) * 2.0 * pi / 32.0;
            const auto s = resolvent_symbols(p, t);
            const double ratio = norm2(s.R) * c.margin_low;
            c.neumann_worst_ratio = std::max(c.neumann_worst_ratio, ratio);
            if (ratio > 1.0 + 1e-12) c.neumann_holds = false;
        }
    }
    return c;
}

struct HilbertMR {
    double sup_G1 = 0.0;  ///< sup ||g (f - A)^{-1}||
    double sup_G2 = 0.0;  ///< sup ||e^{-i l t} (f - A)^{-1}||
    std::vector<double> ratios;  ///< per refinement round, max over the two suprema
    std::vector<double> exclusions;
    std::size_t spectral_hits = 0;
    bool bounded = false;
};

/// Norm-boundedness of the two symbol sets, read from how their suprema react when the
/// excluded neighbourhoods of t = 0 and t = +-pi shrink tenfold per round with ten times
/// denser local sampling.
inline HilbertMR hilbert_mr_check(const ResolventParams& p, const CircleGrid& grid, int rounds = 3) {
    p.validate();
    HilbertMR out;
    const double pi = std::numbers::pi;
    auto sup_over = [&](const std::vector<double>& nodes, double& s1, double& s2) {
        for (double t : nodes) {
            try {
                const auto s = resolvent_symbols(p, t);
                s1 = std::max(s1, norm2(s.G1));
                s2 = std::max(s2, norm2(s.G2));
            } catch (const spectral_hit&) {
                ++out.spectral_hits;
            }
        }
    };
    double s1 = 0.0, s2 = 0.0;
    sup_over(grid.nodes, s1, s2);
    out.exclusions.push_back(std::min(grid.exclusion_zero, grid.exclusion_pi));
    double e0 = grid.exclusion_zero > 0.0 ? grid.exclusion_zero : 1e-4;
    double epi = grid.exclusion_pi > 0.0 ? grid.exclusion_pi : 1e-4;
    int per_decade = 8;
    for (int r = 1; r <= rounds; ++r) {
        const double prev1 = s1, prev2 = s2;
        e0 /= 10.0;
        epi /= 10.0;
        per_decade *= 10;
        std::vector<double> local;
        const double q = std::pow(10.0, 1.0 / per_decade);
        for (double x = e0; x < 0.1; x *= q) {
            local.push_back(x);
            local.push_back(-x);
        }
        for (double x = epi; x < 0.1; x *= q) {
            local.push_back(pi - x);
            local.push_back(-(pi - x));
        }
        sup_over(local, s1, s2);
        auto ratio = [](double now, double before) { return before == 0.0 ? (now == 0.0 ? 1.0 : INFINITY) : now / before; };
        out.ratios.push_back(std::max(ratio(s1, prev1), ratio(s2, prev2)));
        out.exclusions.push_back(std::min(e0, epi));
    }
    out.sup_G1 = s1;
    out.sup_G2 = s2;
    out.bounded = std::all_of(out.ratios.begin(), out.ratios.end(), [](double x) { return x <= 1.05; });
    return out;
}

enum class SymbolKind { E, F };

/// sup_t ||e^{3it} A R(t)|| (E) or sup_t ||e^{(3-l)it} R(t)|| (F) over the grid: the symbols
/// of the two solution operators on the unit circle.
inline double symbol_supremum(const ResolventParams& p, const CircleGrid& grid, SymbolKind kind) {
    double s = 0.0;
    for (double t : grid.nodes) {
        const auto sym = resolvent_symbols(p, t);
        s = std::max(s, kind == SymbolKind::E ? norm2(cmat(p.A * sym.R)) : norm2(sym.R));
    }
    return s;
}

// Closed-form z-transforms, sum_n x(n) z^{-n}, continued to |z| > 1.

/// z^3 / (z^3 + (1-a) z^2 + c z).
inline complex h_transform(double alpha, complex z) {
    const double c = (alpha - 1.0) * (alpha - 2.0) / 2.0;
    return z * z / (z * z + (1.0 - alpha) * z + c);
}

/// The variant with denominator z^2 + (1-a) z + c, which differs from h_transform by a factor z.
inline complex h_transform_printed(double alpha, complex z) {
    const double c = (alpha - 1.0) * (alpha - 2.0) / 2.0;
    return z * z * z / (z * z + (1.0 - alpha) * z + c);
}

/// (z/(z-1))^b, principal branch.
inline complex kernel_transform(double beta, complex z) { return std::pow(1.0 - 1.0 / z, -beta); }

/// (z^3 + (1-a) z^2 + c z) [z^{3-a}(z-1)^a - g z^{-l} - A]^{-1}.
inline cmat resolvent_transform(const ResolventParams& p, complex z) {
    const double c = (p.alpha - 1.0) * (p.alpha - 2.0) / 2.0;
    return (z * z * z + (1.0 - p.alpha) * z * z + c * z) * symbol_resolvent_z(p, z);
}

/// z^3 [z^{3-a}(z-1)^a - g z^{-l} - A]^{-1}, the transform of h_a * S_a.
inline cmat solution_kernel_transform(const ResolventParams& p, complex z) {
    return (z * z * z) * symbol_resolvent_z(p, z);
}

struct TransformCheck {
    double max_relative = 0.0;
    double tail_bound = 0.0;   ///< estimate of the neglected sum over n > N, relative
    double growth_rate = 0.0;
    double radius = 0.0;
    int M = 0;
};

/// max over z = r e^{2 pi i k/M} of ||sum_{n<=N} x(n) z^{-n} - target(z)|| / ||target(z)||.
inline TransformCheck transform_residual(const std::vector<cmat>& seq, const std::function<cmat(complex)>& target,
                                         double r, int M) {
    if (seq.size() < 8) throw shape_error("transform_residual needs at least 8 terms");
    if (M < 64) throw domain_error("transform_residual needs M >= 64");
    TransformCheck out;
    out.radius = r;
    out.M = M;
    std::vector<double> norms(seq.size());
    for (std::size_t n = 0; n < seq.size(); ++n) norms[n] = norm2(seq[n]);
    out.growth_rate = tail_growth_rate(norms);
    if (!(r > out.growth_rate))
        throw convergence_error("radius " + std::to_string(r) + " does not exceed the growth rate " +
                                std::to_string(out.growth_rate) + " of the sequence");
    const std::size_t N = seq.size() - 1;
    const double q = out.growth_rate / r;
    const double tail_abs = norms[N] * std::pow(r, -static_cast<double>(N)) * q / (1.0 - q);
    double min_target = std::numeric_limits<double>::infinity();
    for (int k = 0; k < M; ++k) {
        const complex z = std::polar(r, 2.0 * std::numbers::pi * k / M);
        const complex w = 1.0 / z;
        cmat acc = seq[N];
        for (std::size_t n = N; n-- > 0;) acc = (acc * w + seq[n]).eval();
        const cmat tv = target(z);
        const double tn = norm2(tv);
        min_target = std::min(min_target, tn);
        out.max_relative = std::max(out.max_relative, norm2(cmat(acc - tv)) / std::max(tn, 1e-300));
    }
    out.tail_bound = tail_abs / std::max(min_target, 1e-300);
    return out;
}

inline TransformCheck transform_residual(const std::vector<double>& seq, const std::function<complex(complex)>& target,
                                         double r, int M) {
    std::vector<cmat> s(seq.size(), cmat(1, 1));
    for (std::size_t n = 0; n < seq.size(); ++n) s[n](0, 0) = seq[n];
    return transform_residual(s, [&](complex z) { return cmat::Constant(1, 1, target(z)); }, r, M);
}

} // namespace fracdelay
