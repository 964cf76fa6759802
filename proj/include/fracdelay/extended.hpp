#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <cstddef>

#include "fracdelay/kernels.hpp"

namespace fracdelay {

/// Variable-precision binary float; expression templates keep acc += a*b fused.
using mp_real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                              boost::multiprecision::et_on>;

/// Sets the default precision of new mp_real values for the lifetime of the scope.
class precision_scope {
public:
    explicit precision_scope(unsigned bits) : saved_(mp_real::default_precision()) {
        mp_real::default_precision(digits10_for(bits));
    }
    ~precision_scope() { mp_real::default_precision(saved_); }
    precision_scope(const precision_scope&) = delete;
    precision_scope& operator=(const precision_scope&) = delete;

    static unsigned digits10_for(unsigned bits) {
        return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
    }

private:
    unsigned saved_;
};

/// Working precision for h_a * S_a on 0..N. The convolution sum has terms of size
/// rho^n (rho the dominant root of h_a) that cancel down to the size of the result,
/// so n log2(rho) bits are lost on top of the 53 wanted in the rounded result.
inline unsigned solution_kernel_bits(double alpha, std::size_t N) {
    const double lost = static_cast<double>(N + 3) * std::log2(h_growth_rate(alpha));
    return 96u + static_cast<unsigned>(std::ceil(std::max(0.0, lost)));
}

} // namespace fracdelay
