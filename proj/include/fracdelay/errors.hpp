#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace fracdelay {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range (order, delay, ...).
class domain_error : public error {
public:
    using error::error;
};

/// Horizons or dimensions of the operands do not fit together.
class shape_error : public error {
public:
    using error::error;
};

/// A requested size or a computed magnitude exceeds what double storage holds.
class capacity_error : public error {
public:
    using error::error;
};

/// The symbol f(t) - A is singular at a grid node.
class spectral_hit : public error {
public:
    spectral_hit(double t, const std::string& what)
        : error(what), t_(t) {}
    double t() const noexcept { return t_; }

private:
    double t_;
};

/// A contour node where z^{3-a}(z-1)^a - g z^{-l} - A cannot be inverted.
class quadrature_error : public error {
public:
    quadrature_error(std::complex<double> z, const std::string& what)
        : error(what), z_(z) {}
    std::complex<double> z() const noexcept { return z_; }

private:
    std::complex<double> z_;
};

/// A truncated series is evaluated where it does not converge.
class convergence_error : public error {
public:
    using error::error;
};

} // namespace fracdelay
