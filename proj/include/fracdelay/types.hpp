#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "fracdelay/errors.hpp"

namespace fracdelay {

using complex = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

/// Process-wide size limits. Plain values; set them before any concurrent use.
struct limits {
    static inline std::size_t max_horizon = 1'000'000;
    static inline std::size_t dense_limit = 4096;
};

inline void check_horizon(std::size_t N) {
    if (N > limits::max_horizon)
        throw capacity_error("horizon " + std::to_string(N) + " exceeds limit " +
                             std::to_string(limits::max_horizon));
}

/// Spectral (operator 2-) norm.
inline double norm2(const cmat& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<cmat> svd(m);
    return svd.singularValues()(0);
}

inline double norm2(const cvec& v) { return v.norm(); }

/// Finite-horizon vector-valued sequence u(0..N), u(n) in C^d.
class Signal {
public:
    Signal() = default;
    Signal(int dim, std::size_t horizon) : dim_(dim), values_(horizon + 1, cvec::Zero(dim)) {
        if (dim < 1) throw shape_error("signal dimension must be >= 1");
    }

    static Signal scalar(const std::vector<complex>& v) {
        if (v.empty()) throw shape_error("empty scalar sequence");
        Signal s(1, v.size() - 1);
        for (std::size_t n = 0; n < v.size(); ++n) s.values_[n](0) = v[n];
        return s;
    }

    static Signal scalar(const std::vector<double>& v) {
        std::vector<complex> c(v.begin(), v.end());
        return scalar(c);
    }

    int dim() const noexcept { return dim_; }
    std::size_t horizon() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
    std::size_t size() const noexcept { return values_.size(); }

    cvec& operator[](std::size_t n) { return values_[n]; }
    const cvec& operator[](std::size_t n) const { return values_[n]; }

    const std::vector<cvec>& values() const noexcept { return values_; }
    std::vector<cvec>& values() noexcept { return values_; }

    /// Leading part u(0..n).
    Signal head(std::size_t n) const {
        if (n > horizon()) throw shape_error("head beyond horizon");
        Signal s(dim_, n);
        std::copy(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n + 1), s.values_.begin());
        return s;
    }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, v.norm());
        return m;
    }

    bool all_finite() const {
        for (const auto& v : values_)
            if (!v.allFinite()) return false;
        return true;
    }

    Signal& operator+=(const Signal& o) {
        require_same(o);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += o.values_[n];
        return *this;
    }
    Signal& operator-=(const Signal& o) {
        require_same(o);
        for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= o.values_[n];
        return *this;
    }
    Signal& operator*=(complex c) {
        for (auto& v : values_) v *= c;
        return *this;
    }
    friend Signal operator+(Signal a, const Signal& b) { return a += b; }
    friend Signal operator-(Signal a, const Signal& b) { return a -= b; }
    friend Signal operator*(complex c, Signal a) { return a *= c; }

private:
    void require_same(const Signal& o) const {
        if (o.dim_ != dim_ || o.values_.size() != values_.size())
            throw shape_error("signal shape mismatch");
    }

    int dim_ = 1;
    std::vector<cvec> values_;
};

/// Sequence of d x d complex matrices indexed start..N with start <= 0.
class OperatorSeq {
public:
    OperatorSeq() = default;
    OperatorSeq(int dim, int start, std::size_t horizon)
        : dim_(dim), start_(start),
          values_(static_cast<std::size_t>(static_cast<long long>(horizon) - start + 1), cmat::Zero(dim, dim)) {
        if (dim < 1) throw shape_error("operator dimension must be >= 1");
        if (start > 0) throw shape_error("operator sequence must start at an index <= 0");
    }

    int dim() const noexcept { return dim_; }
    int start() const noexcept { return start_; }
    std::size_t horizon() const noexcept {
        return static_cast<std::size_t>(static_cast<long long>(values_.size()) - 1 + start_);
    }

    cmat& operator[](long long n) { return values_[static_cast<std::size_t>(n - start_)]; }
    const cmat& operator[](long long n) const { return values_[static_cast<std::size_t>(n - start_)]; }

    /// Entries 0..N as a plain vector.
    std::vector<cmat> nonnegative() const {
        return {values_.begin() + (-start_), values_.end()};
    }

    /// The same sequence re-indexed to start at 0, dropping negative indices.
    OperatorSeq restricted() const {
        OperatorSeq r(dim_, 0, horizon());
        r.values_ = nonnegative();
        return r;
    }

    OperatorSeq head(std::size_t n) const {
        if (n > horizon()) throw shape_error("head beyond horizon");
        OperatorSeq r(dim_, start_, n);
        std::copy(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(r.values_.size()), r.values_.begin());
        return r;
    }

    bool all_finite() const {
        for (const auto& m : values_)
            if (!m.allFinite()) return false;
        return true;
    }

    /// max over n >= 0 of the spectral norm.
    double sup_norm() const {
        double m = 0.0;
        for (long long n = 0; n <= static_cast<long long>(horizon()); ++n) m = std::max(m, norm2((*this)[n]));
        return m;
    }

private:
    int dim_ = 1;
    int start_ = 0;
    std::vector<cmat> values_;
};

} // namespace fracdelay
