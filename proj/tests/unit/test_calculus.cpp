#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace fracdelay;
using Catch::Approx;

namespace {

/// Grunwald-Letnikov form: Delta^a u(n) = sum_{j<=n+3} (-1)^j binom(a, j) u(n+3-j).
Signal gl_difference(const Signal& u, double alpha) {
    Signal out(u.dim(), u.horizon() - 3);
    for (std::size_t n = 0; n + 3 <= u.horizon(); ++n)
        for (std::size_t j = 0; j <= n + 3; ++j)
            out[n] += static_cast<double>(testsupport::gl_weight(alpha, j)) * u[n + 3 - j];
    return out;
}

} // namespace

TEST_CASE("forward differences against binomial sums", "[calculus]") {
    std::mt19937_64 rng(11);
    const auto u = testsupport::random_signal(2, 30, rng);
    for (int m = 1; m <= 4; ++m) {
        const auto d = forward_difference(u, m);
        REQUIRE(d.horizon() == 30u - m);
        for (std::size_t n = 0; n <= d.horizon(); ++n) {
            cvec ref = cvec::Zero(2);
            double binom = 1.0;
            for (int i = 0; i <= m; ++i) {
                ref += ((m - i) % 2 ? -binom : binom) * u[n + i];
                binom = binom * (m - i) / (i + 1);
            }
            CHECK((d[n] - ref).norm() <= 1e-12 * (1.0 + ref.norm()));
        }
    }
    CHECK_THROWS_AS(forward_difference(u, 0), domain_error);
    CHECK_THROWS_AS(forward_difference(u.head(2), 3), shape_error);
}

TEST_CASE("fractional difference equals the Grunwald-Letnikov sum", "[calculus]") {
    std::mt19937_64 rng(5);
    for (double a : {2.1, 2.5, 2.9}) {
        const auto u = testsupport::random_signal(3, 80, rng);
        const auto d = fractional_difference(u, a);
        const auto ref = gl_difference(u, a);
        REQUIRE(d.horizon() == 77u);
        for (std::size_t n = 0; n <= d.horizon(); ++n) CHECK((d[n] - ref[n]).norm() <= 1e-10 * (1.0 + ref[n].norm()));
    }
}

TEST_CASE("fractional difference annihilates k^(alpha-2)", "[calculus]") {
    for (double a : {2.1, 2.3, 2.5, 2.7, 2.9}) {
        const auto k = kernel_sequence(a - 2.0, 300);
        const auto d = fractional_difference(Signal::scalar(k.values), a);
        for (const auto& v : d.values()) CHECK(v.norm() <= 1e-10);
    }
}

TEST_CASE("fractional sum of order one is the running sum", "[calculus]") {
    std::mt19937_64 rng(2);
    const auto u = testsupport::random_signal(1, 40, rng);
    const auto s = fractional_sum(u, 1.0);
    cvec acc = cvec::Zero(1);
    for (std::size_t n = 0; n <= 40; ++n) {
        acc += u[n];
        CHECK((s[n] - acc).norm() <= 1e-13 * (1.0 + acc.norm()));
    }
    CHECK_THROWS_AS(fractional_sum(u, 1.5), domain_error);
    CHECK_THROWS_AS(fractional_sum(u, 0.0), domain_error);
}

TEST_CASE("convolution and difference commute up to boundary terms", "[calculus]") {
    std::mt19937_64 rng(8);
    for (double a : {2.1, 2.5, 2.9}) {
        const auto P = testsupport::random_signal(2, 60, rng);
        const auto b = kernel_sequence(0.4, 60);
        CHECK(conv_diff_identity_residual(b.values, P, a) <= 1e-10 * (1.0 + P.sup_norm()));
    }
    CHECK_THROWS_AS(conv_diff_identity_residual(kernel_sequence(0.4, 5).values, Signal(1, 5), 2.5), shape_error);
}

TEST_CASE("convolution shape checks", "[calculus]") {
    const std::vector<double> a(5, 1.0);
    CHECK_THROWS_AS(convolve(a, Signal(1, 7)), shape_error);
    CHECK_THROWS_AS(fractional_difference(Signal(1, 2), 2.5), shape_error);
    CHECK_THROWS_AS(fractional_difference(Signal(1, 10), 3.5), domain_error);
}

TEST_CASE("signal and operator containers", "[types]") {
    Signal s(2, 4);
    CHECK(s.size() == 5);
    CHECK(s.sup_norm() == 0.0);
    CHECK_THROWS_AS(s += Signal(3, 4), shape_error);
    CHECK_THROWS_AS(s.head(5), shape_error);
    OperatorSeq S(2, -3, 10);
    CHECK(S.horizon() == 10);
    CHECK(S.nonnegative().size() == 11);
    S[-3] = cmat::Identity(2, 2);
    CHECK(S.sup_norm() == 0.0);
    CHECK_THROWS_AS(OperatorSeq(2, 1, 5), shape_error);
    limits::max_horizon = 100;
    CHECK_THROWS_AS(check_horizon(101), capacity_error);
    limits::max_horizon = 1'000'000;
}
