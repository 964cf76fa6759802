#include <catch_amalgamated.hpp>

#include <array>

#include "support.hpp"

using namespace fracdelay;
using Catch::Approx;
using testsupport::scalar;

TEST_CASE("resolvent initial block and negative indices", "[resolvent]") {
    std::mt19937_64 rng(1);
    const cmat A = testsupport::random_matrix(3, rng);
    const auto S = resolvent_sequence(A, 2.5, 0.3, 2, 20);
    const cmat I = cmat::Identity(3, 3);
    CHECK(S[-1] == cmat::Zero(3, 3));
    CHECK(S[-2] == cmat::Zero(3, 3));
    CHECK(S[0] == I);
    CHECK(S[1] == I);
    CHECK(S[2] == I);
    CHECK(S.seq().start() == -2);
}

TEST_CASE("one hand-evaluated step of the scalar recursion", "[resolvent]") {
    // S(3) = 2 - 1 + a k(0) + g * 0 + k(3) - 1.5 k(2) + 0.375 k(1) with k = k^{0.5}:
    // k(1) = 0.5, k(2) = 0.375, k(3) = 0.3125, so S(3) = 1 + a + 0.3125 - 0.5625 + 0.1875 = 0.9375 + a.
    for (double a : {0.0, 0.05, -0.7}) {
        for (double g : {0.0, 0.4, -0.5}) {
            const auto S = resolvent_sequence(scalar(a), 2.5, g, 1, 3);
            CHECK(S[3](0, 0).real() == Approx(0.9375 + a).epsilon(1e-15));
        }
    }
    // S(4) = 2 S(3) - S(2) + a (k(1) S(0) + k(0) S(1)) + g k(0) S(0) + k(4) - 1.5 k(3) + 0.375 k(2).
    const double a = 0.2, g = -0.3, k4 = 0.2734375;
    const double s3 = 0.9375 + a;
    const double s4 = 2.0 * s3 - 1.0 + a * 1.5 + g * 1.0 + k4 - 1.5 * 0.3125 + 0.375 * 0.375;
    const auto S = resolvent_sequence(scalar(a), 2.5, g, 1, 4);
    CHECK(S[4](0, 0).real() == Approx(s4).epsilon(1e-15));
}

TEST_CASE("scalar recursion matches the long double brute force", "[resolvent]") {
    struct Case {
        double a, alpha, gamma;
        int lambda;
    };
    for (const auto& c : {Case{0.05, 2.5, -0.5, 1}, Case{-0.3, 2.1, 0.5, 3}, Case{0.0, 2.9, 0.0, 1},
                          Case{0.7, 2.3, -0.2, 2}}) {
        const std::size_t N = 150;
        const auto S = resolvent_sequence(scalar(c.a), c.alpha, c.gamma, c.lambda, N);
        const auto ref = testsupport::scalar_resolvent_oracle(c.a, c.alpha, c.gamma, c.lambda, N);
        double scale = 1.0;
        for (std::size_t n = 0; n <= N; ++n) {
            scale = std::max(scale, std::abs(static_cast<double>(ref[n])));
            CHECK(std::abs(S[static_cast<long long>(n)](0, 0) - static_cast<double>(ref[n])) <= 1e-11 * scale);
        }
    }
}

TEST_CASE("resolvent identity holds on randomized matrices", "[resolvent]") {
    std::mt19937_64 rng(42);
    for (int draw = 0; draw < 12; ++draw) {
        const int d = 1 + draw % 4;
        const double alpha = std::array{2.1, 2.5, 2.9}[draw % 3];
        const double gamma = std::array{0.0, 0.5, -0.5}[draw % 3 == 0 ? 0 : (draw / 3) % 3];
        const int lambda = draw % 2 ? 1 : 3;
        const auto S = resolvent_sequence(testsupport::random_matrix(d, rng), alpha, gamma, lambda, 200);
        CHECK(resolvent_residual(S) <= 1e-9);
        CHECK(resolvent_residual(S, 0, 2) <= 1e-10);
        CHECK(recursion_residual(S) <= 1e-10);
    }
}

TEST_CASE("pure kernel case", "[resolvent]") {
    const auto S = resolvent_sequence(scalar(0.0), 2.5, 0.0, 1, 512);
    CHECK(resolvent_residual(S) <= 1e-10);
    const auto probe = boundedness_probe(S);
    const auto ref = testsupport::scalar_resolvent_oracle(0.0L, 2.5L, 0.0L, 1, 512);
    long double sup = 0.0L;
    std::size_t arg = 0;
    for (std::size_t n = 0; n < ref.size(); ++n)
        if (std::abs(ref[n]) > sup) {
            sup = std::abs(ref[n]);
            arg = n;
        }
    CHECK(probe.sup_norm == Approx(static_cast<double>(sup)).epsilon(1e-11));
    CHECK(probe.argmax == arg);
    CHECK(probe.sup_norm >= 1.0);
}

TEST_CASE("delay enters only through gamma", "[resolvent]") {
    std::mt19937_64 rng(3);
    const cmat A = testsupport::random_matrix(2, rng);
    const auto S1 = resolvent_sequence(A, 2.4, 0.0, 1, 200);
    const auto S5 = resolvent_sequence(A, 2.4, 0.0, 5, 200);
    for (long long n = 0; n <= 200; ++n) CHECK(S1[n] == S5[n]);
}

TEST_CASE("matrix path with A = aI agrees with the scalar path", "[resolvent]") {
    const complex a(0.3, -0.2);
    const auto s = resolvent_sequence(scalar(a), 2.7, -0.4, 2, 300);
    const auto M = resolvent_sequence(a * cmat::Identity(3, 3), 2.7, -0.4, 2, 300);
    for (long long n = 0; n <= 300; ++n) {
        const cmat diff = M[n] - s[n](0, 0) * cmat::Identity(3, 3);
        CHECK(norm2(diff) <= 1e-12 * std::max(1.0, std::abs(s[n](0, 0))));
    }
}

TEST_CASE("delayed sequence", "[resolvent]") {
    const auto S = resolvent_sequence(scalar(0.1), 2.5, 0.2, 3, 20);
    const auto D = delayed(S);
    CHECK(D.start() == 0);
    for (long long n = 0; n < 3; ++n) CHECK(D[n](0, 0) == 0.0);
    CHECK(D[3](0, 0) == 1.0);
    CHECK(D[5](0, 0) == 1.0);
    for (long long n = 3; n <= 20; ++n) CHECK(D[n] == S[n - 3]);
}

TEST_CASE("resolvent parameter validation", "[resolvent]") {
    CHECK_THROWS_AS(resolvent_sequence(scalar(0.1), 2.0, 0.0, 1, 10), domain_error);
    CHECK_THROWS_AS(resolvent_sequence(scalar(0.1), 2.5, 0.0, 0, 10), domain_error);
    CHECK_THROWS_AS(resolvent_sequence(cmat::Zero(2, 3), 2.5, 0.0, 1, 10), shape_error);
    CHECK_THROWS_AS(resolvent_sequence(scalar(0.1), 2.5, NAN, 1, 10), domain_error);
    CHECK_THROWS_AS(resolvent_sequence(scalar(50.0), 2.5, 0.0, 1, 1000), capacity_error);
    CHECK_THROWS_AS(boundedness_probe(resolvent_sequence(scalar(0.1), 2.5, 0.0, 1, 20)), shape_error);
}

TEST_CASE("boundedness probe flags geometric growth", "[resolvent]") {
    const auto grow = boundedness_probe(resolvent_sequence(scalar(0.5), 2.5, 0.0, 1, 256));
    CHECK_FALSE(grow.bounded_looking);
    CHECK(grow.tail_growth > 2.0);
    CHECK(grow.argmax == 256);
}

TEST_CASE("tail growth rate of a geometric profile", "[resolvent]") {
    std::vector<double> v(401);
    for (std::size_t n = 0; n <= 400; ++n) v[n] = std::pow(1.3, static_cast<double>(n));
    CHECK(tail_growth_rate(v) == Approx(1.3).epsilon(1e-12));
}

TEST_CASE("contour representation at the kernel-only instance", "[resolvent][contour]") {
    const ResolventParams p{scalar(0.0), 2.5, 0.0, 1};
    const auto S = resolvent_sequence(p, 20);
    // Outside the unit disk the integrand is analytic apart from the branch point z = 1.
    const auto r = contour_resolvent(p, {3, 4, 5, 10}, 1.2, 1024);
    for (const auto& x : r) {
        CHECK(std::abs(x.value(0, 0) - S[x.n](0, 0)) <= 1e-10);
        CHECK_FALSE(x.accuracy_warning);
    }
}

TEST_CASE("contour trapezoid error shrinks under node doubling", "[resolvent][contour]") {
    const ResolventParams p{scalar(0.05), 2.5, -0.5, 1};
    const auto S = resolvent_sequence(p, 20);
    double prev = INFINITY;
    for (int M : {256, 512, 1024}) {
        const auto r = contour_resolvent(p, {5}, 1.5, M).front();
        const double err = std::abs(r.value(0, 0) - S[5](0, 0));
        CHECK((err <= prev / 2.0 || err <= 1e-8));
        prev = err;
    }
}

TEST_CASE("contour validation reports the disagreement inside the unit disk", "[resolvent][contour]") {
    const ResolventParams p{scalar(0.05), 2.5, -0.5, 1};
    const auto v = validate_contour(p, 0.95, 4096);
    CHECK_FALSE(v.requested.agrees);
    REQUIRE(v.fallback.has_value());
    CHECK(v.fallback->agrees);
    CHECK(v.validated);
    CHECK(v.validated_radius > v.growth_rate);
    CHECK_FALSE(v.discrepancy.empty());
    const auto again = validate_contour(p, 0.95, 4096);
    CHECK(again.discrepancy == v.discrepancy);
    CHECK(again.fallback->max_relative_error == v.fallback->max_relative_error);
}

TEST_CASE("contour argument checks", "[resolvent][contour]") {
    const ResolventParams p{scalar(0.0), 2.5, 0.0, 1};
    CHECK_THROWS_AS(contour_resolvent(p, {3}, 1.2, 128), domain_error);
    CHECK_THROWS_AS(contour_resolvent(p, {2}, 1.2, 512), domain_error);
    // z = 1 is a node on the unit circle and the symbol vanishes there.
    CHECK_THROWS_AS(contour_resolvent(p, {3}, 1.0, 512), quadrature_error);
}

TEST_CASE("solution kernel in extended precision", "[resolvent][extended]") {
    std::mt19937_64 rng(9);
    const ResolventParams p{testsupport::random_matrix(2, rng), 2.5, -0.3, 2};
    const std::size_t N = 40;
    const auto P = solution_kernel(p, N);
    CHECK(P.precision_bits == solution_kernel_bits(2.5, N));
    CHECK(P.values[0] == cmat::Identity(2, 2));
    // Short horizons lose few digits, so plain double convolution is an adequate oracle here.
    const auto S = resolvent_sequence(p, N);
    const auto ref = convolve(h_sequence(2.5, N).values, S.seq());
    for (long long n = 0; n <= static_cast<long long>(N); ++n)
        CHECK(norm2(cmat(P.values[n] - ref[n])) <= 1e-9 * std::max(1.0, norm2(ref[n])));
}

TEST_CASE("double convolution of h and S loses digits at long horizons", "[resolvent][extended]") {
    // A = 0, g = 0 makes h * S equal to k^alpha, a closed form.
    const ResolventParams p{scalar(0.0), 2.5, 0.0, 1};
    const std::size_t N = 400;
    const auto P = solution_kernel(p, N);
    const auto k = kernel_sequence(2.5, N);
    const auto naive = convolve(h_sequence(2.5, N).values, resolvent_sequence(p, N).seq());
    double err_mp = 0.0, err_naive = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
        const auto m = static_cast<long long>(n);
        err_mp = std::max(err_mp, std::abs(P.values[m](0, 0) - k[n]) / k[n]);
        err_naive = std::max(err_naive, std::abs(naive[m](0, 0) - k[n]) / k[n]);
    }
    CHECK(err_mp <= 1e-13);
    CHECK(err_naive > 1e-8);
}
