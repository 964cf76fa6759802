#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace fracdelay;

namespace {
const char* base = "A = 0.5 0.1i ; -0.2 0.3+0.1i\nalpha = 2.5\ngamma = -0.5\nlambda = 1\nN = 20\n";
}

TEST_CASE("config parsing", "[config]") {
    const auto c = parse_config(std::string(base) + "forcing = random(7)  # seeded\nhorizons = 8 16\nmethod = conv\n");
    CHECK(c.A.rows() == 2);
    CHECK(c.A(0, 1) == complex(0.0, 0.1));
    CHECK(c.A(1, 0) == complex(-0.2, 0.0));
    CHECK(c.A(1, 1) == complex(0.3, 0.1));
    CHECK(c.forcing.kind == ForcingSpec::Kind::random);
    CHECK(c.forcing.seed == 7);
    CHECK(c.horizons == std::vector<std::size_t>{8, 16});
    CHECK(c.method == MethodChoice::conv);
    CHECK(c.grid_m == 4096);
    CHECK(c.contour_r == 0.95);
}

TEST_CASE("config round trip through the canonical text", "[config][property]") {
    auto c = parse_config(std::string(base) + "forcing = values 1 0 ; 0.1 -2e-3i\ntol = 1e-11\n");
    c.alpha = 2.0 + 1.0 / 3.0;
    c.A(0, 0) = complex(0.1, -1e-17);
    const auto d = parse_config(c.text());
    CHECK(d.text() == c.text());
    CHECK(d.alpha == c.alpha);
    CHECK(d.A == c.A);
    CHECK(d.forcing.values == c.forcing.values);
    CHECK(d.tol == 1e-11);
}

TEST_CASE("complex entry syntax", "[config]") {
    CHECK(detail::parse_complex("1.5", "x") == complex(1.5, 0.0));
    CHECK(detail::parse_complex("-2i", "x") == complex(0.0, -2.0));
    CHECK(detail::parse_complex("i", "x") == complex(0.0, 1.0));
    CHECK(detail::parse_complex("1e-3-4.5e+2i", "x") == complex(1e-3, -450.0));
    CHECK(detail::parse_complex("-1-i", "x") == complex(-1.0, -1.0));
    CHECK_THROWS_AS(detail::parse_complex("1+2j", "x"), config_error);
    CHECK_THROWS_AS(detail::parse_complex("abc", "x"), config_error);
}

TEST_CASE("forcing generators", "[config]") {
    const auto r1 = parse_forcing("random(3)").materialize(2, 10);
    const auto r2 = parse_forcing("random(3)").materialize(2, 10);
    for (std::size_t n = 0; n <= 10; ++n) CHECK(r1[n] == r2[n]);
    const auto d = parse_forcing("delta").materialize(3, 5);
    CHECK(d[0] == cvec::Unit(3, 0));
    CHECK(d[1].isZero(0.0));
    const auto o = parse_forcing("ones").materialize(2, 3);
    CHECK(o[3] == cvec::Ones(2));
    const auto v = parse_forcing("values 1 ; 2").materialize(1, 4);
    CHECK(v[1](0) == complex(2.0, 0.0));
    CHECK(v[4](0) == complex(0.0, 0.0));
    CHECK_THROWS_AS(parse_forcing("values 1 2").materialize(1, 4), config_error);
    CHECK_THROWS_AS(parse_forcing("values 1 ; 2 ; 3").materialize(1, 1), config_error);
    CHECK_THROWS_AS(parse_forcing("sine"), config_error);
}

TEST_CASE("config validation", "[config]") {
    const std::string ok = std::string(base) + "forcing = ones\n";
    CHECK_NOTHROW(parse_config(ok));
    CHECK_THROWS_AS(parse_config(ok + "colour = red\n"), config_error);
    CHECK_THROWS_AS(parse_config(ok + "alpha = 2.6\n"), config_error);
    CHECK_THROWS_AS(parse_config("A = 1 2\nalpha = 2.5\ngamma = 0\nlambda = 1\nN = 20\nforcing = ones\n"), config_error);
    CHECK_THROWS_AS(parse_config("A = 0.1\ngamma = 0\nlambda = 1\nN = 20\nforcing = ones\n"), config_error);
    CHECK_THROWS_AS(parse_config("A = 0.1\nalpha = 3.5\ngamma = 0\nlambda = 1\nN = 20\nforcing = ones\n"),
                    domain_error);
    CHECK_THROWS_AS(parse_config("A = 0.1\nalpha = 2.5\ngamma = 0\nlambda = 0\nN = 20\nforcing = ones\n"),
                    config_error);
    CHECK_THROWS_AS(parse_config(ok + "horizons = 16 8\n"), config_error);
    CHECK_THROWS_AS(parse_config(ok + "method = fast\n"), config_error);
    CHECK_THROWS_AS(parse_config(ok + "just text\n"), config_error);
}

TEST_CASE("shortest round-trip number formatting", "[config]") {
    CHECK(fmt::num(0.1) == "0.1");
    CHECK(fmt::num(1e-300) == "1e-300");
    for (double x : {1.0 / 3.0, 2.0 / 7.0, 6.02214076e23, -0.0}) CHECK(std::stod(fmt::num(x)) == x);
    CHECK(fmt::num(complex(1.0, -2.0)) == "1-2i");
}
