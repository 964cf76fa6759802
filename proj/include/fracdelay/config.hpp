#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fracdelay/errors.hpp"
#include "fracdelay/solver.hpp"
#include "fracdelay/types.hpp"

// Flat run configuration:
//
//   # comment
//   A        = 0.5 0.1i ; -0.2 0.3+0.1i     rows separated by ';'
//   alpha    = 2.5
//   gamma    = -0.5
//   lambda   = 1
//   N        = 200
//   forcing  = delta | ones | random(7) | values 1 ; 0.5 ; 0-1i
//
// plus optional analysis keys (grid_m, exclusion_zero, exclusion_pi, contour_r, contour_m,
// out, tol, seed, method, p, trials, horizons). Unknown or repeated keys are rejected.

namespace fracdelay {

class config_error : public error {
public:
    using error::error;
};

namespace fmt {

/// Shortest decimal string that reads back to the same double.
inline std::string num(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

inline std::string num(complex z) {
    if (z.imag() == 0.0 && !std::signbit(z.imag())) return num(z.real());
    std::string im = num(z.imag());
    if (im[0] != '-') im = "+" + im;
    return num(z.real()) + im + "i";
}

} // namespace fmt

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

inline double parse_double(std::string_view s, const std::string& what) {
    double v = 0.0;
    auto first = s.data(), last = s.data() + s.size();
    if (!s.empty() && s[0] == '+') ++first;
    auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || first == last)
        throw config_error("cannot parse '" + std::string(s) + "' as a number for " + what);
    return v;
}

inline long long parse_int(std::string_view s, const std::string& what) {
    long long v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
        throw config_error("cannot parse '" + std::string(s) + "' as an integer for " + what);
    return v;
}

/// Accepts "x", "yi", "x+yi", "x-yi" (also with 1e-3 style exponents).
inline complex parse_complex(const std::string& s, const std::string& what) {
    if (s.empty()) throw config_error("empty entry in " + what);
    if (s.back() != 'i') return parse_double(s, what);
    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split_at = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;)
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split_at = i;
            break;
        }
    auto imag_of = [&](const std::string& t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_double(t, what);
    };
    if (split_at == std::string::npos) return {0.0, imag_of(body)};
    return {parse_double(body.substr(0, split_at), what), imag_of(body.substr(split_at))};
}

inline std::vector<complex> parse_row(const std::string& row, const std::string& what) {
    std::string r = row;
    for (char& c : r)
        if (c == ',') c = ' ';
    std::vector<complex> out;
    for (const auto& w : words(r)) out.push_back(parse_complex(w, what));
    return out;
}

/// Uniform double in [-1, 1) from the top 53 bits of a 64-bit Mersenne twister draw.
inline double unit_sym(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-52 - 1.0; }

} // namespace detail

struct ForcingSpec {
    enum class Kind { delta, ones, random, values } kind = Kind::delta;
    std::uint64_t seed = 0;
    std::vector<std::vector<complex>> values;  ///< inline samples f(0), f(1), ...

    std::string text() const {
        switch (kind) {
        case Kind::delta: return "delta";
        case Kind::ones: return "ones";
        case Kind::random: return "random(" + std::to_string(seed) + ")";
        case Kind::values: {
            std::string s = "values";
            for (std::size_t n = 0; n < values.size(); ++n) {
                s += n == 0 ? " " : " ; ";
                for (std::size_t i = 0; i < values[n].size(); ++i) s += (i ? " " : "") + fmt::num(values[n][i]);
            }
            return s;
        }
        }
        return {};
    }

    /// f on 0..N. Inline values shorter than N+1 samples are padded with zeros.
    Signal materialize(int d, std::size_t N) const {
        Signal f(d, N);
        switch (kind) {
        case Kind::delta: f[0](0) = 1.0; break;
        case Kind::ones:
            for (auto& v : f.values()) v.setOnes();
            break;
        case Kind::random: {
            std::mt19937_64 rng(seed);
            for (auto& v : f.values())
                for (int i = 0; i < d; ++i) {
                    const double re = detail::unit_sym(rng());
                    const double im = detail::unit_sym(rng());
                    v(i) = complex(re, im);
                }
            break;
        }
        case Kind::values:
            if (values.size() > N + 1)
                throw config_error("forcing gives " + std::to_string(values.size()) + " samples, more than N+1 = " +
                                   std::to_string(N + 1));
            for (std::size_t n = 0; n < values.size(); ++n) {
                if (values[n].size() != static_cast<std::size_t>(d))
                    throw config_error("forcing sample " + std::to_string(n) + " has " +
                                       std::to_string(values[n].size()) + " entries, expected " + std::to_string(d));
                for (int i = 0; i < d; ++i) f[n](i) = values[n][static_cast<std::size_t>(i)];
            }
            break;
        }
        return f;
    }
};

inline ForcingSpec parse_forcing(const std::string& s) {
    ForcingSpec f;
    const std::string t = detail::trim(s);
    if (t == "delta") {
        f.kind = ForcingSpec::Kind::delta;
    } else if (t == "ones") {
        f.kind = ForcingSpec::Kind::ones;
    } else if (t.rfind("random(", 0) == 0 && t.back() == ')') {
        f.kind = ForcingSpec::Kind::random;
        const long long seed = detail::parse_int(detail::trim(t.substr(7, t.size() - 8)), "random seed");
        if (seed < 0) throw config_error("random seed must be >= 0");
        f.seed = static_cast<std::uint64_t>(seed);
    } else if (t.rfind("values", 0) == 0) {
        f.kind = ForcingSpec::Kind::values;
        for (const auto& row : detail::split(t.substr(6), ';')) {
            if (row.empty()) throw config_error("empty sample in forcing values");
            f.values.push_back(detail::parse_row(row, "forcing"));
        }
    } else {
        throw config_error("unknown forcing '" + t + "' (expected delta, ones, random(seed) or values ...)");
    }
    return f;
}

enum class MethodChoice { conv, direct, both };

inline MethodChoice parse_method(const std::string& s) {
    if (s == "conv") return MethodChoice::conv;
    if (s == "direct") return MethodChoice::direct;
    if (s == "both") return MethodChoice::both;
    throw config_error("method must be conv, direct or both, got '" + s + "'");
}

inline const char* method_text(MethodChoice m) {
    return m == MethodChoice::conv ? "conv" : m == MethodChoice::direct ? "direct" : "both";
}

struct RunConfig {
    cmat A;
    double alpha = 2.5;
    double gamma = 0.0;
    int lambda = 1;
    std::size_t N = 0;
    ForcingSpec forcing;

    int grid_m = 4096;
    double exclusion_zero = 1e-4;
    double exclusion_pi = 1e-4;
    double contour_r = 0.95;
    int contour_m = 4096;
    std::string out = "out";
    double tol = 1e-9;
    std::uint64_t seed = 1;
    MethodChoice method = MethodChoice::both;
    double p = 2.0;
    int trials = 256;
    std::vector<std::size_t> horizons{256, 512, 1024, 2048};

    ProblemSpec problem() const {
        ProblemSpec s{A, alpha, gamma, lambda, N, forcing.materialize(static_cast<int>(A.rows()), N)};
        s.validate();
        return s;
    }

    ResolventParams params() const { return {A, alpha, gamma, lambda}; }

    /// Canonical text that parses back to an identical configuration.
    std::string text() const {
        std::ostringstream o;
        o << "A = ";
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            if (i) o << " ; ";
            for (Eigen::Index j = 0; j < A.cols(); ++j) o << (j ? " " : "") << fmt::num(A(i, j));
        }
        o << "\nalpha = " << fmt::num(alpha) << "\ngamma = " << fmt::num(gamma) << "\nlambda = " << lambda
          << "\nN = " << N << "\nforcing = " << forcing.text() << "\ngrid_m = " << grid_m
          << "\nexclusion_zero = " << fmt::num(exclusion_zero) << "\nexclusion_pi = " << fmt::num(exclusion_pi)
          << "\ncontour_r = " << fmt::num(contour_r) << "\ncontour_m = " << contour_m << "\nout = " << out
          << "\ntol = " << fmt::num(tol) << "\nseed = " << seed << "\nmethod = " << method_text(method)
          << "\np = " << fmt::num(p) << "\ntrials = " << trials << "\nhorizons =";
        for (auto h : horizons) o << ' ' << h;
        o << '\n';
        return o.str();
    }

    /// Structural checks that do not need a solve.
    void validate() const {
        params().validate();
        check_horizon(N + 3);
        if (N < 6) throw config_error("N must be >= 6");
        if (grid_m < 16) throw config_error("grid_m must be >= 16");
        if (!(exclusion_zero >= 0.0) || !(exclusion_pi >= 0.0)) throw config_error("exclusion radii must be >= 0");
        if (!(contour_r > 0.0)) throw config_error("contour_r must be positive");
        if (contour_m < 256) throw config_error("contour_m must be >= 256");
        if (!(tol > 0.0)) throw config_error("tol must be positive");
        if (!(p > 1.0 && std::isfinite(p))) throw config_error("p must satisfy 1 < p < infinity");
        if (trials < 1) throw config_error("trials must be >= 1");
        if (horizons.empty()) throw config_error("horizons must not be empty");
        for (std::size_t i = 0; i < horizons.size(); ++i)
            if (horizons[i] < 1 || (i > 0 && horizons[i] <= horizons[i - 1]))
                throw config_error("horizons must be positive and strictly increasing");
    }
};

inline RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    int lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (kv.count(key)) throw config_error("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        kv[key] = val;
    }
    auto take = [&](const std::string& k) -> std::optional<std::string> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto need = [&](const std::string& k) {
        auto v = take(k);
        if (!v) throw config_error("missing required key '" + k + "'");
        return *v;
    };

    const auto rows = detail::split(need("A"), ';');
    std::vector<std::vector<complex>> entries;
    for (const auto& r : rows) entries.push_back(detail::parse_row(r, "A"));
    const auto d = static_cast<Eigen::Index>(entries.size());
    c.A.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (static_cast<Eigen::Index>(entries[static_cast<std::size_t>(i)].size()) != d)
            throw config_error("A must be square: row " + std::to_string(i) + " has " +
                               std::to_string(entries[static_cast<std::size_t>(i)].size()) + " entries, expected " +
                               std::to_string(d));
        for (Eigen::Index j = 0; j < d; ++j) c.A(i, j) = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    c.alpha = detail::parse_double(need("alpha"), "alpha");
    c.gamma = detail::parse_double(need("gamma"), "gamma");
    const long long lam = detail::parse_int(need("lambda"), "lambda");
    if (lam < 1 || lam > 1'000'000) throw config_error("lambda must be a positive integer");
    c.lambda = static_cast<int>(lam);
    const long long N = detail::parse_int(need("N"), "N");
    if (N < 0) throw config_error("N must be >= 0");
    c.N = static_cast<std::size_t>(N);
    c.forcing = parse_forcing(need("forcing"));

    auto small_int = [](const std::string& v, const std::string& key) {
        const long long x = detail::parse_int(v, key);
        if (x < 0 || x > 1'000'000'000) throw config_error(key + " out of range");
        return static_cast<int>(x);
    };
    if (auto v = take("grid_m")) c.grid_m = small_int(*v, "grid_m");
    if (auto v = take("exclusion_zero")) c.exclusion_zero = detail::parse_double(*v, "exclusion_zero");
    if (auto v = take("exclusion_pi")) c.exclusion_pi = detail::parse_double(*v, "exclusion_pi");
    if (auto v = take("contour_r")) c.contour_r = detail::parse_double(*v, "contour_r");
    if (auto v = take("contour_m")) c.contour_m = small_int(*v, "contour_m");
    if (auto v = take("out")) c.out = *v;
    if (auto v = take("tol")) c.tol = detail::parse_double(*v, "tol");
    if (auto v = take("seed")) {
        const long long s = detail::parse_int(*v, "seed");
        if (s < 0) throw config_error("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = take("method")) c.method = parse_method(*v);
    if (auto v = take("p")) c.p = detail::parse_double(*v, "p");
    if (auto v = take("trials")) c.trials = small_int(*v, "trials");
    if (auto v = take("horizons")) {
        c.horizons.clear();
        for (const auto& w : detail::words(*v)) {
            const long long h = detail::parse_int(w, "horizons");
            if (h < 1) throw config_error("horizons must be positive");
            c.horizons.push_back(static_cast<std::size_t>(h));
        }
    }
    if (!kv.empty()) throw config_error("unknown key '" + kv.begin()->first + "'");
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

} // namespace fracdelay
