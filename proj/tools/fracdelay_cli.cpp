// fracdelay: solve, verify and analyse delayed fractional difference equations from a config file.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fracdelay/fracdelay.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fracdelay;

namespace {

enum Exit : int { ok = 0, validation = 2, tolerance = 3, spectral = 4 };

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> grid_m;
    std::optional<double> contour_r;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;
};

/// Reads a plain config, or the config echoed inside a previous JSON report.
RunConfig load(const Overrides& o) {
    std::ifstream f(o.config);
    if (!f) throw config_error("cannot open config file '" + o.config + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const auto j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.contains("config") || !j["config"].is_string())
            throw config_error("'" + o.config + "' is JSON but carries no echoed config");
        text = j["config"].get<std::string>();
    }
    RunConfig c = parse_config(text);
    if (o.out) c.out = *o.out;
    if (o.grid_m) c.grid_m = *o.grid_m;
    if (o.contour_r) c.contour_r = *o.contour_r;
    if (o.tol) c.tol = *o.tol;
    if (o.seed) c.seed = *o.seed;
    if (o.method) c.method = parse_method(*o.method);
    c.validate();
    return c;
}

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : f_(path) {
        if (!f_) throw config_error("cannot write '" + path.string() + "'");
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) f_ << (i ? "," : "") << cells[i];
        f_ << '\n';
    }

private:
    std::ofstream f_;
};

json check(const std::string& name, double value, double tol, bool pass) {
    return {{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}};
}

json check(const std::string& name, double value, double tol) { return check(name, value, tol, value <= tol); }

json cplx(complex z) { return json::array({z.real(), z.imag()}); }

void write_solution_csv(const fs::path& path, const Solution& s, const ProblemSpec& spec) {
    std::vector<std::string> header{"n"};
    for (int i = 0; i < s.u.dim(); ++i) {
        header.push_back("u" + std::to_string(i) + "_re");
        header.push_back("u" + std::to_string(i) + "_im");
    }
    header.push_back("dalpha_u_norm");
    header.push_back("residual");
    Csv csv(path, header);
    const auto res = residual_profile(spec, s.u);
    for (std::size_t n = 0; n <= s.u.horizon(); ++n) {
        std::vector<std::string> cells{std::to_string(n)};
        for (int i = 0; i < s.u.dim(); ++i) {
            cells.push_back(fmt::num(s.u[n](i).real()));
            cells.push_back(fmt::num(s.u[n](i).imag()));
        }
        cells.push_back(n <= spec.N ? fmt::num(s.dalpha_u[n].norm()) : "");
        cells.push_back(n <= spec.N ? fmt::num(res[n]) : "");
        csv.row(cells);
    }
}

json solution_json(const Solution& s) {
    json j{{"method", method_name(s.method)},
           {"residual_max", s.residual_max},
           {"warnings", s.warnings},
           {"u3", json::array()},
           {"u4", json::array()},
           {"u5", json::array()}};
    if (s.method == Method::convolution) j["precision_bits"] = s.precision_bits;
    for (int k = 3; k <= 5 && static_cast<std::size_t>(k) <= s.u.horizon(); ++k)
        for (int i = 0; i < s.u.dim(); ++i) j["u" + std::to_string(k)].push_back(cplx(s.u[k](i)));
    return j;
}

struct Outcome {
    json results;
    std::vector<std::string> artifacts;
    int code = ok;
};

Outcome run_solve(const RunConfig& c, const fs::path& out) {
    Outcome o;
    const auto spec = c.problem();
    std::optional<Solution> conv, direct;
    if (c.method != MethodChoice::direct) conv = solve_convolution(spec);
    if (c.method != MethodChoice::conv) direct = solve_direct(spec);
    const Solution& primary = conv ? *conv : *direct;
    write_solution_csv(out / "solution.csv", primary, spec);
    o.artifacts.push_back((out / "solution.csv").string());
    o.results["solution"] = solution_json(primary);
    double worst = primary.residual_max;
    if (conv && direct) {
        write_solution_csv(out / "solution_direct.csv", *direct, spec);
        o.artifacts.push_back((out / "solution_direct.csv").string());
        o.results["direct"] = solution_json(*direct);
        const double dev = method_deviation(*conv, *direct);
        o.results["method_deviation"] = dev;
        worst = std::max({worst, direct->residual_max, dev});
    }
    o.results["tolerance"] = c.tol;
    o.results["pass"] = worst <= c.tol;
    if (!(worst <= c.tol)) o.code = tolerance;
    return o;
}

Outcome run_verify(const RunConfig& c) {
    Outcome o;
    const auto spec = c.problem();
    const auto p = c.params();
    auto tol = [&](double t) { return std::min(t, c.tol); };
    json checks = json::array();

    const std::pair<double, double> pairs[] = {{0.3, 0.7}, {0.5, 0.5}, {0.2, 1.3}, {c.alpha - 2.0, 3.0 - c.alpha}};
    double semigroup = 0.0;
    for (auto [b, g] : pairs) semigroup = std::max(semigroup, kernel_semigroup_residual(b, g, std::min<std::size_t>(c.N, 200)));
    checks.push_back(check("kernel semigroup k^b * k^g = k^(b+g)", semigroup, tol(1e-10)));

    {
        const std::size_t M = std::min<std::size_t>(c.N, 200);
        const auto k = kernel_sequence(c.alpha - 2.0, M);
        const auto dk = fractional_difference(Signal::scalar(k.values), c.alpha);
        double worst = 0.0;
        for (const auto& v : dk.values()) worst = std::max(worst, v.norm());
        checks.push_back(check("Delta^alpha k^(alpha-2) = 0", worst, tol(1e-10)));
    }
    {
        const std::size_t M = std::min<std::size_t>(c.N, 200);
        const auto h = h_values<double>(c.alpha, M);
        const double cc = (c.alpha - 1.0) * (c.alpha - 2.0) / 2.0;
        double worst = 0.0;
        for (std::size_t n = 0; n + 3 <= M; ++n)
            worst = std::max(worst, std::abs(h[n + 3] + (1.0 - c.alpha) * h[n + 2] + cc * h[n + 1]) /
                                        std::max({1.0, std::abs(h[n + 3])}));
        checks.push_back(check("h_alpha three-term recursion", worst, tol(1e-12)));
    }
    {
        const auto b = kernel_sequence(0.7, spec.N);
        const double r = conv_diff_identity_residual(b.values, spec.f, c.alpha);
        checks.push_back(check("Delta^alpha(b*P) expansion", r / std::max(1.0, spec.f.sup_norm()),
                               tol(1e-10)));
    }
    const auto S = resolvent_sequence(p, std::max<std::size_t>(c.N, 6));
    checks.push_back(check("resolvent recursion (post-hoc)", recursion_residual(S), tol(1e-10)));
    checks.push_back(check("resolvent identity n in 0..2", resolvent_residual(S, 0, 2), tol(1e-10)));
    checks.push_back(check("resolvent identity", resolvent_residual(S), tol(1e-9)));

    const auto conv = solve_convolution(spec);
    const auto direct = solve_direct(spec);
    checks.push_back(check("equation residual, convolution", conv.residual_max, tol(1e-9)));
    checks.push_back(check("equation residual, direct", direct.residual_max, tol(1e-9)));
    checks.push_back(check("method equivalence", method_deviation(conv, direct), tol(1e-9)));
    {
        const double a = c.alpha;
        const auto& f = spec.f;
        const cvec e3 = f[0], e4 = a * f[0] + f[1], e5 = a * (a + 1.0) / 2.0 * f[0] + a * f[1] + f[2];
        const double worst = std::max({(conv.u[3] - e3).norm() / std::max(1.0, e3.norm()),
                                       (conv.u[4] - e4).norm() / std::max(1.0, e4.norm()),
                                       (conv.u[5] - e5).norm() / std::max(1.0, e5.norm())});
        checks.push_back(check("initial values u(3), u(4), u(5)", worst, tol(1e-12)));
    }
    const auto hom = homogeneous_check(p, c.N);
    checks.push_back(check("homogeneous problem gives exact zeros", hom.sup_norm, 0.0, hom.zero));

    bool all = true;
    for (const auto& ch : checks) all = all && ch["pass"].get<bool>();
    o.results["checks"] = checks;
    o.results["pass"] = all;
    if (!all) o.code = tolerance;
    return o;
}

Outcome run_symbol(const RunConfig& c, const fs::path& out) {
    Outcome o;
    const auto p = c.params();
    const auto grid = CircleGrid::make(c.grid_m, c.exclusion_zero, c.exclusion_pi);
    const auto scan = blunck_scan(p, grid);
    {
        Csv csv(out / "symbol_scan.csv", {"t", "abs_f", "norm_G1", "norm_G2", "blunck_G1", "blunck_G2",
                                          "G1p_closed_form_residual", "G2p_closed_form_residual",
                                          "G2p_printed_form_residual"});
        for (const auto& r : scan.records)
            csv.row({fmt::num(r.t), fmt::num(std::abs(r.f)), fmt::num(r.G1), fmt::num(r.G2), fmt::num(r.B1),
                     fmt::num(r.B2), fmt::num(r.G1p_residual), fmt::num(r.G2p_residual),
                     fmt::num(r.G2p_printed_residual)});
        o.artifacts.push_back((out / "symbol_scan.csv").string());
    }
    const auto& s = scan.summary;
    const auto cond = condition_C_check(p, grid);
    const auto hil = hilbert_mr_check(p, grid);
    o.results["grid"] = {{"M", grid.M}, {"nodes", grid.nodes.size()},
                         {"exclusion_zero", grid.exclusion_zero}, {"exclusion_pi", grid.exclusion_pi}};
    o.results["scan"] = {{"sup_G1", s.sup_G1}, {"sup_G2", s.sup_G2}, {"sup_blunck_G1", s.sup_B1},
                         {"sup_blunck_G2", s.sup_B2}, {"arg_sup_G1", s.arg_G1}, {"arg_sup_G2", s.arg_G2},
                         {"arg_sup_blunck_G1", s.arg_B1}, {"arg_sup_blunck_G2", s.arg_B2},
                         {"min_abs_f", s.min_abs_f}, {"spectral_hits", s.spectral_hits},
                         {"refinement_change", scan.refinement_change}, {"stable_under_refinement", scan.stable},
                         {"max_G1p_closed_form_residual", s.max_G1p_residual},
                         {"max_G2p_closed_form_residual", s.max_G2p_residual},
                         {"max_G2p_printed_form_residual", s.max_G2p_printed_residual}};
    o.results["omega_f"] = {{"omega", cond.omega}, {"argmin", cond.argmin}};
    o.results["condition_c"] = {{"holds", cond.holds}, {"norm_A", cond.norm_A}, {"margin_low", cond.margin_low},
                                {"margin_high", cond.margin_high}, {"neumann_checked", cond.neumann_checked},
                                {"neumann_holds", cond.neumann_holds},
                                {"neumann_worst_ratio", cond.neumann_worst_ratio}};
    o.results["hilbert_mr"] = {{"verdict", hil.bounded ? "bounded" : "unbounded"}, {"sup_G1", hil.sup_G1},
                               {"sup_G2", hil.sup_G2}, {"ratios", hil.ratios}, {"exclusions", hil.exclusions},
                               {"spectral_hits", hil.spectral_hits}};
    o.results["symbol_supremum"] = {{"E", symbol_supremum(p, grid, SymbolKind::E)},
                                    {"F", symbol_supremum(p, grid, SymbolKind::F)}};
    if (s.spectral_hits > 0) o.code = spectral;
    return o;
}

Outcome run_mr(const RunConfig& c) {
    Outcome o;
    const auto p = c.params();
    const auto tr = regularity_trend(p, c.horizons);
    json rows = json::array();
    for (const auto& r : tr.rows)
        rows.push_back({{"N", r.N}, {"norm_E", r.norm_E}, {"norm_F", r.norm_F}, {"ratio_E", r.ratio_E},
                        {"ratio_F", r.ratio_F}});
    o.results["trend"] = {{"p", 2}, {"method", "truncated Toeplitz singular value"}, {"rows", rows},
                          {"verdict", tr.mr_consistent ? "MR-consistent" : "inconsistent"},
                          {"warnings", tr.warnings}, {"failure", tr.failure},
                          {"note", "finite-horizon evidence, not a proof"}};
    if (tr.failure.empty()) {
        const std::size_t n0 = c.horizons.front();
        const auto pair = build_pair(p, n0);
        o.results["lower_bound"] = {
            {"N", n0}, {"p", c.p}, {"trials", c.trials}, {"seed", c.seed},
            {"E", operator_norm_lower_bound(pair.E, c.p, c.trials, c.seed)},
            {"F", operator_norm_lower_bound(pair.F, c.p, c.trials, c.seed)}};
    }
    const auto grid = CircleGrid::make(c.grid_m, c.exclusion_zero, c.exclusion_pi);
    try {
        o.results["symbol_supremum"] = {{"E", symbol_supremum(p, grid, SymbolKind::E)},
                                        {"F", symbol_supremum(p, grid, SymbolKind::F)}};
    } catch (const spectral_hit& e) {
        o.results["symbol_supremum"] = {{"error", e.what()}, {"t", e.t()}};
    }
    const auto spec = c.problem();
    const auto sol = solve_convolution(spec);
    const auto ops = build_pair(p, spec.N);
    const double rec = reconstruction_residual(spec, sol, ops);
    o.results["reconstruction"] = check("Delta^alpha u = E f + gamma F f + f", rec, c.tol);
    if (!(rec <= c.tol)) o.code = tolerance;
    return o;
}

json base_report(const std::string& command, const RunConfig& c) {
    return {{"command", command}, {"version", fracdelay::version}, {"config", c.text()}, {"seed", c.seed}};
}

int finish(json report, const Outcome& o, const fs::path& out) {
    report["results"] = o.results;
    report["artifacts"] = o.artifacts;
    report["exit_code"] = o.code;
    std::ofstream(out / "report.json") << report.dump(2) << '\n';
    std::cout << report.dump(2) << '\n';
    return o.code;
}

int dispatch(const std::string& command, const Overrides& ov) {
    const RunConfig cfg = load(ov);
    const fs::path out = cfg.out;
    fs::create_directories(out);
    if (command == "solve") return finish(base_report(command, cfg), run_solve(cfg, out), out);
    if (command == "verify") return finish(base_report(command, cfg), run_verify(cfg), out);
    if (command == "symbol") return finish(base_report(command, cfg), run_symbol(cfg, out), out);
    if (command == "mr") return finish(base_report(command, cfg), run_mr(cfg), out);
    // report: every analysis into one file.
    Outcome all;
    int code = ok;
    auto merge = [&](const char* key, Outcome o) {
        all.results[key] = std::move(o.results);
        all.artifacts.insert(all.artifacts.end(), o.artifacts.begin(), o.artifacts.end());
        code = std::max(code, o.code);
    };
    merge("solve", run_solve(cfg, out));
    merge("verify", run_verify(cfg));
    merge("symbol", run_symbol(cfg, out));
    merge("mr", run_mr(cfg));
    {
        const auto v = validate_contour(cfg.params(), cfg.contour_r, cfg.contour_m);
        all.results["contour"] = {{"requested_radius", v.requested.radius},
                                  {"requested_max_relative_error", v.requested.max_relative_error},
                                  {"requested_failure", v.requested.failure},
                                  {"growth_rate", v.growth_rate},
                                  {"validated", v.validated},
                                  {"validated_radius", v.validated_radius},
                                  {"discrepancy", v.discrepancy}};
        if (v.fallback) all.results["contour"]["fallback_max_relative_error"] = v.fallback->max_relative_error;
    }
    all.code = code;
    return finish(base_report(command, cfg), all, out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed fractional difference equations of order 2 < alpha < 3"};
    app.require_subcommand(1);
    Overrides ov;
    std::string chosen;
    auto add = [&](const std::string& name, const std::string& help) {
        auto* sc = app.add_subcommand(name, help);
        sc->add_option("--config", ov.config, "config file, or a report.json to re-run")->required();
        sc->add_option("--out", ov.out, "output directory");
        sc->add_option("--grid-m", ov.grid_m, "uniform circle nodes");
        sc->add_option("--contour-r", ov.contour_r, "contour radius");
        sc->add_option("--tol", ov.tol, "tolerance");
        sc->add_option("--seed", ov.seed, "seed for randomized estimates");
        sc->add_option("--method", ov.method, "solver")->check(CLI::IsMember({"conv", "direct", "both"}));
        sc->callback([&chosen, name] { chosen = name; });
    };
    add("solve", "solve the problem; writes solution.csv");
    add("verify", "run the identity and residual battery");
    add("symbol", "scan the symbols on the unit circle; writes symbol_scan.csv");
    add("mr", "maximal regularity evidence from truncated operators");
    add("report", "all of the above plus the contour check, one report.json");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : validation;
    }
    try {
        return dispatch(chosen, ov);
    } catch (const spectral_hit& e) {
        std::cerr << "spectral hit: " << e.what() << '\n';
        return spectral;
    } catch (const quadrature_error& e) {
        std::cerr << "quadrature: " << e.what() << '\n';
        return spectral;
    } catch (const error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
