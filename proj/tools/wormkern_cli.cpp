// Batch front-end: evaluate kernels, run validation suites, sweep decay and
// scaling laws, probe the L^p machinery. Reports are deterministic for a
// fixed config + seed: rows are emitted in canonical order and floats are
// printed with 17 significant digits.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wormkern/lp_probe.hpp"
#include "wormkern/version.hpp"

using json = nlohmann::ordered_json;
using namespace wormkern;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSuiteFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitDomainViolation = 3;
constexpr int kExitNumericFailure = 4;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct RunConfig {
    double beta = 3.0 * kPi / 2.0;
    std::optional<double> h;
    std::optional<double> c0;
    double tol = 1e-8;
    uint64_t seed = 12345;
    std::string route = "split";
    std::string format = "csv";
    std::string out_path;
    std::string only;
    std::vector<std::string> points;
    std::string sweep_name = "kernel-decay";
    double sweep_from = 10.0, sweep_to = 50.0;
    int sweep_points = 17;
    double p_exp = 2.0;

    WormParams params() const { return make_params(beta, h, c0); }
    QuadratureSpec quad() const {
        QuadratureSpec q;
        q.tol = tol;
        return q;
    }
    json resolved() const {
        json j;
        j["library_version"] = WORMKERN_VERSION;
        j["beta"] = beta;
        const auto p = params();
        j["nu_beta"] = p.nu;
        j["h"] = p.h;
        j["c0"] = p.c0;
        j["tol"] = tol;
        j["seed"] = seed;
        j["route"] = route;
        return j;
    }
    std::string csv_banner() const { return "# config " + resolved().dump() + "\n"; }
};

Route parse_route(const std::string& r) {
    if (r == "brute") return Route::brute;
    if (r == "split") return Route::residue_split;
    if (r == "expansion") return Route::expansion;
    throw std::invalid_argument("unknown route: " + r);
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(cfg.out_path);
        f << text;
    }
}

StripPoint parse_point_z(const std::vector<double>& v, size_t off) {
    return {cplx(v[off], v[off + 1]), cplx(v[off + 2], v[off + 3])};
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

int cmd_eval(const RunConfig& cfg) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    struct Row {
        StripPoint z, w;
        std::string route;
        cplx K;
        KernelBreakdown bd;
        bool has_bd = false;
    };
    std::vector<Row> rows;
    for (const auto& ptspec : cfg.points) {
        std::vector<double> v;
        std::stringstream ss(ptspec);
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        if (v.size() != 8)
            throw std::invalid_argument("--point needs 8 comma-separated reals "
                                        "(z1re,z1im,z2re,z2im,w1re,w1im,w2re,w2im)");
        Row r;
        r.z = parse_point_z(v, 0);
        r.w = parse_point_z(v, 4);
        r.route = cfg.route;
        if (!in_strip_worm(r.z, p) || !in_strip_worm(r.w, p))
            throw DomainViolation("eval: point outside D'_beta");
        const Route rt = parse_route(cfg.route);
        if (rt == Route::expansion) {
            r.bd = kernel_expansion(r.z, r.w, p, quad);
            r.K = r.bd.total;
            r.has_bd = true;
        } else {
            r.K = kernel_dprime(r.z, r.w, p, quad, rt);
        }
        rows.push_back(std::move(r));
    }
    if (cfg.format == "json") {
        json out;
        out["config"] = cfg.resolved();
        out["rows"] = json::array();
        for (const auto& r : rows) {
            json jr;
            jr["z1"] = {r.z.z1.real(), r.z.z1.imag()};
            jr["z2"] = {r.z.z2.real(), r.z.z2.imag()};
            jr["w1"] = {r.w.z1.real(), r.w.z1.imag()};
            jr["w2"] = {r.w.z2.real(), r.w.z2.imag()};
            jr["route"] = r.route;
            jr["K"] = {r.K.real(), r.K.imag()};
            if (r.has_bd) {
                jr["chi1"] = r.bd.chi1;
                jr["chi2"] = r.bd.chi2;
                json terms = json::array();
                for (const auto& t : r.bd.terms) terms.push_back({t.real(), t.imag()});
                jr["terms"] = terms;
                jr["error_term"] = {r.bd.error_term.real(), r.bd.error_term.imag()};
            }
            out["rows"].push_back(jr);
        }
        emit(cfg, out.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << cfg.csv_banner();
        os << "z1_re,z1_im,z2_re,z2_im,w1_re,w1_im,w2_re,w2_im,route,K_re,K_im";
        for (int i = 1; i <= 8; ++i) os << ",K" << i << "_re,K" << i << "_im";
        os << ",E_re,E_im,chi1,chi2\n";
        for (const auto& r : rows) {
            os << fmt17(r.z.z1.real()) << ',' << fmt17(r.z.z1.imag()) << ','
               << fmt17(r.z.z2.real()) << ',' << fmt17(r.z.z2.imag()) << ','
               << fmt17(r.w.z1.real()) << ',' << fmt17(r.w.z1.imag()) << ','
               << fmt17(r.w.z2.real()) << ',' << fmt17(r.w.z2.imag()) << ',' << r.route << ','
               << fmt17(r.K.real()) << ',' << fmt17(r.K.imag());
            for (int i = 0; i < 8; ++i) {
                const cplx t = r.has_bd ? r.bd.terms[i] : cplx(0, 0);
                os << ',' << fmt17(t.real()) << ',' << fmt17(t.imag());
            }
            const cplx e = r.has_bd ? r.bd.error_term : cplx(0, 0);
            os << ',' << fmt17(e.real()) << ',' << fmt17(e.imag()) << ','
               << fmt17(r.has_bd ? r.bd.chi1 : 0.0) << ',' << fmt17(r.has_bd ? r.bd.chi2 : 0.0)
               << '\n';
        }
        emit(cfg, os.str());
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct Check {
    std::string name;
    double measured;
    double threshold;
    bool pass;
};

json check_json(const Check& c) {
    json j;
    j["name"] = c.name;
    j["measured"] = c.measured;
    j["threshold"] = c.threshold;
    j["pass"] = c.pass;
    return j;
}

void suite_decomposition(const RunConfig& cfg, std::vector<Check>& checks) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    checks.push_back({"pole_line_safety", pole_line_safety(p), 0.0, pole_line_safety(p) > 0.0});
    std::vector<cplx> taus{{1.0, 0.3}, {-2.5, -0.5}, {4.0, 0.9}, {-0.6, 0.0}};
    double worst = 0.0;
    std::vector<double> defects(taus.size());
    parallel_for(taus.size(), [&](size_t i) {
        double w = 0.0;
        for (const auto& d : decompose_modes(taus[i], -6, 6, p, quad))
            w = std::max(w, d.defect / std::max(std::abs(d.I), 1e-300));
        defects[i] = w;
    });
    for (double d : defects) worst = std::max(worst, d);
    checks.push_back({"decomposition_defect", worst, 1e-6, worst < 1e-6});
    double worst_res = 0.0;
    for (const auto& tau : taus)
        for (int j = -6; j <= 6; ++j) {
            const cplx a = residue_R_j(tau, j, p);
            const cplx b = residue_contour_oracle(tau, j, p);
            worst_res = std::max(worst_res, std::abs(a - b) / std::abs(b));
        }
    checks.push_back({"residue_contour_oracle", worst_res, 1e-8, worst_res < 1e-8});
}

void suite_series(const RunConfig& cfg, std::vector<Check>& checks) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst_r = 0.0, worst_q = 0.0;
    for (int t = 0; t < 10; ++t) {
        const double v = 2.0 * U(rng) - 1.0;
        const double llam = 0.4 * (2.0 * U(rng) - 1.0) + v / 2.0;
        const cplx lam = std::polar(std::exp(llam / 2.0), 2.0 * kPi * U(rng));
        const cplx tau((1.0 + 3.0 * U(rng)) * (U(rng) < 0.5 ? -1 : 1), v);
        cplx direct = 0.0;
        for (int j = -200; j <= 200; ++j) direct += residue_R_j(tau, j, p) * std::pow(lam, j);
        const auto sr = sum_R_closed(tau, lam, p);
        worst_r = std::max(worst_r, std::abs(direct - sr.total) / std::abs(direct));
        const cplx x = std::polar(0.3 + 2.0 * U(rng), 2.0 * kPi * U(rng));
        const double al = 0.3 + 3.0 * U(rng);
        const cplx l2 = std::polar(0.3 + 2.0 * U(rng), 2.0 * kPi * U(rng));
        const cplx qa = Q_delta_routeA(x, al, l2, 0.3, p.h, +1);
        const cplx qb = Q_delta_routeB(x, al, l2, 0.3, p.h, +1);
        worst_q = std::max(worst_q, std::abs(qa - qb) / std::abs(qa));
    }
    checks.push_back({"sum_R_closed_vs_direct", worst_r, 1e-8, worst_r < 1e-8});
    checks.push_back({"Q_routeA_vs_routeB", worst_q, 1e-8, worst_q < 1e-8});
    RSParams rs{p.R(), p.S(), 0.0, p.h};
    double worst_i = 0.0;
    for (int t = 0; t < 3; ++t) {
        const cplx tau(1.0 + t, 0.2);
        const cplx lam = std::polar(0.9, 0.5 + t);
        cplx direct = 0.0;
        for (int j = -40; j <= 40; ++j) direct += script_I_quad(tau, j, rs, quad) * std::pow(lam, j);
        const cplx closed = sum_script_I_closed(tau, lam, rs);
        worst_i = std::max(worst_i, std::abs(direct - closed) / std::abs(direct));
    }
    checks.push_back({"script_I_closed_vs_quadrature", worst_i, 1e-6, worst_i < 1e-6});
}

void suite_kernel_routes(const RunConfig& cfg, std::vector<Check>& checks) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    const StripPoint w{cplx(0.0, -0.1), cplx(0.8, -0.3)};
    double worst = 0.0, worst_sym = 0.0;
    for (double x : {0.2, 0.9, 1.6, 2.8, 5.0}) {
        const StripPoint z{cplx(x, 0.2), cplx(1.1, 0.1)};
        const cplx kb = kernel_brute(z, w, p, quad);
        const cplx ks = kernel_split(z, w, p, quad);
        const cplx ke = kernel_expansion(z, w, p, quad).total;
        worst = std::max({worst, std::abs(kb - ks) / std::abs(kb), std::abs(kb - ke) / std::abs(kb)});
        const cplx kzw = kernel_brute(z, w, p, quad);
        const cplx kwz = kernel_brute(w, z, p, quad);
        worst_sym = std::max(worst_sym, std::abs(kzw - std::conj(kwz)) / std::abs(kzw));
    }
    checks.push_back({"three_route_agreement", worst, 1e-4, worst < 1e-4});
    checks.push_back({"hermitian_symmetry", worst_sym, 1e-8, worst_sym < 1e-8});
}

void suite_lp(const RunConfig& cfg, std::vector<Check>& checks) {
    const auto p = cfg.params();
    SchurConfig scfg;
    scfg.p = cfg.p_exp;
    const std::vector<StripPoint> zs{{cplx(0.3, 0.2), cplx(1.1, 0.1)},
                                     {cplx(0.0, 0.5), cplx(1.4, 0.0)}};
    double worst_change = 0.0;
    bool all_stable = true;
    for (int i = 1; i <= 8; ++i) {
        const auto r = schur_check_Bi(i, scfg, zs, p);
        worst_change = std::max(worst_change, r.refined_change);
        all_stable = all_stable && r.stable;
    }
    checks.push_back({"schur_B_stability", worst_change, 0.10, all_stable});
    const auto [pmin, pmax] = lp_range(p);
    bool window_logic = b_window(7, 0.5 * (pmin + 2.0), p).has_value() &&
                        !b_window(7, pmax + 0.5, p).has_value() &&
                        !b_window(7, pmin - 0.05, p).has_value();
    checks.push_back({"b_window_sharp_range", window_logic ? 1.0 : 0.0, 1.0, window_logic});
}

void suite_scaling(const RunConfig& cfg, std::vector<Check>& checks) {
    const auto p = cfg.params();
    std::vector<double> sweep;
    for (double e = 1e-3; e <= 1.0001e-1; e *= std::pow(10.0, 1.0 / 3.0)) sweep.push_back(e);
    const auto f31 = forelli_rudin_scaling(ScalingLaw::L31ii, sweep, p);
    checks.push_back({"L31ii_slope", f31.fit.slope, -1.0, std::abs(f31.fit.slope + 1.0) < 0.05});
    const auto f33 = forelli_rudin_scaling(ScalingLaw::L33ii, sweep, p, 0.5);
    checks.push_back({"L33ii_slope", f33.fit.slope, -0.5, std::abs(f33.fit.slope + 0.5) < 0.05});
}

int cmd_validate(const RunConfig& cfg) {
    json report;
    report["config"] = cfg.resolved();
    report["suites"] = json::array();
    bool all_pass = true;
    const std::vector<std::pair<std::string, void (*)(const RunConfig&, std::vector<Check>&)>>
        suites{{"decomposition", suite_decomposition},
               {"series", suite_series},
               {"kernel-routes", suite_kernel_routes},
               {"lp", suite_lp},
               {"scaling", suite_scaling}};
    for (const auto& [name, fn] : suites) {
        if (!cfg.only.empty() && cfg.only != name) continue;
        std::vector<Check> checks;
        fn(cfg, checks);
        json js;
        js["name"] = name;
        js["checks"] = json::array();
        bool suite_pass = true;
        for (const auto& c : checks) {
            js["checks"].push_back(check_json(c));
            suite_pass = suite_pass && c.pass;
        }
        js["pass"] = suite_pass;
        all_pass = all_pass && suite_pass;
        report["suites"].push_back(js);
    }
    report["pass"] = all_pass;
    emit(cfg, report.dump(2) + "\n");
    return all_pass ? kExitOk : kExitSuiteFailure;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    if (cfg.sweep_points < 2) throw std::invalid_argument("sweep: need at least 2 points");
    std::ostringstream os;
    os << cfg.csv_banner();
    if (cfg.sweep_name == "kernel-decay") {
        std::vector<double> xs, ys;
        os << "re_tau,log_abs_K\n";
        const int n = cfg.sweep_points;
        for (int i = 0; i < n; ++i) {
            const double x = cfg.sweep_from + (cfg.sweep_to - cfg.sweep_from) * i / (n - 1);
            double acc = 0.0;
            for (int k = 0; k < 8; ++k) {
                const StripPoint z{cplx(x, 0.1), cplx(1.0, 0.2)};
                const StripPoint w{cplx(0.0, 0.1), std::polar(1.0, 2.0 * kPi * k / 8.0)};
                acc += std::abs(kernel_expansion(z, w, p, quad, false).total);
            }
            xs.push_back(x);
            ys.push_back(std::log(acc / 8.0));
            os << fmt17(x) << ',' << fmt17(ys.back()) << '\n';
        }
        const auto fit = fit_line(xs, ys);
        os << "fit_slope," << fmt17(fit.slope) << "\nexpected_slope," << fmt17(-p.nu) << '\n';
    } else {
        ScalingLaw law;
        double delta = 0.5;
        if (cfg.sweep_name == "L31i") law = ScalingLaw::L31i;
        else if (cfg.sweep_name == "L31ii") law = ScalingLaw::L31ii;
        else if (cfg.sweep_name == "L33i") law = ScalingLaw::L33i;
        else if (cfg.sweep_name == "L33ii") law = ScalingLaw::L33ii;
        else throw std::invalid_argument("unknown sweep: " + cfg.sweep_name);
        std::vector<double> sweep;
        const int n = cfg.sweep_points;
        for (int i = 0; i < n; ++i)
            sweep.push_back(cfg.sweep_from *
                            std::pow(cfg.sweep_to / cfg.sweep_from, double(i) / (n - 1)));
        const auto fit = forelli_rudin_scaling(law, sweep, p, delta);
        os << "param,value\n";
        for (size_t i = 0; i < fit.param.size(); ++i)
            os << fmt17(fit.param[i]) << ',' << fmt17(fit.value[i]) << '\n';
        os << "fit_slope," << fmt17(fit.fit.slope) << '\n';
    }
    emit(cfg, os.str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// probe-lp
// ---------------------------------------------------------------------------

int cmd_probe_lp(const RunConfig& cfg) {
    const auto p = cfg.params();
    const auto quad = cfg.quad();
    json out;
    out["config"] = cfg.resolved();
    out["p"] = cfg.p_exp;
    const auto [pmin, pmax] = lp_range(p);
    out["sharp_range"] = {pmin, pmax};
    json windows = json::array();
    for (int i = 1; i <= 8; ++i) {
        const auto w = b_window(i, cfg.p_exp, p);
        json jw;
        jw["i"] = i;
        jw["nonempty"] = w.has_value();
        if (w) jw["window"] = {w->first, w->second};
        windows.push_back(jw);
    }
    out["b_windows"] = windows;
    const WormPoint zeta{cplx(1.0, 0.0), cplx(1.0, 0.0)};
    const double pp = cfg.p_exp / (cfg.p_exp - 1.0);
    const double probe_p = std::min(cfg.p_exp, pp);  // duality: probe the smaller exponent
    const auto rep = divergence_probe(probe_p, zeta, p, quad,
                                      {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}, 200000,
                                      cfg.seed);
    json jt = json::array();
    for (const auto& r : rep.table) jt.push_back({r.eps, r.integral, r.std_error});
    out["divergence_probe"] = {{"probe_exponent", probe_p},
                               {"radial_exponent", rep.radial_exponent},
                               {"growth_exponent", rep.growth_exponent},
                               {"divergent", rep.divergent},
                               {"inconclusive", rep.inconclusive},
                               {"table", jt}};
    emit(cfg, out.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bergman kernels of the non-smooth worm domains"};
    app.set_help_flag("--help", "print usage");  // frees -h / --h for the shift flag
    app.fallthrough();  // global flags may follow the subcommand
    app.require_subcommand(1);
    RunConfig cfg;

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags win)");
    app.add_option("--beta", cfg.beta, "worm parameter beta (> pi)");
    double h_flag = -1.0, c0_flag = -1.0;
    app.add_option("--h", h_flag, "contour shift (default: window midpoint)");
    app.add_option("--c0", c0_flag, "cutoff scale (default 1)");
    app.add_option("--tol", cfg.tol, "quadrature tolerance");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--route", cfg.route, "kernel route: brute|split|expansion");
    app.add_option("--format", cfg.format, "output format: csv|json");
    app.add_option("--out", cfg.out_path, "output path (default stdout)");
    app.add_option("--only", cfg.only, "restrict validate to one suite");
    app.add_option("--p", cfg.p_exp, "Lebesgue exponent for lp checks");

    auto* eval = app.add_subcommand("eval", "evaluate the kernel at points");
    eval->add_option("--point", cfg.points,
                     "z1re,z1im,z2re,z2im,w1re,w1im,w2re,w2im (repeatable)");
    auto* validate = app.add_subcommand("validate", "run the validation suites");
    auto* sweep = app.add_subcommand("sweep", "decay-rate and scaling-law sweeps");
    sweep->add_option("--sweep", cfg.sweep_name, "kernel-decay|L31i|L31ii|L33i|L33ii");
    sweep->add_option("--from", cfg.sweep_from, "sweep start");
    sweep->add_option("--to", cfg.sweep_to, "sweep end");
    sweep->add_option("--points", cfg.sweep_points, "sweep point count");
    auto* probe = app.add_subcommand("probe-lp", "sharp-range witnesses at an exponent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfigError;
    }

    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw std::invalid_argument("cannot open config: " + config_path);
            json j = json::parse(f);
            // flags win: only fill fields the command line left at defaults
            if (j.contains("beta") && app.count("--beta") == 0) cfg.beta = j["beta"];
            if (j.contains("h") && app.count("--h") == 0) h_flag = j["h"];
            if (j.contains("c0") && app.count("--c0") == 0) c0_flag = j["c0"];
            if (j.contains("tol") && app.count("--tol") == 0) cfg.tol = j["tol"];
            if (j.contains("seed") && app.count("--seed") == 0) cfg.seed = j["seed"];
            if (j.contains("route") && app.count("--route") == 0) cfg.route = j["route"];
            if (j.contains("points") && cfg.points.empty())
                for (const auto& s : j["points"]) cfg.points.push_back(s.get<std::string>());
        }
        if (h_flag > 0.0) cfg.h = h_flag;
        if (c0_flag > 0.0) cfg.c0 = c0_flag;
        if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
        if (cfg.format != "csv" && cfg.format != "json")
            throw std::invalid_argument("format must be csv or json");
        (void)cfg.params();  // validates beta/h/c0 now
        if (eval->parsed()) {
            if (cfg.points.empty()) throw std::invalid_argument("eval: no points given");
            return cmd_eval(cfg);
        }
        if (validate->parsed()) return cmd_validate(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (probe->parsed()) return cmd_probe_lp(cfg);
    } catch (const DomainViolation& e) {
        json err;
        err["error"] = "domain_violation";
        err["message"] = e.what();
        std::cout << err.dump(2) << std::endl;
        return kExitDomainViolation;
    } catch (const std::invalid_argument& e) {
        json err;
        err["error"] = "config_error";
        err["message"] = e.what();
        std::cout << err.dump(2) << std::endl;
        return kExitConfigError;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "numeric_failure";
        err["message"] = e.what();
        std::cout << err.dump(2) << std::endl;
        return kExitNumericFailure;
    }
    return kExitConfigError;
}
