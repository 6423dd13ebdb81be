#include "vnw/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vnw/asymptotics.hpp"
#include "vnw/model.hpp"
#include "vnw/ode.hpp"

namespace vnw::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double residual_threshold = 1e-9;
constexpr double closed_vs_quad_threshold = 1e-8;
constexpr double numerov_threshold = 1e-5;
constexpr double fit_tolerance = 0.05;

struct Common {
    double k = 1.0;
    double a = 0.0;
    double beta = 0.0;
    double A = 1.0;
    int precision = 12;
    std::string out_path;
};

ModelParams params_of(const Common& c) {
    ModelParams p{c.k, c.a, c.beta, c.A};
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (c.precision < 1 || c.precision > 17) throw UsageError("--precision must lie in [1, 17]");
    return p;
}

void add_common(CLI::App* cmd, Common& c, bool with_A) {
    cmd->add_option("--k", c.k, "wavenumber of the embedded level (E = k^2, reduced units)")
        ->default_val(1.0);
    cmd->add_option("--a", c.a, "coupling a of phi(r) = a / r^beta")->required();
    cmd->add_option("--beta", c.beta, "decay exponent beta, 0 <= beta < 3")->required();
    if (with_A) cmd->add_option("--A", c.A, "normalization of f")->default_val(1.0);
    cmd->add_option("--precision", c.precision, "significant digits in text output")
        ->default_val(12);
    cmd->add_option("--out", c.out_path, "output file (default: standard output)");
}

double rounded(double v, int precision) { return std::strtod(format_number(v, precision).c_str(), nullptr); }

json number_or_null(std::optional<double> v, int precision) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return rounded(*v, precision);
}

void emit(const std::string& text, const Common& c, std::ostream& out) {
    if (c.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(c.out_path, std::ios::binary);
    if (!file) throw Error("cannot open output file " + c.out_path);
    file << text;
}

std::string csv_field(std::optional<double> v, int precision) {
    return v && std::isfinite(*v) ? format_number(*v, precision) : std::string();
}

json classification_json(const DecayClassification& cls, int precision) {
    json j;
    j["kind"] = to_string(cls.kind);
    j["exponent_p"] = number_or_null(cls.exponent_p, precision);
    j["rate_c"] = number_or_null(cls.rate_c, precision);
    j["power_q"] = number_or_null(cls.power_q, precision);
    j["normalizable"] = cls.normalizable;
    if (cls.finite_moments_up_to == all_moments) {
        j["finite_moments_up_to"] = "all";
    } else {
        j["finite_moments_up_to"] = cls.finite_moments_up_to;
    }
    j["potential_asymptotics"] = cls.potential_asymptotics;
    return j;
}

json params_json(const ModelParams& p, int precision) {
    return {{"A", rounded(p.A, precision)},
            {"a", rounded(p.a, precision)},
            {"beta", rounded(p.beta, precision)},
            {"k", rounded(p.k, precision)}};
}

// Envelope fit of analytic chi against the classification's prediction.
struct FitOutcome {
    EnvelopeFit fit;
    std::optional<double> dev_p, dev_c, dev_q;
    bool pass = false;
};

std::optional<FitOutcome> fit_against_prediction(const ModelParams& p, const DecayClassification& cls,
                                                 double rmax, long n) {
    if (!cls.normalizable) return std::nullopt;
    const GridSpec grid{0.0, rmax, n};
    const SampledFunction chi_samples = sample(p, grid, Quantity::chi, default_path(p));
    const double r_lo = default_window_start(p.k);
    FitOutcome out;
    auto rel = [](double fitted, double predicted) { return std::abs(fitted - predicted) / predicted; };
    if (cls.kind == DecayKind::power_law) {
        out.fit = fit_envelope(chi_samples, EnvelopeModel::power, r_lo, rmax);
        out.dev_q = rel(*out.fit.fitted_q, *cls.power_q);
        out.pass = *out.dev_q <= fit_tolerance;
    } else {
        out.fit = fit_envelope(chi_samples, EnvelopeModel::stretched_exp, r_lo, rmax);
        out.dev_p = rel(*out.fit.fitted_p, *cls.exponent_p);
        out.dev_c = rel(*out.fit.fitted_c, *cls.rate_c);
        out.pass = *out.dev_p <= fit_tolerance && *out.dev_c <= fit_tolerance;
    }
    return out;
}

struct FitGrid {
    double rmax = 0.0;
    long n = 0;
};

FitGrid fit_grid(double k, double rmax_flag, long n_flag) {
    FitGrid g;
    g.rmax = rmax_flag > 0.0 ? rmax_flag : 400.0 / k;
    g.n = n_flag > 0 ? n_flag : static_cast<long>(std::ceil(g.rmax / (0.01 / k))) + 1;
    if (g.n < 2) throw UsageError("--n must be >= 2");
    if (g.rmax <= default_window_start(k)) {
        throw UsageError("--rmax must exceed the fit window start 10 pi / k");
    }
    return g;
}

// ---- subcommands ----

std::string cmd_potential(const Common& c, double rmax, long n) {
    const ModelParams p = params_of(c);
    if (!(rmax > 0.0)) throw UsageError("--rmax must be positive");
    if (n < 1) throw UsageError("--n must be >= 1");
    std::string text = "r,V\n";
    for (long i = 1; i <= n; ++i) {
        const double r = rmax * static_cast<double>(i) / static_cast<double>(n);
        text += format_number(r, c.precision) + "," + format_number(potential(p, r), c.precision) + "\n";
    }
    return text;
}

std::string cmd_wavefunction(const Common& c, double rmax, long n, const std::string& path_flag) {
    const ModelParams p = params_of(c);
    if (!(rmax > 0.0)) throw UsageError("--rmax must be positive");
    if (n < 2) throw UsageError("--n must be >= 2");
    Path path = default_path(p);
    if (path_flag == "closed") {
        if (!closed_form_supported(p.beta)) throw UsageError("--path closed requires 0 <= beta <= 1");
        path = Path::closed_form;
    } else if (path_flag == "quad") {
        path = Path::quadrature;
    }
    const GridSpec grid{0.0, rmax, n};
    const SampledFunction f = sample(p, grid, Quantity::modulating_function, path);
    std::string text = "r,f,chi\n";
    for (long i = 0; i < n; ++i) {
        const double r = grid[i];
        const double chi_value = r == 0.0 ? 0.0 : chi0(p.k, r) * f.values[i];
        text += format_number(r, c.precision) + "," + format_number(f.values[i], c.precision) + "," +
                format_number(chi_value, c.precision) + "\n";
    }
    return text;
}

json verify_report(const ModelParams& p, double rmax, double h, int precision, bool& passed) {
    // Residual of the radial equation on 2000 off-node points.
    const long n_res = 2000;
    const GridSpec res_grid{rmax / static_cast<double>(n_res), rmax, n_res};
    const SampledFunction residual = sample(p, res_grid, Quantity::residual, default_path(p));
    const auto near = near_node_mask(res_grid, p.k, node_guard(p.k));
    double residual_max = 0.0;
    for (long i = 0; i < n_res; ++i) {
        if (!near[i]) residual_max = std::max(residual_max, std::abs(residual.values[i]));
    }

    std::optional<double> closed_vs_quad;
    if (closed_form_supported(p.beta)) {
        ModulationEvaluator quadrature(p, Path::quadrature);
        double worst = 0.0;
        const long n_cmp = 200;
        for (long i = 1; i <= n_cmp; ++i) {
            const double r = rmax * static_cast<double>(i) / static_cast<double>(n_cmp);
            worst = std::max(worst, std::abs(modulation_integral_closed_form(p, r) - quadrature(r)));
        }
        closed_vs_quad = worst;
    }

    const long n_steps = std::lround(rmax / h);
    if (n_steps < 2) throw UsageError("--h too large for --rmax");
    const GridSpec grid{0.0, static_cast<double>(n_steps) * h, n_steps + 1};
    const ShootingResult shot = verify_eigenfunction(p, grid);

    passed = residual_max <= residual_threshold &&
             (!closed_vs_quad || *closed_vs_quad <= closed_vs_quad_threshold) &&
             shot.rel_l2_error <= numerov_threshold;

    json report;
    report["classification"] = classification_json(classify(p), precision);
    report["closedform_vs_quadrature_max"] = number_or_null(closed_vs_quad, precision);
    report["numerov_rel_l2_error"] = rounded(shot.rel_l2_error, precision);
    report["params"] = params_json(p, precision);
    report["passed"] = passed;
    report["residual_max"] = rounded(residual_max, precision);
    report["scale_factor"] = rounded(shot.scale_factor, precision);
    report["thresholds"] = {{"closedform_vs_quadrature_max", closed_vs_quad_threshold},
                            {"numerov_rel_l2_error", numerov_threshold},
                            {"residual_max", residual_threshold}};
    return report;
}

json classify_report(const ModelParams& p, bool with_fit, double rmax_flag, long n_flag, int precision) {
    const DecayClassification cls = classify(p);
    json report = classification_json(cls, precision);
    report["params"] = params_json(p, precision);
    if (!with_fit) return report;
    const FitGrid g = fit_grid(p.k, rmax_flag, n_flag);
    const auto outcome = fit_against_prediction(p, cls, g.rmax, g.n);
    if (!outcome) {
        report["fit"] = nullptr;
        return report;
    }
    const EnvelopeFit& fit = outcome->fit;
    report["fit"] = {{"fitted_c", number_or_null(fit.fitted_c, precision)},
                     {"fitted_p", number_or_null(fit.fitted_p, precision)},
                     {"fitted_q", number_or_null(fit.fitted_q, precision)},
                     {"model", to_string(fit.model)},
                     {"n_extrema", fit.n_extrema},
                     {"residual_rms", rounded(fit.residual_rms, precision)},
                     {"window", {rounded(fit.r_lo, precision), rounded(fit.r_hi, precision)}}};
    report["deviation"] = {{"c", number_or_null(outcome->dev_c, precision)},
                           {"p", number_or_null(outcome->dev_p, precision)},
                           {"q", number_or_null(outcome->dev_q, precision)}};
    report["fit_pass"] = outcome->pass;
    return report;
}

struct SweepRow {
    std::string text;
    std::string error;
};

std::string cmd_sweep(const Common& c, const std::vector<double>& a_list,
                      const std::vector<double>& beta_list, double rmax_flag, long n_flag,
                      int threads, bool& failed, std::ostream& err) {
    if (a_list.empty() || beta_list.empty()) throw UsageError("--a-list and --beta-list must be non-empty");
    std::vector<ModelParams> tuples;
    for (double a : a_list) {
        for (double beta : beta_list) {
            Common tuple = c;
            tuple.a = a;
            tuple.beta = beta;
            tuples.push_back(params_of(tuple));
        }
    }
    const FitGrid g = fit_grid(c.k, rmax_flag, n_flag);
    if (threads < 1) throw UsageError("--threads must be >= 1");

    const int prec = c.precision;
    std::vector<SweepRow> rows(tuples.size());
    auto work = [&](std::size_t i) {
        const ModelParams& p = tuples[i];
        try {
            const DecayClassification cls = classify(p);
            const auto fit = fit_against_prediction(p, cls, g.rmax, g.n);
            std::string line = format_number(p.a, prec) + "," + format_number(p.beta, prec) + "," +
                               to_string(cls.kind) + "," + (cls.normalizable ? "true" : "false") + "," +
                               csv_field(cls.exponent_p, prec) + "," + csv_field(cls.rate_c, prec) + "," +
                               csv_field(cls.power_q, prec) + ",";
            line += cls.finite_moments_up_to == all_moments ? std::string("all")
                                                            : std::to_string(cls.finite_moments_up_to);
            if (fit) {
                line += "," + csv_field(fit->fit.fitted_p, prec) + "," + csv_field(fit->fit.fitted_c, prec) +
                        "," + csv_field(fit->fit.fitted_q, prec) + "," +
                        format_number(fit->fit.residual_rms, prec) + "," + (fit->pass ? "true" : "false");
            } else {
                line += ",,,,,";
            }
            rows[i].text = line + "\n";
        } catch (const std::exception& e) {
            rows[i].error = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tuples.size(); i = next++) work(i);
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(threads), tuples.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string text =
        "a,beta,kind,normalizable,exponent_p,rate_c,power_q,finite_moments_up_to,"
        "fitted_p,fitted_c,fitted_q,fit_residual_rms,fit_pass\n";
    failed = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].error.empty()) {
            err << "sweep: a=" << tuples[i].a << " beta=" << tuples[i].beta << ": " << rows[i].error << "\n";
            failed = true;
        }
        text += rows[i].text;
    }
    return text;
}

}  // namespace

std::string format_number(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{
        "Generalized von Neumann-Wigner potentials with a bound state embedded in the continuum.\n"
        "All physics flags are in reduced units: 2m/hbar^2 = 1, E = k^2, V = 2mU/hbar^2."};
    app.require_subcommand(1);

    Common potential_opts, wave_opts, verify_opts, classify_opts, sweep_opts;
    double rmax = 60.0;
    long n = 1000;
    std::string path_flag = "auto";
    double h = 0.0;
    bool with_fit = false;
    double fit_rmax = 0.0;
    long fit_n = 0;
    std::vector<double> a_list{-0.5, -1.0, -3.0};
    std::vector<double> beta_list{0.0, 0.25, 0.5, 0.75, 1.0};
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto* pot = app.add_subcommand("potential", "tabulate V(r) on n points of (0, rmax] as CSV r,V");
    add_common(pot, potential_opts, false);
    pot->add_option("--rmax", rmax, "largest radius")->default_val(60.0);
    pot->add_option("--n", n, "number of rows")->default_val(1000);

    auto* wave = app.add_subcommand("wavefunction", "tabulate f(r) and chi(r) on [0, rmax] as CSV r,f,chi");
    add_common(wave, wave_opts, true);
    wave->add_option("--rmax", rmax, "largest radius")->default_val(60.0);
    wave->add_option("--n", n, "number of rows, including r = 0")->default_val(1000);
    wave->add_option("--path", path_flag, "modulation integral: closed, quad or auto")
        ->check(CLI::IsMember({"closed", "quad", "auto"}))
        ->default_val("auto");

    auto* verify = app.add_subcommand(
        "verify", "check the radial equation, closed form vs quadrature, and Numerov; JSON report");
    verify->set_help_flag("--help", "Print this help message and exit");
    add_common(verify, verify_opts, true);
    verify->add_option("--rmax", rmax, "largest radius")->default_val(60.0);
    verify->add_option("--h", h, "Numerov step (default 1e-3 * 2 pi / k)");

    auto* cls = app.add_subcommand("classify", "predicted decay law as JSON, optionally with an envelope fit");
    add_common(cls, classify_opts, true);
    cls->add_flag("--fit", with_fit, "fit the envelope of the analytic chi");
    cls->add_option("--rmax", fit_rmax, "fit range end (default 400 / k)");
    cls->add_option("--n", fit_n, "samples on [0, rmax] (default spacing 0.01 / k)");

    auto* sweep = app.add_subcommand("sweep", "classification and fit over an (a, beta) grid as CSV");
    sweep->add_option("--k", sweep_opts.k, "wavenumber of the embedded level")->default_val(1.0);
    sweep->add_option("--a-list", a_list, "comma-separated couplings")->delimiter(',');
    sweep->add_option("--beta-list", beta_list, "comma-separated decay exponents")->delimiter(',');
    sweep->add_option("--rmax", fit_rmax, "fit range end (default 400 / k)");
    sweep->add_option("--n", fit_n, "samples on [0, rmax] (default spacing 0.01 / k)");
    sweep->add_option("--threads", threads, "worker threads; output order does not depend on it");
    sweep->add_option("--precision", sweep_opts.precision, "significant digits")->default_val(12);
    sweep->add_option("--out", sweep_opts.out_path, "output file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (pot->parsed()) {
            emit(cmd_potential(potential_opts, rmax, n), potential_opts, out);
        } else if (wave->parsed()) {
            emit(cmd_wavefunction(wave_opts, rmax, n, path_flag), wave_opts, out);
        } else if (verify->parsed()) {
            const ModelParams p = params_of(verify_opts);
            if (!(rmax > 0.0)) throw UsageError("--rmax must be positive");
            if (verify->count("--h") > 0 && !(h > 0.0)) throw UsageError("--h must be positive");
            const double step = h > 0.0 ? h : 1e-3 * 2.0 * std::numbers::pi / p.k;
            bool passed = false;
            const json report = verify_report(p, rmax, step, verify_opts.precision, passed);
            emit(report.dump(2) + "\n", verify_opts, out);
            return passed ? exit_ok : exit_numeric_failure;
        } else if (cls->parsed()) {
            const ModelParams p = params_of(classify_opts);
            const json report = classify_report(p, with_fit, fit_rmax, fit_n, classify_opts.precision);
            emit(report.dump(2) + "\n", classify_opts, out);
        } else if (sweep->parsed()) {
            if (!(sweep_opts.k > 0.0)) throw UsageError("--k must be positive");
            bool failed = false;
            const std::string text =
                cmd_sweep(sweep_opts, a_list, beta_list, fit_rmax, fit_n, threads, failed, err);
            emit(text, sweep_opts, out);
            if (failed) return exit_numeric_failure;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return exit_numeric_failure;
    }
    return exit_ok;
}

}  // namespace vnw::cli
