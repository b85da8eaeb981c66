#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "gruschin/config.hpp"
#include "gruschin/coupling.hpp"
#include "gruschin/harnack.hpp"
#include "gruschin/moments.hpp"
#include "gruschin/sde.hpp"
#include "gruschin/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gruschin;

namespace {

struct CliState {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<int> steps;
    bool qmc = false;
    bool quiet = false;
    std::optional<unsigned> threads;
};

ExperimentConfig load_with_overrides(const CliState& st) {
    if (st.config_path.empty()) throw ConfigError("config: --config PATH is required");
    ExperimentConfig cfg = load_config(st.config_path);
    if (st.seed) {
        cfg.run.seed = *st.seed;
        cfg.resolved["run"]["seed"] = *st.seed;
    }
    if (st.paths) {
        cfg.run.n_paths = *st.paths;
        cfg.resolved["run"]["n_paths"] = *st.paths;
    }
    if (st.steps) {
        if (*st.steps < 16 || *st.steps % 2 != 0)
            throw ConfigError("run.n_steps: override must be even and >= 16");
        cfg.run.n_steps = *st.steps;
        cfg.resolved["run"]["n_steps"] = *st.steps;
    }
    if (st.qmc) {
        cfg.run.qmc = true;
        cfg.resolved["run"]["qmc"] = true;
    }
    if (st.threads) {
        cfg.run.threads = *st.threads;
        cfg.resolved["run"]["threads"] = *st.threads;
    }
    return cfg;
}

json report_skeleton(const char* command, const ExperimentConfig& cfg) {
    return json{{"command", command}, {"version", kVersion}, {"config", cfg.resolved}};
}

std::string out_path(const CliState& st, const std::string& name) {
    fs::create_directories(st.out_dir);
    return (fs::path(st.out_dir) / name).string();
}

void say(const CliState& st, const std::string& msg) {
    if (!st.quiet) std::cout << msg << "\n";
}

const BernsteinFunction& require_phi(const std::optional<BernsteinFunction>& phi,
                                     const char* name) {
    if (!phi) throw ConfigError(std::string(name) + ": required for this subcommand");
    return *phi;
}

int run_sample_subordinator(const CliState& st, const std::string& which) {
    ExperimentConfig cfg = load_with_overrides(st);
    const BernsteinFunction& phi = which == "phi2" ? require_phi(cfg.phi2, "phi2")
                                                   : require_phi(cfg.phi1, "phi1");
    StreamFactory streams(cfg.run.seed);
    std::string csv = out_path(st, "subordinator_paths.csv");
    std::ofstream out(csv);
    out << "path_id,t,S\n";
    out.precision(17);
    for (std::size_t p = 0; p < cfg.run.n_paths; ++p) {
        Rng rng = streams.stream(p);
        SubordinatorPath path = sample_path(phi, cfg.run.T, cfg.run.n_steps, rng);
        for (std::size_t i = 0; i < path.t.size(); ++i)
            out << p << "," << path.t[i] << "," << path.s[i] << "\n";
    }
    json rep = report_skeleton("sample-subordinator", cfg);
    rep["which"] = which;
    rep["csv"] = csv;
    write_json_report(out_path(st, "sample_subordinator_report.json"), rep);
    say(st, "wrote " + csv);
    return 0;
}

int run_simulate(const CliState& st) {
    ExperimentConfig cfg = load_with_overrides(st);
    GruschinModel model = cfg.build_model();
    const BernsteinFunction& phi1 = require_phi(cfg.phi1, "phi1");
    const BernsteinFunction& phi2 = require_phi(cfg.phi2, "phi2");
    StreamFactory streams(cfg.run.seed);
    std::string csv = out_path(st, "paths.csv");
    std::ofstream out(csv);
    out << "path_id,t";
    for (int j = 0; j < model.m(); ++j) out << ",x1_" << j;
    for (int j = 0; j < model.d(); ++j) out << ",x2_" << j;
    out << "\n";
    out.precision(17);
    for (std::size_t p = 0; p < cfg.run.n_paths; ++p) {
        Rng rng = streams.stream(p);
        SdePath path = simulate_subordinated(model, cfg.x, phi1, phi2, cfg.run.T,
                                             cfg.run.n_steps, rng);
        for (std::size_t i = 0; i < path.t.size(); ++i) {
            out << p << "," << path.t[i];
            for (int j = 0; j < model.m(); ++j) out << "," << path.x1[i][j];
            for (int j = 0; j < model.d(); ++j) out << "," << path.x2[i][j];
            out << "\n";
        }
    }
    json rep = report_skeleton("simulate", cfg);
    rep["csv"] = csv;
    write_json_report(out_path(st, "simulate_report.json"), rep);
    say(st, "wrote " + csv);
    return 0;
}

int run_couple(const CliState& st) {
    ExperimentConfig cfg = load_with_overrides(st);
    GruschinModel model = cfg.build_model();
    const BernsteinFunction& phi1 = require_phi(cfg.phi1, "phi1");
    const BernsteinFunction& phi2 = require_phi(cfg.phi2, "phi2");
    StreamFactory streams(cfg.run.seed);
    CouplingOptions copts;
    copts.eps_floor = cfg.run.eps_floor;
    CouplingEstimate est = entropy_estimate_subordinated(
        model, cfg.x, cfg.y, phi1, phi2, cfg.run.T, cfg.run.n_paths, cfg.run.n_steps, streams,
        cfg.run.threads, copts);
    json rep = report_skeleton("couple", cfg);
    rep["entropy"] = est.entropy.mean;
    rep["std_error"] = est.entropy.std_error;
    rep["er_mean"] = est.er.mean;
    rep["er_std_error"] = est.er.std_error;
    rep["tau1_max"] = est.tau1_max;
    rep["tau2_max"] = est.tau2_max;
    rep["clip_count"] = est.clip_count;
    rep["uncoupled_second"] = est.n_uncoupled_second;
    rep["top_mass_share"] = est.top_mass_share;
    rep["heavy_tail_warning"] = est.heavy_tail_warning;
    write_json_report(out_path(st, "couple_report.json"), rep);
    say(st, "entropy = " + std::to_string(est.entropy.mean) + " +- " +
                std::to_string(est.entropy.std_error));
    if (est.heavy_tail_warning)
        std::cerr << "warning: top 1% of coupling weights carries "
                  << est.top_mass_share * 100.0 << "% of the mass\n";
    return 0;
}

json harnack_report_to_json(const HarnackReport& r) {
    json terms = {{"term_w1", estimate_to_json(r.terms.term_w1)},
                  {"term_l", estimate_to_json(r.terms.term_l)},
                  {"term_lw1", estimate_to_json(r.terms.term_lw1)},
                  {"term_s2inv", estimate_to_json(r.terms.term_s2inv)},
                  {"term_ratio", estimate_to_json(r.terms.term_ratio)}};
    return json{{"T", r.T},
                {"x1", std::vector<double>(r.x.x1.begin(), r.x.x1.end())},
                {"x2", std::vector<double>(r.x.x2.begin(), r.x.x2.end())},
                {"y1", std::vector<double>(r.y.x1.begin(), r.y.x1.end())},
                {"y2", std::vector<double>(r.y.x2.begin(), r.y.x2.end())},
                {"f", {{"a", r.f_a}, {"w", r.f_w}}},
                {"lhs", estimate_to_json(r.lhs)},
                {"rhs_log", r.rhs_log},
                {"rhs_log_std_error", r.rhs_log_se},
                {"entropy", estimate_to_json(r.entropy)},
                {"bound_terms", terms},
                {"margin", r.margin},
                {"margin_std_error", r.margin_se},
                {"coupling_inequality_ok", r.coupling_inequality_ok},
                {"er_mean", r.coupling_diag.er.mean},
                {"tau1_max", r.coupling_diag.tau1_max},
                {"tau2_max", r.coupling_diag.tau2_max},
                {"clip_count", r.coupling_diag.clip_count}};
}

int run_harnack(const CliState& st) {
    ExperimentConfig cfg = load_with_overrides(st);
    GruschinModel model = cfg.build_model();
    const BernsteinFunction& phi1 = require_phi(cfg.phi1, "phi1");
    const BernsteinFunction& phi2 = require_phi(cfg.phi2, "phi2");
    StreamFactory streams(cfg.run.seed);
    HarnackOptions opts;
    opts.n_threads = cfg.run.threads;
    opts.qmc = cfg.run.qmc;
    opts.coupling.eps_floor = cfg.run.eps_floor;

    json rep = report_skeleton("harnack", cfg);
    bool falsified = false;

    const json sweep = cfg.resolved.value("sweep", json());
    if (sweep.is_object()) {
        std::vector<double> disps = sweep.value("displacements", std::vector<double>{0.1, 0.2, 0.4});
        std::vector<double> ts = sweep.value("Ts", std::vector<double>{0.5, 1.0, 2.0});
        if (disps.size() * ts.size() < 5)
            throw ConfigError("sweep: needs at least 5 distinct (x, y, T) combinations");
        Vector dir(cfg.m + cfg.d);
        Vector diff(cfg.m + cfg.d);
        diff.head(cfg.m) = cfg.y.x1 - cfg.x.x1;
        diff.tail(cfg.d) = cfg.y.x2 - cfg.x.x2;
        if (diff.norm() > 1e-12) {
            dir = diff / diff.norm();
        } else {
            dir.setZero();
            dir[0] = 1.0 / std::sqrt(2.0);
            dir[cfg.m] = 1.0 / std::sqrt(2.0);
        }
        std::vector<HarnackReport> reports;
        json items = json::array();
        std::uint64_t salt = 0;
        for (double T : ts) {
            for (double disp : disps) {
                StatePoint y;
                y.x1 = cfg.x.x1 + disp * dir.head(cfg.m);
                y.x2 = cfg.x.x2 + disp * dir.tail(cfg.d);
                BumpFunction f;
                f.a = cfg.f_a;
                f.w = cfg.f_w;
                f.z0 = Vector(cfg.m + cfg.d);
                f.z0.head(cfg.m) = y.x1;
                f.z0.tail(cfg.d) = y.x2;
                HarnackReport r =
                    evaluate_inequality(model, f, cfg.x, y, T, phi1, phi2, cfg.run.n_paths,
                                        cfg.run.n_steps, streams.fork(1000 + salt), opts);
                ++salt;
                falsified = falsified || !r.coupling_inequality_ok;
                items.push_back(harnack_report_to_json(r));
                reports.push_back(std::move(r));
            }
        }
        FitResult fit = fit_constant(reports);
        falsified = falsified || fit.falsified;
        rep["reports"] = items;
        rep["fitted_C"] = fit.fitted_c;
        rep["binding_report"] = fit.binding_index;
        if (fit.falsified) rep["falsification"] = fit.detail;
        say(st, "fitted_C = " + std::to_string(fit.fitted_c));
    } else {
        HarnackReport r = evaluate_inequality(model, cfg.build_f(), cfg.x, cfg.y, cfg.run.T,
                                              phi1, phi2, cfg.run.n_paths, cfg.run.n_steps,
                                              streams, opts);
        falsified = !r.coupling_inequality_ok;
        rep["report"] = harnack_report_to_json(r);
        say(st, "margin = " + std::to_string(r.margin) + " (+- " + std::to_string(r.margin_se) +
                    "), entropy = " + std::to_string(r.entropy.mean));
    }
    write_json_report(out_path(st, "harnack_report.json"), rep);
    if (falsified)
        throw FalsificationError("harnack: log-Harnack inequality violated beyond 3-SE slack");
    return 0;
}

int run_scaling_study(const CliState& st) {
    ExperimentConfig cfg = load_with_overrides(st);
    const json sc = cfg.resolved.value("scaling", json::object());
    ScalingConfig scfg;
    scfg.example_id = sc.value("example", "1.3");
    scfg.alpha = sc.value("alpha", 0.7);
    scfg.c1 = sc.value("c1", 1.0);
    scfg.beta = sc.value("beta", 0.5);
    scfg.c2 = sc.value("c2", 1.0);
    scfg.rho = sc.value("rho", 1.0);
    scfg.l = cfg.l;
    scfg.n_paths = sc.value("n_paths", cfg.run.n_paths);
    if (sc.contains("T_grid")) {
        scfg.T_grid = sc["T_grid"].get<std::vector<double>>();
    } else {
        scfg.T_grid = scfg.example_id == "1.3" ? std::vector<double>{0.5, 1.0, 2.0, 4.0}
                                               : std::vector<double>{0.01, 0.0215, 0.0464, 0.1};
    }
    StreamFactory streams(cfg.run.seed);
    ScalingReport report = scaling_study(scfg, streams, cfg.run.threads);

    std::string csv = out_path(st, "scaling_study.csv");
    std::ofstream out(csv);
    out << "term,T,estimate,std_error\n";
    out.precision(17);
    for (const ScalingTerm& term : report.terms)
        for (std::size_t i = 0; i < report.T_grid.size(); ++i)
            out << term.name << "," << report.T_grid[i] << "," << term.estimate[i] << ","
                << term.std_error[i] << "\n";

    json rep = report_skeleton("scaling-study", cfg);
    rep["example"] = report.example_id;
    rep["T_grid"] = report.T_grid;
    json terms = json::array();
    for (const ScalingTerm& term : report.terms) {
        json tj = {{"name", term.name},
                   {"slope", term.slope},
                   {"estimates", term.estimate},
                   {"std_errors", term.std_error}};
        if (term.has_prediction) tj["predicted_slope"] = term.predicted_slope;
        terms.push_back(tj);
        if (!st.quiet)
            std::cout << term.name << ": slope " << term.slope
                      << (term.has_prediction
                              ? " (predicted " + std::to_string(term.predicted_slope) + ")"
                              : "")
                      << "\n";
    }
    rep["terms"] = terms;
    rep["csv"] = csv;
    write_json_report(out_path(st, "scaling_report.json"), rep);
    return 0;
}

int run_moments(const CliState& st) {
    ExperimentConfig cfg = load_with_overrides(st);
    const json mo = cfg.resolved.value("moments", json::object());
    GaussianSpec spec;
    spec.dim = mo.value("m", 2);
    spec.variance = mo.value("variance", 1.0);
    double theta = mo.value("theta", 0.5);
    std::size_t n_pairs = mo.value("n_pairs", std::size_t{500000});
    std::vector<double> mu_grid = mo.value("mu_grid", std::vector<double>{0.0, 0.5, 1.0, 5.0, 50.0});

    StreamFactory streams(cfg.run.seed);
    json rep = report_skeleton("moments", cfg);
    rep["c_constant"] = c_constant(spec.dim, theta);
    json entries = json::array();
    std::uint64_t salt = 0;
    for (double mu_norm : mu_grid) {
        GaussianSpec s = spec;
        s.mu = Vector::Zero(spec.dim);
        s.mu[0] = mu_norm;
        GaussianMomentReport r =
            gaussian_negative_moment(s, theta, n_pairs, streams.fork(200 + salt), cfg.run.threads);
        ++salt;
        entries.push_back(json{{"mu_norm", mu_norm},
                               {"mc", estimate_to_json(r.mc)},
                               {"analytic_bound", r.analytic_bound},
                               {"exact_at_zero_mu", r.exact_at_zero_mu},
                               {"heavy_theta_warning", r.heavy_theta_warning},
                               {"n_used", r.n_used}});
        if (r.mc.mean > r.analytic_bound + 3.0 * r.mc.std_error)
            throw FalsificationError("moments: Gaussian negative-moment bound violated beyond 3 SE");
    }
    rep["theta"] = theta;
    rep["entries"] = entries;
    write_json_report(out_path(st, "moments_report.json"), rep);
    say(st, "c(m,theta) = " + std::to_string(c_constant(spec.dim, theta)));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for subordinated Gruschin-type SDE couplings"};
    app.require_subcommand(1);
    app.fallthrough();

    CliState st;
    app.add_option("--config", st.config_path, "JSON experiment config")->envname("GRUSCHIN_CONFIG");
    app.add_option("--seed", st.seed, "override run.seed");
    app.add_option("--paths", st.paths, "override run.n_paths");
    app.add_option("--steps", st.steps, "override run.n_steps");
    app.add_option("--out", st.out_dir, "output directory (default .)");
    app.add_option("--threads", st.threads, "worker threads (0 = hardware)");
    app.add_flag("--qmc", st.qmc, "drive Gaussian increments with randomized QMC");
    app.add_flag("--quiet", st.quiet, "suppress progress output");

    std::string which_phi = "phi1";
    CLI::App* sub_sample = app.add_subcommand("sample-subordinator", "sample clock paths to CSV");
    sub_sample->add_option("--which", which_phi, "phi1 | phi2");
    CLI::App* sub_sim = app.add_subcommand("simulate", "simulate subordinated SDE paths to CSV");
    CLI::App* sub_couple = app.add_subcommand("couple", "two-step coupling, entropy report");
    CLI::App* sub_harnack = app.add_subcommand("harnack", "log-Harnack inequality report");
    CLI::App* sub_scaling = app.add_subcommand("scaling-study", "bound-term scaling in T");
    CLI::App* sub_moments = app.add_subcommand("moments", "Gaussian negative-moment report");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sub_sample->parsed()) return run_sample_subordinator(st, which_phi);
        if (sub_sim->parsed()) return run_simulate(st);
        if (sub_couple->parsed()) return run_couple(st);
        if (sub_harnack->parsed()) return run_harnack(st);
        if (sub_scaling->parsed()) return run_scaling_study(st);
        if (sub_moments->parsed()) return run_moments(st);
    } catch (const FalsificationError& e) {
        std::cerr << "falsification: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
