#include "run_config.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace grds;
using namespace grds::cli;

namespace {

struct Common {
    std::string config_path;
    std::string out_path;
    bool emit_config = false;
    unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c, std::uint64_t* seed) {
    sub->add_option("--config", c.config_path, "JSON config file; its fields override the flags");
    sub->add_option("--out", c.out_path, "Write the JSON result here instead of stdout");
    sub->add_flag("--emit-config", c.emit_config, "Print the resolved config as JSON and exit");
    sub->add_option("--threads", c.threads, "Worker cap (0 = hardware); results do not depend on it");
    if (seed) sub->add_option("--seed", *seed, "Seed of every random draw");
}

void add_model(CLI::App* sub, ModelConfig& m) {
    sub->add_option("--model", m.model, "toeplitz, iid, haar or zero");
    sub->add_option("--L", m.L, "Dimension L");
    sub->add_option("--s", m.s, "Toeplitz shift s, or top ratio kappa_1 / kappa_L for the default ladder");
    sub->add_option("--kappa", m.kappa, "kappa_1, ..., kappa_L (descending)")->delimiter(',');
    sub->add_option("--La", m.la, "Rows of the unstable block alpha");
    sub->add_option("--Lc", m.lc, "Rows of the stable block gamma (0 = q)");
    sub->add_option("--lambda", m.lambda, "Coupling lambda");
    sub->add_option("--q", m.q, "Rank q");
    sub->add_option("--omega-law", m.omega_law, "Toeplitz omega law: uniform_pm1, bernoulli_pm1, uniform_interval");
    sub->add_option("--omega-param", m.omega_param, "Toeplitz omega parameter");
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Applies --config over the flag values, then either emits the resolved config or runs.
template <class Config, class Parse, class Run>
int dispatch(const Common& common, Config cfg, Parse parse, Run run) {
    if (!common.config_path.empty()) cfg = parse(read_json_file(common.config_path), cfg);
    else cfg = parse(json::object(), cfg);
    if (common.emit_config) {
        write_text(common.out_path, dump(to_json(cfg)));
        return 0;
    }
    return run(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grds: random dynamics on Grassmannians, Lyapunov spectra and proof audits"};
    app.require_subcommand(1);

    Common common;

    SimulateConfig sim;
    std::string csv_path;
    CLI::App* c_sim = app.add_subcommand("simulate", "Estimate E d(Q_T) and compare with the concentration bound");
    add_model(c_sim, sim.model);
    add_common(c_sim, common, &sim.seed);
    c_sim->add_option("--T", sim.T, "Horizon T");
    c_sim->add_option("--traj", sim.traj, "Number of trajectories");
    c_sim->add_option("--init", sim.init, "Initial projection: unstable or stable");
    c_sim->add_option("--every", sim.record_every, "CSV record stride");
    c_sim->add_option("--csv", csv_path, "Write the time series of trajectory 0 as CSV");

    LyapunovConfig lya;
    CLI::App* c_lya = app.add_subcommand("lyapunov", "Partial sums of Lyapunov exponents");
    add_model(c_lya, lya.model);
    add_common(c_lya, common, &lya.seed);
    c_lya->add_option("--T", lya.T, "Number of steps N");
    c_lya->add_option("--burn-in", lya.burn_in, "Discarded initial steps");
    c_lya->add_option("--batches", lya.batches, "Batches for the standard error");
    c_lya->add_option("--replicas", lya.replicas, "Independent replicas");
    c_lya->add_flag("--reflect", lya.reflect, "Also run the adjoint-inverse reflection check");

    BetaConfig bet;
    CLI::App* c_beta = app.add_subcommand("beta", "Coupling constant beta: exact value where known and Monte-Carlo estimate");
    add_model(c_beta, bet.model);
    add_common(c_beta, common, &bet.seed);
    c_beta->add_option("--inner", bet.inner, "Inner Monte-Carlo samples");
    c_beta->add_option("--starts", bet.starts, "Random starts of the search");
    c_beta->add_option("--refine", bet.refine, "Refinement iterations per start");
    c_beta->add_flag("--dual", bet.dual, "Use the dual form of the infimum");

    CheckConfig chk;
    CLI::App* c_chk = app.add_subcommand("check", "Hypothesis verdicts and margins");
    add_model(c_chk, chk.model);
    add_common(c_chk, common, nullptr);
    c_chk->add_option("--beta", chk.beta, "Coupling constant beta");
    c_chk->add_option("--eta", chk.eta, "Macroscopic gap; overrides the gap of the model");

    VerifyRunConfig ver;
    std::vector<std::string> checks;
    CLI::App* c_ver = app.add_subcommand("verify", "Run the inequality audits and print the scorecard");
    add_common(c_ver, common, &ver.seed);
    c_ver->add_option("--samples", ver.audit.samples, "Samples per audit");
    c_ver->add_option("--dims", ver.audit.dims, "Dimensions cycled through by the audits")->delimiter(',');
    c_ver->add_option("--checks", checks, "Comma-separated subset of checks")->delimiter(',');
    c_ver->add_option("--y-norm-bound", ver.audit.y_norm_bound, "Audited bound on ||Y||");
    bool list_checks = false;
    c_ver->add_flag("--list", list_checks, "List the available checks and exit");

    PerturbConfig per;
    CLI::App* c_per = app.add_subcommand("perturb", "Third-order eigenvalue perturbation bound");
    add_common(c_per, common, &per.seed);
    c_per->add_option("--L", per.L, "Dimension of the random triple");
    c_per->add_option("--lambda", per.lambda, "Coupling lambda");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_sim->parsed()) {
            return dispatch(common, sim, [](const json& j, SimulateConfig c) { return parse_simulate(j, c); },
                            [&](const SimulateConfig& c) {
                                TrajectoryRecord path;
                                const json out = run_simulate(c, common.threads, csv_path.empty() ? nullptr : &path);
                                write_text(common.out_path, dump(out));
                                if (!csv_path.empty()) {
                                    std::ostringstream os;
                                    write_trajectory_csv(os, path);
                                    write_text(csv_path, os.str());
                                }
                                const json& r = out["result"];
                                fmt::print(stderr, "mean d(Q_T) = {:.6e} +- {:.2e}   bound 10 q lambda^2 / eta = {:.6e}   {}\n",
                                           r["mean"].get<double>(), r["half_width"].get<double>(),
                                           r["bound"].get<double>(),
                                           r["within_bound"].get<bool>() ? "within bound" : "above bound");
                                return 0;
                            });
        }
        if (c_lya->parsed()) {
            return dispatch(common, lya, [](const json& j, LyapunovConfig c) { return parse_lyapunov(j, c); },
                            [&](const LyapunovConfig& c) {
                                const json out = run_lyapunov(c, common.threads);
                                write_text(common.out_path, dump(out));
                                for (const json& e : out["result"]["partial_sums"])
                                    fmt::print(stderr, "q = {}: sum gamma = {:.8f} +- {:.2e}  (sum log kappa = {:.8f})\n",
                                               e["q"].get<int>(), e["partial_sum"].get<double>(),
                                               e["standard_error"].get<double>(), e["sum_log_kappa"].get<double>());
                                return 0;
                            });
        }
        if (c_beta->parsed()) {
            return dispatch(common, bet, [](const json& j, BetaConfig c) { return parse_beta(j, c); },
                            [&](const BetaConfig& c) {
                                const json out = run_beta(c, common.threads);
                                write_text(common.out_path, dump(out));
                                const json& r = out["result"];
                                fmt::print(stderr, "beta estimate = {:.6f} +- {:.2e}\n",
                                           r["estimate"]["value"].get<double>(),
                                           r["estimate"]["standard_error"].get<double>());
                                if (!r["exact"].is_null())
                                    fmt::print(stderr, "{} = {:.6f} ({})\n",
                                               r["exact"]["lower_bound"].get<bool>() ? "lower bound" : "exact",
                                               r["exact"]["value"].get<double>(), r["exact"]["formula"].get<std::string>());
                                return 0;
                            });
        }
        if (c_chk->parsed()) {
            return dispatch(common, chk, [](const json& j, CheckConfig c) { return parse_check(j, c); },
                            [&](const CheckConfig& c) {
                                const json out = run_check(c);
                                write_text(common.out_path, dump(out));
                                for (const char* h : {"H1", "H2", "H3", "H4", "H5"}) {
                                    const json& v = out["result"][h];
                                    if (!v["evaluated"].get<bool>()) {
                                        fmt::print(stderr, "{}: not evaluated\n", h);
                                        continue;
                                    }
                                    fmt::print(stderr, "{}: {}  margin {:.3e}  ({})\n", h,
                                               v["pass"].get<bool>() ? "pass" : "FAIL", v["margin"].get<double>(),
                                               v["detail"].get<std::string>());
                                }
                                return 0;
                            });
        }
        if (c_ver->parsed()) {
            if (list_checks) {
                for (const CheckInfo& info : check_registry()) fmt::print("{}  [{}]\n", info.name, info.reference);
                return 0;
            }
            if (!checks.empty()) ver.checks = checks;
            return dispatch(common, ver, [](const json& j, VerifyRunConfig c) { return parse_verify(j, c); },
                            [&](const VerifyRunConfig& c) {
                                bool passed = false;
                                const json out = run_verify(c, common.threads, &passed);
                                write_text(common.out_path, dump(out));
                                for (const json& ch : out["result"]["checks"])
                                    fmt::print(stderr, "{:<32} {:>7} samples {:>5} violations\n",
                                               ch["name"].get<std::string>(), ch["samples"].get<long>(),
                                               ch["violations"].get<long>());
                                return passed ? 0 : 1;
                            });
        }
        if (c_per->parsed()) {
            return dispatch(common, per, [](const json& j, PerturbConfig c) { return parse_perturb(j, c); },
                            [&](const PerturbConfig& c) {
                                const json out = run_perturb(c);
                                write_text(common.out_path, dump(out));
                                const json& r = out["result"];
                                fmt::print(stderr, "|E^(lambda)| = {:.6e}  bound = {:.6e}  {}\n",
                                           std::abs(r["residual"].get<double>()), r["bound"].get<double>(),
                                           r["holds"].get<bool>() ? "holds" : "VIOLATED");
                                return r["holds"].get<bool>() ? 0 : 1;
                            });
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 2;
}
