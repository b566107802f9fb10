// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include "grds/grds.hpp"
#include "run_config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace grds;

namespace {

constexpr std::uint64_t seed = 42;

struct Outcome {
    bool pass = true;
    std::string detail;
};

unsigned workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string fmt_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// Runs the named audits and folds their violation counts into one outcome.
Outcome audits(const AuditConfig& audit, const std::vector<std::string>& names) {
    VerifyConfig cfg;
    cfg.audit = audit;
    cfg.checks = names;
    cfg.threads = workers();
    const Scorecard sc = run_all(cfg, seed);
    Outcome o;
    for (const CheckResult& r : sc.checks) {
        o.pass = o.pass && r.passed() && r.samples > 0;
        o.detail += r.name + " " + std::to_string(r.violations) + "/" + std::to_string(r.samples) + "; ";
    }
    return o;
}

Outcome action_algebra() {
    AuditConfig a;
    a.samples = 1000;
    a.dims = {4, 8, 12};
    return audits(a, {"grassmann.group_law", "grassmann.gauge_invariance", "grassmann.rank_preservation",
                      "grassmann.complement_action"});
}

Outcome expansion_certificates() {
    AuditConfig a;
    a.samples = 10000;
    a.dims = {4, 8, 12};
    return audits(a, {"expansion.bounds", "expansion.ranks"});
}

Outcome contraction_audits() {
    AuditConfig a;
    a.samples = 1000;
    a.dims = {4, 8, 12};
    return audits(a, {"contraction.norm", "contraction.trace", "contraction.d", "vector.contraction",
                      "vector.deterministic", "vector.ladder"});
}

Outcome subdivision() {
    AuditConfig a;
    a.samples = 1000;
    return audits(a, {"subdivision.greedy"});
}

Outcome beta_cross_check() {
    AuditConfig a;
    a.beta_inner = 4000;
    a.beta_starts = 8;
    a.beta_refine = 30;
    VerifyConfig cfg;
    cfg.audit = a;
    cfg.checks = std::vector<std::string>{"beta.haar_lower_bound", "beta.monotone", "beta.toeplitz_exact"};
    cfg.threads = workers();
    const Scorecard sc = run_all(cfg, seed);
    Outcome o;
    for (const CheckResult& r : sc.checks) o.pass = o.pass && r.passed() && r.samples > 0;
    const CheckResult* t = sc.find("beta.toeplitz_exact");
    o.detail = "toeplitz estimate " + fmt_double(t->parameters.at("estimate")) + " +- " +
               fmt_double(t->parameters.at("standard_error")) + " vs exact " + fmt_double(t->parameters.at("exact"));
    const CheckResult* h = sc.find("beta.haar_lower_bound");
    o.detail += "; haar q=1 " + fmt_double(h->parameters.at("estimate_q1")) + " >= " +
                fmt_double(h->parameters.at("bound_q1"));
    o.detail += "; monotone violations " + std::to_string(sc.find("beta.monotone")->violations);
    return o;
}

Outcome lyapunov_reflection() {
    Outcome o;
    const ToeplitzModel t = make_toeplitz_model(7, 3.0, OmegaLaw::uniform_pm1);
    {
        const ModelSpec m = make_model(t.kappa, 1, 4, 2, t.ensemble, 0.0, 2);
        LyapunovOptions opt;
        opt.q_max = 7;
        opt.steps = 1000;
        opt.burn_in = 100;
        Stream s(seed);
        const auto est = estimate_partial_sums(m, opt, s);
        double cum = 0.0, worst = 0.0;
        for (int q = 1; q <= 7; ++q) {
            cum += std::log(m.stability.k(q));
            worst = std::max(worst, std::abs(est[q - 1].partial_sum - cum));
        }
        o.pass = worst <= 1e-9;
        o.detail = "lambda=0 max deviation " + fmt_double(worst);
    }
    for (int q : {1, 2}) {
        const ModelSpec m = make_model(t.kappa, 1, 6 - q, q, t.ensemble, 1e-4, q);
        Stream s = Stream(seed).substream(static_cast<std::uint64_t>(q));
        const ReflectionResult r = reflection_check(m, q, 100000, 1000, s);
        const bool ok = r.discrepancy <= 3.0 * r.combined_se;
        o.pass = o.pass && ok;
        o.detail += "; q=" + std::to_string(q) + " |gamma+gamma'| " + fmt_double(r.discrepancy) + " vs 3se " +
                    fmt_double(3.0 * r.combined_se);
    }
    return o;
}

Outcome step_estimate() {
    AuditConfig a;
    a.samples = 10000;
    a.step_dim = 8;
    a.step_lambda = 1e-5;
    const Outcome clean = audits(a, {"lyapunov.step_estimate"});
    a.step_slack_scale = 0.0;
    VerifyConfig cfg;
    cfg.audit = a;
    cfg.checks = std::vector<std::string>{"lyapunov.step_estimate"};
    const long mutated = run_all(cfg, seed).total_violations();
    Outcome o;
    o.pass = clean.pass && mutated > 0;
    o.detail = clean.detail + "mutation (slack removed) violations " + std::to_string(mutated);
    return o;
}

Outcome concentration_surrogate() {
    const ToeplitzModel t = make_toeplitz_model(7, 3.0, OmegaLaw::uniform_pm1);
    const std::vector<double> lambdas{4e-3, 2e-3, 1e-3, 5e-4};
    std::vector<double> xs, ys;
    Outcome o;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double lam = lambdas[i];
        const ModelSpec m = make_model(t.kappa, 1, 5, 1, t.ensemble, lam, 1);
        const double beta = beta_exact(m)->value;
        const HypothesisReport h = check_hypotheses(m.stability, lam, 1, beta, "exact");
        const bool dominant = h.h1.pass && h.eta > 16.0 * lam;
        Stream s = Stream(seed).substream(i);
        const ExpectedD d = estimate_expected_d(m, unstable_initial_projection(m.stability, 1), 100000, 200, s, workers());
        xs.push_back(std::log(lam));
        ys.push_back(std::log(d.mean));
        if (dominant && d.mean > d.bound) o.pass = false;
        o.detail += "lambda " + fmt_double(lam) + ": mean " + fmt_double(d.mean) + (dominant ? " <= " : " (bound ") +
                    fmt_double(d.bound) + (dominant ? "" : " not applicable)") + "; ";
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    o.pass = o.pass && slope >= 1.6 && slope <= 2.4;
    o.detail += "slope " + fmt_double(slope);
    return o;
}

Outcome appendix_bound() {
    AuditConfig a;
    a.samples = 1000;
    a.hamiltonian_lambda = std::ldexp(1.0, -10);
    a.third_order_triples = 100;
    VerifyConfig cfg;
    cfg.audit = a;
    cfg.checks = std::vector<std::string>{"hamiltonian.convergence", "hamiltonian.third_order"};
    cfg.threads = workers();
    const Scorecard sc = run_all(cfg, seed);
    const CheckResult* bound = sc.find("hamiltonian.third_order");
    const CheckResult* conv = sc.find("hamiltonian.convergence");
    // The criterion asks for log2 ratios inside [2.5, 3.5] on every triple.
    const double in_window = conv->parameters.at("fraction_slope_in_2.5_3.5");
    Outcome o;
    o.pass = bound->passed() && bound->samples >= 1000 && conv->passed() && conv->samples >= 100 && in_window == 1.0;
    o.detail = "bound violations " + std::to_string(bound->violations) + "/" + std::to_string(bound->samples) +
               "; slopes in [2.5, 3.5]: " + std::to_string(std::lround(in_window * conv->samples)) + "/" +
               std::to_string(conv->samples) + ", below 2.5: " + std::to_string(conv->violations);
    return o;
}

Outcome determinism() {
    using namespace grds::cli;
    std::vector<std::pair<std::string, std::function<std::string(unsigned)>>> runs;
    runs.emplace_back("simulate", [](unsigned th) {
        SimulateConfig c;
        c.T = 5000;
        c.traj = 16;
        c.model.lambda = 1e-3;
        c.seed = seed;
        TrajectoryRecord path;
        std::ostringstream csv;
        const std::string out = dump(run_simulate(c, th, &path));
        write_trajectory_csv(csv, path);
        return out + csv.str();
    });
    runs.emplace_back("lyapunov", [](unsigned th) {
        LyapunovConfig c;
        c.T = 5000;
        c.replicas = 4;
        c.reflect = true;
        c.model.q = 2;
        c.model.lambda = 1e-2;
        c.seed = seed;
        return dump(run_lyapunov(c, th));
    });
    runs.emplace_back("beta", [](unsigned th) {
        BetaConfig c;
        c.model.L = 5;
        c.model.lc = 2;
        c.inner = 500;
        c.starts = 4;
        c.refine = 5;
        c.seed = seed;
        return dump(run_beta(c, th));
    });
    runs.emplace_back("check", [](unsigned) {
        CheckConfig c;
        c.beta = 0.5;
        return dump(run_check(c));
    });
    runs.emplace_back("verify", [](unsigned th) {
        VerifyRunConfig c;
        c.audit.samples = 200;
        c.seed = seed;
        return dump(run_verify(c, th));
    });
    runs.emplace_back("perturb", [](unsigned) {
        PerturbConfig c;
        c.seed = seed;
        return dump(run_perturb(c));
    });
    Outcome o;
    for (const auto& [name, run] : runs) {
        const std::string a = run(1), b = run(4), c = run(1);
        const bool same = a == b && a == c;
        o.pass = o.pass && same;
        o.detail += name + (same ? " identical; " : " DIFFERS; ");
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria{
        {1, "action algebra", 10.0, action_algebra},
        {2, "expansion certificates", 30.0, expansion_certificates},
        {3, "contraction audits", 30.0, contraction_audits},
        {4, "subdivision", 10.0, subdivision},
        {5, "beta cross-check", 60.0, beta_cross_check},
        {6, "Lyapunov exactness and reflection", 120.0, lyapunov_reflection},
        {7, "per-step estimate", 30.0, step_estimate},
        {8, "concentration scaling surrogate", 600.0, concentration_surrogate},
        {9, "Appendix A bound and convergence", 30.0, appendix_bound},
        {10, "determinism", 600.0, determinism},
    };
    int failed = 0;
    for (const auto& [id, title, budget, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= budget;
        const bool pass = o.pass && in_time;
        if (!pass) ++failed;
        std::printf("criterion %2d %s: %s [%.1f s of %.0f s] %s\n", id, pass ? "PASS" : "FAIL", title.c_str(), secs,
                    budget, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
