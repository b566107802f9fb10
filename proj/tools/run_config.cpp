#include "run_config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace grds::cli {

namespace {

// Reads fields of one config object, remembering which keys were used so that unknown keys
// (typically typos) can be reported by name.
class Reader {
public:
    Reader(const json& j, std::string context) : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw std::invalid_argument("config '" + context_ + "': expected a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("config field '" + name(key) + "': " + e.what());
        }
    }

    void get(const char* key, std::optional<double>& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        double v = 0.0;
        get(key, v);
        out = v;
    }

    void get(const char* key, std::optional<cmat>& out) {
        if (!j_.contains(key)) return;
        seen_.insert(key);
        if (j_.at(key).is_null()) {
            out.reset();
            return;
        }
        try {
            out = cmat_from_json(j_.at(key));
        } catch (const std::exception& e) {
            throw std::invalid_argument("config field '" + name(key) + "': " + e.what());
        }
    }

    const json* object(const char* key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    std::string name(const char* key) const { return context_.empty() ? key : context_ + "." + key; }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key())) throw std::invalid_argument("config: unknown field '" + name(item.key().c_str()) + "'");
    }

    void require(bool ok, const char* key, const std::string& what) const {
        if (!ok) throw std::invalid_argument("config field '" + name(key) + "': " + what);
    }

private:
    const json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

json envelope(const char* command, json config, json result) {
    return {{"schema_version", schema_version}, {"command", command}, {"config", std::move(config)},
            {"result", std::move(result)}};
}

json optional_matrix(const std::optional<cmat>& m) {
    return m ? to_json(*m) : json(nullptr);
}

bool gap_dominant(double eta, double lambda) {
    return eta > 0.0 && eta > 16.0 * lambda;
}

}  // namespace

json to_json(const ModelConfig& c) {
    return {{"model", c.model}, {"L", c.L},         {"s", c.s},           {"kappa", c.kappa},
            {"la", c.la},       {"lc", c.lc},       {"lambda", c.lambda}, {"q", c.q},
            {"omega_law", c.omega_law},             {"omega_param", c.omega_param}};
}

json to_json(const SimulateConfig& c) {
    return {{"model", to_json(c.model)}, {"T", c.T}, {"traj", c.traj}, {"init", c.init},
            {"record_every", c.record_every}, {"seed", c.seed}};
}

json to_json(const LyapunovConfig& c) {
    return {{"model", to_json(c.model)}, {"T", c.T}, {"burn_in", c.burn_in}, {"batches", c.batches},
            {"replicas", c.replicas}, {"reflect", c.reflect}, {"seed", c.seed}};
}

json to_json(const BetaConfig& c) {
    return {{"model", to_json(c.model)}, {"inner", c.inner}, {"starts", c.starts},
            {"refine", c.refine}, {"dual", c.dual}, {"seed", c.seed}};
}

json to_json(const CheckConfig& c) {
    return {{"model", to_json(c.model)}, {"beta", c.beta}, {"eta", c.eta ? json(*c.eta) : json(nullptr)}};
}

json to_json(const VerifyRunConfig& c) {
    return {{"audit", to_json(c.audit)}, {"checks", c.checks ? json(*c.checks) : json(nullptr)}, {"seed", c.seed}};
}

json to_json(const PerturbConfig& c) {
    return {{"L", c.L}, {"lambda", c.lambda}, {"h0", optional_matrix(c.h0)}, {"h1", optional_matrix(c.h1)},
            {"h2", optional_matrix(c.h2)}, {"seed", c.seed}};
}

ModelConfig parse_model(const json& j, ModelConfig c) {
    Reader r(j, "model");
    r.get("model", c.model);
    r.get("L", c.L);
    r.get("s", c.s);
    r.get("kappa", c.kappa);
    r.get("la", c.la);
    r.get("lc", c.lc);
    r.get("lambda", c.lambda);
    r.get("q", c.q);
    r.get("omega_law", c.omega_law);
    r.get("omega_param", c.omega_param);
    r.finish();
    r.require(c.model == "toeplitz" || c.model == "iid" || c.model == "haar" || c.model == "zero", "model",
              "expected one of toeplitz, iid, haar, zero");
    r.require(c.L >= 3, "L", "must be at least 3");
    r.require(c.q >= 1 && c.q <= c.L, "q", "must lie in [1, L]");
    r.require(c.la >= 1, "la", "must be at least 1");
    r.require(c.lc >= 0, "lc", "must be >= 0 (0 means lc = q)");
    r.require(c.lambda >= 0.0 && std::isfinite(c.lambda), "lambda", "must be finite and >= 0");
    r.require(c.kappa.empty() || static_cast<int>(c.kappa.size()) == c.L, "kappa", "needs exactly L entries");
    return c;
}

namespace {

void read_model(Reader& r, ModelConfig& m) {
    if (const json* mj = r.object("model")) m = parse_model(*mj, m);
}

}  // namespace

SimulateConfig parse_simulate(const json& j, SimulateConfig c) {
    Reader r(j, "");
    read_model(r, c.model);
    r.get("T", c.T);
    r.get("traj", c.traj);
    r.get("init", c.init);
    r.get("record_every", c.record_every);
    r.get("seed", c.seed);
    r.finish();
    r.require(c.T >= 0, "T", "must be >= 0");
    r.require(c.traj >= 2, "traj", "must be at least 2");
    r.require(c.init == "unstable" || c.init == "stable", "init", "expected unstable or stable");
    r.require(c.record_every >= 1, "record_every", "must be at least 1");
    return c;
}

LyapunovConfig parse_lyapunov(const json& j, LyapunovConfig c) {
    Reader r(j, "");
    read_model(r, c.model);
    r.get("T", c.T);
    r.get("burn_in", c.burn_in);
    r.get("batches", c.batches);
    r.get("replicas", c.replicas);
    r.get("reflect", c.reflect);
    r.get("seed", c.seed);
    r.finish();
    r.require(c.T >= 1, "T", "must be at least 1");
    r.require(c.burn_in >= 0, "burn_in", "must be >= 0");
    r.require(c.batches >= 2, "batches", "must be at least 2");
    r.require(c.replicas >= 1, "replicas", "must be at least 1");
    return c;
}

BetaConfig parse_beta(const json& j, BetaConfig c) {
    Reader r(j, "");
    read_model(r, c.model);
    r.get("inner", c.inner);
    r.get("starts", c.starts);
    r.get("refine", c.refine);
    r.get("dual", c.dual);
    r.get("seed", c.seed);
    r.finish();
    r.require(c.inner >= 100, "inner", "must be at least 100");
    r.require(c.starts >= 1, "starts", "must be at least 1");
    r.require(c.refine >= 0, "refine", "must be >= 0");
    return c;
}

CheckConfig parse_check(const json& j, CheckConfig c) {
    Reader r(j, "");
    read_model(r, c.model);
    r.get("beta", c.beta);
    r.get("eta", c.eta);
    r.finish();
    r.require(c.beta >= 0.0, "beta", "must be >= 0");
    r.require(!c.eta || (*c.eta >= 0.0 && *c.eta <= 1.0), "eta", "must lie in [0, 1]");
    return c;
}

VerifyRunConfig parse_verify(const json& j, VerifyRunConfig c) {
    Reader r(j, "");
    if (const json* aj = r.object("audit")) {
        if (!aj->is_object()) throw std::invalid_argument("config 'audit': expected a JSON object");
        json merged = to_json(c.audit);
        for (const auto& item : aj->items()) {
            if (!merged.contains(item.key()))
                throw std::invalid_argument("config: unknown field 'audit." + item.key() + "'");
            merged[item.key()] = item.value();
        }
        c.audit = audit_config_from_json(merged);
    }
    if (const json* cj = r.object("checks")) {
        if (cj->is_null()) {
            c.checks.reset();
        } else {
            try {
                c.checks = cj->get<std::vector<std::string>>();
            } catch (const json::exception& e) {
                throw std::invalid_argument(std::string("config field 'checks': ") + e.what());
            }
        }
    }
    r.get("seed", c.seed);
    r.finish();
    return c;
}

PerturbConfig parse_perturb(const json& j, PerturbConfig c) {
    Reader r(j, "");
    r.get("L", c.L);
    r.get("lambda", c.lambda);
    r.get("h0", c.h0);
    r.get("h1", c.h1);
    r.get("h2", c.h2);
    r.get("seed", c.seed);
    r.finish();
    r.require(c.L >= 2, "L", "must be at least 2");
    r.require(c.lambda > 0.0, "lambda", "must be positive");
    const int given = (c.h0 ? 1 : 0) + (c.h1 ? 1 : 0) + (c.h2 ? 1 : 0);
    r.require(given == 0 || given == 3, "h0", "give all of h0, h1, h2 or none");
    return c;
}

ModelSpec build_model(const ModelConfig& c) {
    std::vector<double> kappa = c.kappa;
    Ensemble ens;
    if (c.model == "toeplitz") {
        ToeplitzModel t = make_toeplitz_model(c.L, c.s, omega_law_from_string(c.omega_law), c.omega_param);
        if (kappa.empty()) kappa = t.kappa;
        ens = std::move(t.ensemble);
    } else {
        if (kappa.empty()) {
            if (!(c.s > 1.0)) throw std::invalid_argument("config field 'model.s': must exceed 1 for the default kappa");
            kappa.resize(c.L);
            for (int i = 1; i <= c.L; ++i) kappa[i - 1] = std::pow(c.s, static_cast<double>(c.L - i) / (c.L - 1));
        }
        if (c.model == "iid") ens = make_iid_ensemble(c.L);
        else if (c.model == "haar") ens = make_haar_ensemble(c.L);
        else ens = make_zero_ensemble(c.L);
    }
    const int lc = c.lc == 0 ? c.q : c.lc;
    const int lb = c.L - c.la - lc;
    if (lb < 1)
        throw std::invalid_argument("config fields 'model.la'/'model.lc': la + lc must leave at least one row for lb");
    return make_model(kappa, c.la, lb, lc, std::move(ens), c.lambda, c.q);
}

json run_simulate(const SimulateConfig& c, unsigned threads, TrajectoryRecord* sample_path) {
    const ModelSpec model = build_model(c.model);
    const Projection q0 = c.init == "stable" ? stable_initial_projection(model.stability, model.q)
                                              : unstable_initial_projection(model.stability, model.q);
    Stream master(c.seed);
    ExpectedD d = estimate_expected_d(model, q0, c.T, c.traj, master, threads);
    if (sample_path) {
        Stream first = master.substream(0);
        *sample_path = simulate_projection(model, q0, c.T, c.record_every, first);
    }
    const double eta = macroscopic_gap(model.stability);
    json result = to_json(d);
    result["eta"] = eta;
    result["gap_dominant"] = gap_dominant(eta, model.lambda);
    result["within_bound"] = d.mean <= d.bound;
    return envelope("simulate", to_json(c), std::move(result));
}

json run_lyapunov(const LyapunovConfig& c, unsigned threads) {
    const ModelSpec model = build_model(c.model);
    LyapunovOptions opt;
    opt.q_max = model.q;
    opt.steps = c.T;
    opt.burn_in = c.burn_in;
    opt.batches = c.batches;
    opt.replicas = c.replicas;
    opt.threads = threads;
    Stream master(c.seed);
    Stream run = master.substream(0);
    const std::vector<LyapunovEstimate> est = estimate_partial_sums(model, opt, run);
    json sums = json::array();
    double log_kappa = 0.0;
    for (const LyapunovEstimate& e : est) {
        log_kappa += std::log(model.stability.k(e.q));
        json je = to_json(e);
        je["sum_log_kappa"] = log_kappa;
        sums.push_back(std::move(je));
    }
    json result{{"partial_sums", sums}, {"bounds", to_json(evaluate_bounds(model))}, {"units", "nats per step"}};
    if (c.reflect) {
        json refl = json::array();
        for (int q = 1; q <= model.q; ++q) {
            Stream rs = master.substream(1 + static_cast<std::uint64_t>(q));
            refl.push_back(to_json(reflection_check(model, q, c.T, c.burn_in, rs, c.batches)));
        }
        result["reflection"] = refl;
    }
    return envelope("lyapunov", to_json(c), std::move(result));
}

json run_beta(const BetaConfig& c, unsigned threads) {
    const ModelSpec model = build_model(c.model);
    BetaOptions opt;
    opt.n_inner = c.inner;
    opt.n_starts = c.starts;
    opt.refine_iters = c.refine;
    opt.threads = threads;
    Stream s(c.seed);
    const BetaEstimate est = c.dual ? beta_monte_carlo_dual(model, opt, s) : beta_monte_carlo(model, opt, s);
    const std::optional<BetaExact> exact = beta_exact(model);
    json result{{"estimate", to_json(est)}, {"exact", exact ? to_json(*exact) : json(nullptr)}};
    return envelope("beta", to_json(c), std::move(result));
}

json run_check(const CheckConfig& c) {
    HypothesisReport r;
    if (c.eta) {
        r = check_hypotheses_eta(*c.eta, c.model.lambda, c.model.q, c.beta);
    } else {
        const ModelSpec model = build_model(c.model);
        r = check_hypotheses(model.stability, model.lambda, model.q, c.beta);
    }
    json result = to_json(r);
    result["gap_dominant"] = r.h1.pass && gap_dominant(r.eta, r.lambda);
    return envelope("check", to_json(c), std::move(result));
}

json run_verify(const VerifyRunConfig& c, unsigned threads, bool* passed) {
    VerifyConfig vc;
    vc.audit = c.audit;
    vc.checks = c.checks;
    vc.threads = threads;
    const Scorecard card = run_all(vc, c.seed);
    if (passed) *passed = card.passed();
    return envelope("verify", to_json(c), to_json(card));
}

json run_perturb(const PerturbConfig& c) {
    HamiltonianTriple t;
    if (c.h0) {
        t.h0 = *c.h0;
        t.h1 = *c.h1;
        t.h2 = *c.h2;
    } else {
        Stream s(c.seed);
        t = random_hamiltonian_triple(c.L, s);
    }
    const EigPerturbationReport r = eig_perturb(t.h0, t.h1, t.h2, c.lambda);
    return envelope("perturb", to_json(c), to_json(r));
}

}  // namespace grds::cli
