#include "grds/verification.hpp"

#include "grds/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace grds {

const std::vector<CheckInfo>& check_registry() {
    static const std::vector<CheckInfo> registry = [] {
        std::vector<CheckInfo> r{
            {"beta.haar_lower_bound", "sec-toy-models", audit_beta_haar},
            {"beta.monotone", "rem-beta-monotone", audit_beta_monotone},
            {"beta.toeplitz_exact", "eq-beta-toy-model", audit_beta_toeplitz},
            {"contraction.d", "coro-d-contraction", audit_contraction_d},
            {"contraction.norm", "lemma-norm-contraction", audit_contraction_norm},
            {"contraction.trace", "lemma-trace-contraction", audit_contraction_trace},
            {"expansion.bounds", "lemma-expansion", audit_expansion_bounds},
            {"expansion.ranks", "ineq-expansion", audit_expansion_ranks},
            {"grassmann.complement_action", "lemma-complement-action", audit_complement_action},
            {"grassmann.gauge_invariance", "dyn-grassmanian", audit_gauge_invariance},
            {"grassmann.group_law", "def-action", audit_group_law},
            {"grassmann.pair_consistency", "lemma-auxiliary-action", audit_pair_consistency},
            {"grassmann.rank_preservation", "def-T", audit_rank_preservation},
            {"hamiltonian.convergence", "def-E-lambda", audit_third_order_convergence},
            {"hamiltonian.third_order", "lemma-Hamiltonian", audit_third_order},
            {"ladder.allowed_movements", "lemma-allowed-movements", audit_allowed_movements},
            {"lyapunov.step_estimate", "lemma-Lyapunov-estimate", audit_step_estimate},
            {"norm.helpers", "ineq-norm-1", audit_norm_helpers},
            {"subdivision.greedy", "lemma-subdivision", audit_subdivision},
            {"vector.contraction", "lemma-vector-contraction", audit_vector_contraction},
            {"vector.deterministic", "lemma-deterministic-vector", audit_vector_deterministic},
            {"vector.expansion", "lemma-vector-expansion", audit_vector_expansion},
            {"vector.ladder", "coro-ladder", audit_vector_ladder},
        };
        std::sort(r.begin(), r.end(), [](const CheckInfo& a, const CheckInfo& b) { return a.name < b.name; });
        return r;
    }();
    return registry;
}

long Scorecard::total_violations() const {
    long v = 0;
    for (const CheckResult& c : checks) v += c.violations;
    return v;
}

const CheckResult* Scorecard::find(const std::string& name) const {
    for (const CheckResult& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::uint64_t check_stream_id(const std::string& name) {
    // FNV-1a over the name, then mixed.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return mix64(h);
}

Scorecard run_all(const VerifyConfig& cfg, std::uint64_t seed) {
    const std::vector<CheckInfo>& reg = check_registry();
    std::vector<const CheckInfo*> selected;
    if (!cfg.checks) {
        for (const CheckInfo& c : reg) selected.push_back(&c);
    } else {
        for (const std::string& name : *cfg.checks) {
            auto it = std::find_if(reg.begin(), reg.end(), [&](const CheckInfo& c) { return c.name == name; });
            if (it == reg.end()) throw std::invalid_argument("run_all: unknown check '" + name + "'");
            if (std::find(selected.begin(), selected.end(), &*it) == selected.end()) selected.push_back(&*it);
        }
        std::sort(selected.begin(), selected.end(), [](const CheckInfo* a, const CheckInfo* b) { return a->name < b->name; });
    }
    if (cfg.audit.dims.empty()) throw std::invalid_argument("run_all: no dimensions configured");

    Scorecard card;
    card.seed = seed;
    card.checks.resize(selected.size());
    const Stream master(seed);
    parallel_for(selected.size(), cfg.threads, [&](std::size_t i) {
        const CheckInfo& info = *selected[i];
        Stream s = master.substream(check_stream_id(info.name));
        try {
            card.checks[i] = info.run(cfg.audit, s);
        } catch (const std::exception& e) {
            throw std::runtime_error("check " + info.name + " failed to run: " + e.what());
        }
        card.checks[i].seed = seed;
    });
    return card;
}

}  // namespace grds
