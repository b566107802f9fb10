#pragma once

#include "grds/linalg.hpp"
#include "grds/rng.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace grds {

// Outcome of one randomized inequality audit. Each sample contributes a margin lhs - rhs for an
// inequality lhs <= rhs (or an error for an identity); a sample is a violation when its margin
// exceeds the audit's tolerance.
struct CheckResult {
    std::string name;
    std::string reference;
    long samples = 0;
    long violations = 0;
    double worst_margin = -std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    std::map<std::string, double> parameters;
    std::uint64_t seed = 0;

    void record(double margin);
    bool passed() const { return violations == 0; }
};

struct AuditConfig {
    long samples = 1000;
    std::vector<int> dims{4, 8, 12};

    // Constants under audit; the defaults are the proved values. Mutation runs lower them.
    double x_norm_bound = 1.0;
    double y_norm_bound = 1.5;
    double z_norm_bound = 20.0;
    double step_slack_scale = 1.0;

    double step_lambda = 1e-5;
    int step_dim = 8;

    int beta_inner = 1500;
    int beta_starts = 4;
    int beta_refine = 20;

    int movement_trajectories = 40;
    long movement_steps = 300;
    double movement_lambda = 1e-5;

    int third_order_triples = 100;
    double hamiltonian_lambda = 1.0 / 1024.0;
};

// Individual audits. Each draws only from the stream it is given.
CheckResult audit_group_law(const AuditConfig& cfg, Stream& s);
CheckResult audit_gauge_invariance(const AuditConfig& cfg, Stream& s);
CheckResult audit_rank_preservation(const AuditConfig& cfg, Stream& s);
CheckResult audit_complement_action(const AuditConfig& cfg, Stream& s);
CheckResult audit_pair_consistency(const AuditConfig& cfg, Stream& s);
CheckResult audit_norm_helpers(const AuditConfig& cfg, Stream& s);
CheckResult audit_contraction_norm(const AuditConfig& cfg, Stream& s);
CheckResult audit_contraction_trace(const AuditConfig& cfg, Stream& s);
CheckResult audit_contraction_d(const AuditConfig& cfg, Stream& s);
CheckResult audit_subdivision(const AuditConfig& cfg, Stream& s);
CheckResult audit_expansion_bounds(const AuditConfig& cfg, Stream& s);
CheckResult audit_expansion_ranks(const AuditConfig& cfg, Stream& s);
CheckResult audit_vector_expansion(const AuditConfig& cfg, Stream& s);
CheckResult audit_vector_contraction(const AuditConfig& cfg, Stream& s);
CheckResult audit_vector_deterministic(const AuditConfig& cfg, Stream& s);
CheckResult audit_vector_ladder(const AuditConfig& cfg, Stream& s);
CheckResult audit_allowed_movements(const AuditConfig& cfg, Stream& s);
CheckResult audit_step_estimate(const AuditConfig& cfg, Stream& s);
CheckResult audit_third_order(const AuditConfig& cfg, Stream& s);
CheckResult audit_third_order_convergence(const AuditConfig& cfg, Stream& s);
CheckResult audit_beta_toeplitz(const AuditConfig& cfg, Stream& s);
CheckResult audit_beta_haar(const AuditConfig& cfg, Stream& s);
CheckResult audit_beta_monotone(const AuditConfig& cfg, Stream& s);

// Helpers shared with the tests.

// Invertible T with singular values in [e^{-spread}, e^{spread}].
cmat random_invertible(int dim, double spread, Stream& s);

// Random descending kappa ladder with kappa_L = 1 and random partition (la, lb, lc >= 1).
struct RandomStabilityDraw {
    std::vector<double> kappa;
    int la = 0, lb = 0, lc = 0;
};
RandomStabilityDraw random_stability(int dim, Stream& s);

// Lowest-gap Hermitian triple: H0 with E0 = 0 and other eigenvalues in [0.5, 2], randomly rotated;
// H1, H2 random Hermitian with norm <= 1.
struct HamiltonianTriple {
    cmat h0, h1, h2;
};
HamiltonianTriple random_hamiltonian_triple(int dim, Stream& s);

// Lexicographically smallest cut sequence A = I_0 < ... < I_F = B whose steps f < F satisfy
// kappa_{I_{f-1}}^2 - kappa_{I_f}^2 >= (1 - phi)/F (kappa_A^2 - kappa_B^2) with I_f <= B - F + f,
// found by enumerating every increasing sequence.
std::vector<int> exhaustive_subdivision(const std::vector<double>& kappa, int a, int b, int f, double phi);

}  // namespace grds
