#pragma once

#include "grds/ensembles.hpp"
#include "grds/grassmann.hpp"
#include "grds/partition.hpp"
#include "grds/rng.hpp"

#include <optional>
#include <vector>

namespace grds {

// Classification of a pair (W, v) against the ladder of cones and anti-cones.
// Vectors are indexed by the ladder level m = 0, ..., M + 1.
struct RegionLabel {
    bool in_overwhelming = false;
    double trace = 0.0;                // tr[(zeta^perp)* W zeta^perp]
    std::vector<double> x2, z2;        // ||x_m(v)||^2, ||z_m(v)||^2
    std::vector<bool> cone, anticone;  // membership in C_m, A_m
    std::optional<int> cone_index;     // smallest m with (W, v) in C_m
    std::optional<int> anticone_index; // largest m with (W, v) in A_m
    std::vector<int> steps;            // m with (W, v) in S_m
    std::optional<int> interspace;     // m with (W, v) in I_{m + 1/2}

    bool in_step(int m) const;
    bool in_interspace(int m) const { return interspace && *interspace == m; }
};

struct TrajectoryRecord {
    std::vector<long> times;
    std::vector<double> d_values;
    std::vector<double> norm_a;    // ||alpha* Q alpha||
    std::vector<double> norm_gup;  // ||(gamma^perp)* Q gamma^perp||
    std::vector<RegionLabel> labels;
};

// Q_0 onto the q most unstable directions (first q rows) or the q most stable ones (last q rows).
Projection unstable_initial_projection(const StabilitySpec& stability, int q);
Projection stable_initial_projection(const StabilitySpec& stability, int q);

double block_norm_a(const cmat& frame, const StabilitySpec& stability);
double block_norm_gamma_perp(const cmat& frame, const StabilitySpec& stability);

TrajectoryRecord simulate_projection(const ModelSpec& model, const Projection& q0, long steps, long record_every,
                                     Stream& s);

struct ExpectedD {
    double mean = 0.0;
    double half_width = 0.0;  // normal-approximation 95% half-width
    double std_dev = 0.0;
    double bound = 0.0;       // 10 eta^{-1} q lambda^2
    int n_traj = 0;
    long horizon = 0;
    std::vector<double> finals;  // d(Q_T) per trajectory, in trajectory order
};

// Trajectory k draws from s.substream(k); results do not depend on the worker count.
ExpectedD estimate_expected_d(const ModelSpec& model, const Projection& q0, long horizon, int n_traj, Stream& s,
                              unsigned threads = 1);

double overwhelming_threshold(double beta, double eta, double lambda);

struct LadderParams {
    double sigma = 0.0;
    double tau = 0.0;
    Ladder ladder;
    double overwhelming = 0.0;  // threshold on tr[(zeta^perp)* W zeta^perp]

    // Checks sigma + (7/4) lambda + (2/sigma)(lambda/tau) < 1 and tau <= tau_m for all m.
    void validate(const StabilitySpec& stability, double lambda) const;
};

// sigma = 2^{-3/2}, tau = 2^4 lambda, overwhelming threshold from (beta, eta, theta, lambda).
LadderParams default_ladder_params(const StabilitySpec& stability, const Ladder& ladder, double lambda, double beta);

RegionLabel classify_pair(const GrassmannPair& p, const StabilitySpec& stability, const LadderParams& lp, double lambda);

// Statements 1-5 of the allowed-movements lemma for one step before -> after.
// Returns one (statement, m) entry per violated implication.
struct MovementViolation {
    int statement = 0;
    int level = 0;
};
std::vector<MovementViolation> movement_violations(const RegionLabel& before, const RegionLabel& after,
                                                   const LadderParams& lp, const StabilitySpec& stability);

struct PairTrajectory {
    TrajectoryRecord record;  // statistics of W + v v*, with region labels
    long audited_steps = 0;   // steps starting and ending in the overwhelming region
    long violations = 0;
    std::vector<std::pair<long, MovementViolation>> violation_log;
    GrassmannPair final_state;
};

PairTrajectory simulate_pair(const ModelSpec& model, const GrassmannPair& p0, long steps, const LadderParams& lp,
                             Stream& s, long record_every = 1);

}  // namespace grds
