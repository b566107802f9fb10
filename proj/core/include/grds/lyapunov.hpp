#pragma once

#include "grds/ensembles.hpp"
#include "grds/rng.hpp"

#include <optional>
#include <vector>

namespace grds {

struct LyapunovEstimate {
    int q = 0;
    double partial_sum = 0.0;  // sum_{w <= q} gamma_w, nats per step
    long samples = 0;          // N
    double standard_error = 0.0;
    std::optional<double> bound_lower;  // q * lower bound of the lower-bound theorem
    std::optional<double> bound_upper;
    std::vector<double> batch_means;
};

struct LyapunovOptions {
    int q_max = 1;
    long steps = 10000;
    long burn_in = 1000;
    int batches = 20;
    int replicas = 1;   // > 1: independent trajectories on substreams, errors from replica spread
    unsigned threads = 1;
};

// One L x q_max frame is propagated and re-orthonormalized each step; the partial sums for all
// q <= q_max are read off the logarithms of the triangular factor's diagonal.
// The frame starts on the most expanding directions of the diagonal part.
std::vector<LyapunovEstimate> estimate_partial_sums(const ModelSpec& model, const LyapunovOptions& opt, Stream& s);

struct StepEstimateReport {
    long samples = 0;
    long violations = 0;
    double worst_margin = 0.0;  // max over draws of rhs - lhs; positive is a violation
};

// Per-step estimate: log det(Phi*(e^{lP}R)* e^{lP}R Phi) >= 2[q log k_{Lb+Lc} + d(Q) log(k_L / k_{Lb+Lc})]
//   + l e^{3 l^2 / 4} tr((P + P*)(R.Q)) - 3 l^2 q * slack_scale, on random (Q, P) with Q of rank model.q.
// slack_scale = 0 removes the second-order slack (mutation test).
// first_row / rows optionally restrict Q to a sub-block of rows.
// adversarial = true replaces half of the ensemble draws by P = phi psi* + c psi phi* with phi in the
// range of Q, psi orthogonal to it inside the row window and c in [-1, 0]; ||P|| = 1. Such P make the
// second-order term of the expansion negative, which is where the slack is needed.
struct StepEstimateOptions {
    long samples = 10000;
    double slack_scale = 1.0;
    int first_row = 0;
    int rows = -1;  // -1: all rows
    bool adversarial = false;
};
StepEstimateReport verify_step_estimate(const ModelSpec& model, const StepEstimateOptions& opt, Stream& s);

// One-sided evaluation for a given (Phi, P): returns rhs - lhs.
double step_estimate_gap(const ModelSpec& model, const cmat& phi, const cmat& p, double slack_scale = 1.0);

struct ReflectionResult {
    int q = 0;
    double gamma_q = 0.0;
    double gamma_reflected = 0.0;  // gamma'_{L - q + 1} of the adjoint-inverse model
    double discrepancy = 0.0;      // |gamma_q + gamma'_{L-q+1}|
    double combined_se = 0.0;
};

// Forward model and adjoint-inverse model on the same seed and the same draws of P.
ReflectionResult reflection_check(const ModelSpec& model, int q, long steps, long burn_in, Stream& s, int batches = 20);

struct LyapunovBounds {
    double lower = 0.0;  // per-exponent average of the q largest
    double upper = 0.0;  // per-exponent average of the q smallest
};

LyapunovBounds evaluate_bounds(const ModelSpec& model);

}  // namespace grds
