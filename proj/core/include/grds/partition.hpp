#pragma once

#include "grds/linalg.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grds {

// kappa_1 >= ... >= kappa_L > 0 with L = la + lb + lc. Stability index I (1 = most stable)
// lives in matrix row L - I (0-based), so R = diag(kappa_L, ..., kappa_1).
struct StabilitySpec {
    rvec kappa;
    int la = 0;
    int lb = 0;
    int lc = 0;

    int dim() const { return static_cast<int>(kappa.size()); }
    double k(int index) const { return kappa(index - 1); }
    int row(int index) const { return dim() - index; }
    rvec r_diagonal() const;
    cmat r_matrix() const;
    void validate() const;
};

StabilitySpec make_stability(const std::vector<double>& kappa, int la, int lb, int lc);

// eta(I, J) = 1 - kappa_J^2 / kappa_I^2 for I < J.
double relative_gap(const StabilitySpec& stability, int i, int j);
// Macroscopic gap eta(L_c, L_b + L_c).
double macroscopic_gap(const StabilitySpec& stability);

struct SubdivisionResult {
    std::vector<int> cuts;       // A = I_0 < ... < I_F = B
    std::vector<double> gaps;    // eta(I_{f-1}, I_f)
};

class subdivision_error : public std::invalid_argument {
public:
    subdivision_error(const std::string& what, int offending) : std::invalid_argument(what), offending_index(offending) {}
    int offending_index;
};

SubdivisionResult subdivide(const StabilitySpec& stability, int a, int b, int f, double phi);

// Selector frames. first_rows(L, k) = (1_k ; 0), last_rows(L, k) = (0 ; 1_k).
cmat first_rows(int dim, int k);
cmat last_rows(int dim, int k);

// Cut indices D = A_0 < A_1 < ... < A_{M+2} = E of the m-ladder.
struct Ladder {
    std::vector<int> cuts;

    int top_level() const { return static_cast<int>(cuts.size()) - 2; }  // M + 1
    double tau(const StabilitySpec& stability, int m) const;
    void validate(int dim) const;
};

enum class FrameKind { alpha, alpha_perp, gamma, gamma_perp, zeta, zeta_perp, chi, chi_perp };

FrameKind frame_kind_from_string(const std::string& s);
std::string to_string(FrameKind k);

// alpha/gamma frames come from the partition. zeta/chi use the ladder: with m < 0 they
// are the level frames (last D rows, first L - E rows); otherwise zeta_m is the last A_m rows
// and chi_m the first L - A_{m+1} rows.
cmat reference_frame(const StabilitySpec& stability, FrameKind kind, const Ladder* ladder = nullptr, int m = -1);

struct HypothesisVerdict {
    bool evaluated = false;
    bool pass = false;
    double margin = 0.0;  // lhs / rhs - 1 for inequalities lhs <= rhs; negative means satisfied
    std::string detail;
};

struct HypothesisReport {
    double lambda = 0.0;
    int q = 0;
    double beta = 0.0;
    std::string beta_provenance;
    double eta = 0.0;
    double theta = 0.0;
    bool theta_below_one = false;
    HypothesisVerdict h1, h2, h3, h4, h5, h5_middle;
    double t0 = 0.0;
    double theorem_bound = 0.0;

    bool all_pass() const;
};

HypothesisReport check_hypotheses(const StabilitySpec& stability, double lambda, int q, double beta,
                                  const std::string& beta_provenance = "supplied");
// Variant for a bare macroscopic gap; H5 is left unevaluated.
HypothesisReport check_hypotheses_eta(double eta, double lambda, int q, double beta,
                                      const std::string& beta_provenance = "supplied");

double theta_of(double lambda);
double theorem_bound(double eta, int q, double lambda);

}  // namespace grds
