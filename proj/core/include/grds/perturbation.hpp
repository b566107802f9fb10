#pragma once

#include "grds/grassmann.hpp"
#include "grds/linalg.hpp"

#include <stdexcept>
#include <string>

namespace grds {

inline constexpr double expansion_lambda_max = 1.0 / 64.0;
// Relative singular-value threshold used for the rank certificates of the expansion differences.
// Z is a third-order residual, so its differences carry noise of size eps / lambda^3.
inline constexpr double expansion_rank_threshold = 1e-6;

// X(Q, P) = Q^perp P Q + Q P* Q^perp
cmat expansion_x(const cmat& q, const cmat& p);
// Y(Q, P) = Q^perp P Q P* Q^perp - Q P* Q^perp P Q + [Q^perp P (Q^perp - Q) P Q + Q P* (Q^perp - Q) P* Q^perp] / 2
cmat expansion_y(const cmat& q, const cmat& p);

struct ExpansionTriple {
    cmat x, y, z;
    double lambda = 0.0;
    // || Q + l X + l^2 Y + l^3 Z - e^{lP}.Q || with e^{lP}.Q evaluated in double precision.
    double reconstruction_error = 0.0;
};

// Z is the exact residual (e^{lP}.Q - Q - l X - l^2 Y) / l^3, formed in extended precision.
// Errors: lambda outside (0, 2^-6], ||P|| > 1, shape mismatch.
ExpansionTriple expansion_maps(const Projection& q, const cmat& p, double lambda);

struct ExpansionRankCertificate {
    int added_rank = 0;  // rk(Q')
    int rank_x = 0, rank_y = 0, rank_z = 0;
    bool holds() const { return rank_x <= 2 * added_rank && rank_y <= 3 * added_rank && rank_z <= 4 * added_rank; }
};

// Ranks of X(Q + Q', P) - X(Q, P) and the Y, Z analogues; Q' must be orthogonal to Q.
ExpansionRankCertificate expansion_rank_certificate(const Projection& q, const Projection& q_added, const cmat& p,
                                                    double lambda, double rel_threshold = expansion_rank_threshold);

struct VectorExpansionReport {
    double a = 0.0;                  // A_d(W, v, P)
    double change = 0.0;             // ||Psi* v'||^2 - ||Psi* v||^2
    double first_order_residual = 0.0;  // change - lambda A_d
    double change_bound = 0.0;       // (3/2) lambda
    double a_bound = 0.0;            // sqrt(2)
    double residual_bound = 0.0;     // 9 lambda^2 + 160 lambda^3
    bool change_ok = true, a_ok = true, residual_ok = true;
    bool holds() const { return change_ok && a_ok && residual_ok; }
};

// v' = [(e^{lP}.W)^perp e^{lP}] o v, A_d = tr(Psi* [X(W + vv*, P) - X(W, P)] Psi).
VectorExpansionReport vector_expansion_a(const GrassmannPair& p, const cmat& pert, const cmat& psi, double lambda);

class eig_perturbation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EigPerturbationReport {
    double e0 = 0.0;               // lowest eigenvalue of H0
    double e0_exact = 0.0;         // lowest eigenvalue of H0 + l H1 + l^2 H2
    double e0_second_order = 0.0;
    double residual = 0.0;         // (e0_exact - e0_second_order) / l^3, from extended-precision values
    double bound = 0.0;
    double gap_big = 0.0;          // G
    double gap_small = 0.0;        // g
    double lambda = 0.0;
    bool holds() const { return std::abs(residual) <= bound; }
};

// Errors: non-Hermitian or mismatched inputs, lambda <= 0, degenerate lowest eigenvalue of H0 or H,
// and failure of the separation conditions (G/2 > g, |E0 - E_k^(l)| >= G - g).
EigPerturbationReport eig_perturb(const cmat& h0, const cmat& h1, const cmat& h2, double lambda);

// Rotate each column so its largest-magnitude entry is real and positive.
void pin_phases(cmat& vectors);

}  // namespace grds
