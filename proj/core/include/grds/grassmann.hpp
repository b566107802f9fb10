#pragma once

#include "grds/linalg.hpp"

namespace grds {

struct StabilitySpec;

// A point of the Grassmannian G_{L,q}. The frame is stored; the L x L matrix is derived.
class Projection {
public:
    Projection() = default;

    // Any full-column-rank L x q matrix; its range defines the projection.
    static Projection from_frame(const cmat& m);
    // An isometry (Phi* Phi = 1 within 1e-10), stored as given.
    static Projection from_isometry(cmat phi);
    // A Hermitian idempotent matrix; invariants are checked with tolerance tol.
    static Projection from_matrix(const cmat& q, double tol = 1e-9);
    static Projection zero(Eigen::Index dim);

    Eigen::Index dim() const { return frame_.rows(); }
    Eigen::Index rank() const { return frame_.cols(); }
    const cmat& frame() const { return frame_; }
    cmat matrix() const { return frame_ * frame_.adjoint(); }

private:
    explicit Projection(cmat phi) : frame_(std::move(phi)) {}
    cmat frame_;
};

// (W, v) with W v = 0 and |v| = 1.
struct GrassmannPair {
    Projection w;
    cvec v;
};

void validate_pair(const GrassmannPair& p, double tol = 1e-9);

// Orthonormal frame of T . span(phi); phi must be an isometry.
cmat act_frame(const cmat& t, const cmat& phi);

Projection act_projection(const cmat& t, const Projection& q);
cvec act_vector(const cmat& t, const cvec& v);
GrassmannPair act_pair(const cmat& t, const GrassmannPair& p);

Projection complement_projection(const Projection& q);

// Projection onto span(Phi, v) for a pair, i.e. W + v v*.
Projection pair_sum(const GrassmannPair& p);

// d(Q) = tr(alpha^* Q alpha): mass of Q on the first L_a rows.
double observable_d(const Projection& q, const StabilitySpec& stability);

}  // namespace grds
