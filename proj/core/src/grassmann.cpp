#include "grds/grassmann.hpp"

#include "grds/partition.hpp"

#include <cmath>
#include <sstream>

namespace grds {

Projection Projection::from_frame(const cmat& m) {
    return Projection(thin_orthonormalize(m));
}

Projection Projection::from_isometry(cmat phi) {
    const Eigen::Index q = phi.cols();
    if (q > 0) {
        const double err = (phi.adjoint() * phi - cmat::Identity(q, q)).norm();
        if (err > 1e-10) {
            std::ostringstream msg;
            msg << "Projection::from_isometry: frame not orthonormal (error " << err << ")";
            throw linalg_error(msg.str());
        }
    }
    return Projection(std::move(phi));
}

Projection Projection::from_matrix(const cmat& q, double tol) {
    if (q.rows() != q.cols()) throw linalg_error("Projection::from_matrix: non-square input");
    if ((q * q - q).norm() > tol) throw linalg_error("Projection::from_matrix: not idempotent");
    if ((q - q.adjoint()).norm() > tol) throw linalg_error("Projection::from_matrix: not Hermitian");
    const double tr = q.trace().real();
    const long rank = std::lround(tr);
    if (std::abs(tr - static_cast<double>(rank)) > tol)
        throw linalg_error("Projection::from_matrix: trace is not an integer");
    HermitianEig eig = hermitian_eig(q);
    return Projection(thin_qr(eig.vectors.rightCols(rank)).q);
}

Projection Projection::zero(Eigen::Index dim) {
    return Projection(cmat(dim, 0));
}

void validate_pair(const GrassmannPair& p, double tol) {
    if (p.v.size() != p.w.dim()) throw linalg_error("GrassmannPair: dimension mismatch");
    if (std::abs(p.v.norm() - 1.0) > 1e-12) throw linalg_error("GrassmannPair: v is not a unit vector");
    if (p.w.rank() > 0 && (p.w.frame().adjoint() * p.v).norm() > tol)
        throw linalg_error("GrassmannPair: W v != 0");
}

cmat act_frame(const cmat& t, const cmat& phi) {
    if (t.rows() != t.cols() || t.cols() != phi.rows())
        throw linalg_error("act_projection: dimension mismatch");
    const Eigen::Index q = phi.cols();
    if (q == 0) return cmat(t.rows(), 0);
    const cmat tphi = t * phi;
    const cmat gram = tphi.adjoint() * tphi;
    Eigen::LLT<cmat> llt(gram);
    if (llt.info() != Eigen::Success) {
        Eigen::JacobiSVD<cmat> svd(t);
        const rvec& sv = svd.singularValues();
        std::ostringstream msg;
        msg << "act_projection: Gram matrix not positive definite (condition number of T "
            << sv(0) / sv(sv.size() - 1) << ")";
        throw linalg_error(msg.str());
    }
    // T Phi L^{-*} is an isometry spanning T . Q.
    cmat frame = llt.matrixU().solve<Eigen::OnTheRight>(tphi);
    return thin_qr(frame).q;
}

Projection act_projection(const cmat& t, const Projection& q) {
    return Projection::from_isometry(act_frame(t, q.frame()));
}

cvec act_vector(const cmat& t, const cvec& v) {
    if (t.cols() != v.size()) throw linalg_error("act_vector: dimension mismatch");
    cvec tv = t * v;
    const double n = tv.norm();
    if (n < 1e-14) throw linalg_error("act_vector: |Tv| below 1e-14, T is not invertible");
    return tv / n;
}

GrassmannPair act_pair(const cmat& t, const GrassmannPair& p) {
    cmat ups = act_frame(t, p.w.frame());
    cvec u = t * p.v;
    for (int pass = 0; pass < 2 && ups.cols() > 0; ++pass) u -= ups * (ups.adjoint() * u);
    const double n = u.norm();
    if (n < 1e-14) throw linalg_error("act_pair: |(T.W)^perp T v| below 1e-14");
    return {Projection::from_isometry(std::move(ups)), u / n};
}

Projection complement_projection(const Projection& q) {
    const Eigen::Index n = q.dim();
    const Eigen::Index k = q.rank();
    if (k == 0) return Projection::from_isometry(cmat::Identity(n, n));
    if (k == n) return Projection::zero(n);
    Eigen::HouseholderQR<cmat> qr(q.frame());
    cmat full = qr.householderQ() * cmat::Identity(n, n);
    return Projection::from_isometry(full.rightCols(n - k));
}

Projection pair_sum(const GrassmannPair& p) {
    cmat phi(p.w.dim(), p.w.rank() + 1);
    phi.leftCols(p.w.rank()) = p.w.frame();
    phi.col(p.w.rank()) = p.v;
    return Projection::from_isometry(thin_qr(phi).q);
}

double observable_d(const Projection& q, const StabilitySpec& stability) {
    if (q.dim() != stability.dim()) throw linalg_error("observable_d: incompatible dimensions");
    if (q.rank() > stability.lb + stability.lc) throw linalg_error("observable_d: rank exceeds L_b + L_c");
    return q.frame().topRows(stability.la).squaredNorm();
}

}  // namespace grds
