#include "grds/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace grds {

bool all_finite(const cmat& a) {
    return a.allFinite();
}

double operator_norm(const cmat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<cmat> svd(a);
    return svd.singularValues()(0);
}

cmat hermitian_part(const cmat& a) {
    return 0.5 * (a + a.adjoint());
}

cmat matrix_exponential(const cmat& a, double accuracy_target) {
    if (a.rows() != a.cols()) throw linalg_error("matrix_exponential: non-square input");
    if (!all_finite(a)) throw linalg_error("matrix_exponential: non-finite entries");
    if (!(accuracy_target > 0.0) || accuracy_target >= 1.0)
        throw std::invalid_argument("matrix_exponential: accuracy_target must lie in (0, 1)");
    if (a.size() == 0) return a;
    const double l1 = a.cwiseAbs().colwise().sum().maxCoeff();
    const double linf = a.cwiseAbs().rowwise().sum().maxCoeff();
    if (std::sqrt(l1 * linf) > 64.0 && operator_norm(a) > 64.0)
        throw linalg_error("matrix_exponential: norm exceeds 64");
    return a.exp();
}

ThinQR thin_qr(const cmat& m) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    ThinQR out;
    if (cols == 0) {
        out.q = cmat(rows, 0);
        out.r = cmat(0, 0);
        return out;
    }
    if (cols > rows) throw linalg_error("thin_qr: more columns than rows");
    Eigen::HouseholderQR<cmat> qr(m);
    out.q = qr.householderQ() * cmat::Identity(rows, cols);
    out.r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < cols; ++i) {
        const cplx d = out.r(i, i);
        const double mag = std::abs(d);
        if (mag == 0.0) continue;
        const cplx phase = d / mag;
        out.q.col(i) *= phase;
        out.r.row(i) *= std::conj(phase);
        out.r(i, i) = mag;
    }
    return out;
}

cmat thin_orthonormalize(const cmat& m) {
    if (!all_finite(m)) throw linalg_error("thin_orthonormalize: non-finite entries");
    if (m.cols() == 0) return cmat(m.rows(), 0);
    if (m.cols() > m.rows()) throw linalg_error("thin_orthonormalize: more columns than rows");
    Eigen::JacobiSVD<cmat> svd(m);
    const rvec& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 1e-12 * smax)) {
        std::ostringstream msg;
        msg << "thin_orthonormalize: rank deficient input, smallest singular value " << smin
            << " vs largest " << smax;
        throw linalg_error(msg.str());
    }
    return thin_qr(m).q;
}

HermitianEig hermitian_eig(const cmat& a) {
    if (a.rows() != a.cols()) throw linalg_error("hermitian_eig: non-square input");
    if (!all_finite(a)) throw linalg_error("hermitian_eig: non-finite entries");
    const double asym = (a - a.adjoint()).norm();
    const double scale = a.norm();
    if (asym > 1e-10 * scale) {
        std::ostringstream msg;
        msg << "hermitian_eig: input not Hermitian (asymmetry " << asym << ")";
        throw linalg_error(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitian_part(a));
    if (es.info() != Eigen::Success) throw linalg_error("hermitian_eig: eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

double smallest_eigenvalue(const cmat& a) {
    if (a.rows() != a.cols()) throw linalg_error("smallest_eigenvalue: non-square input");
    const double asym = (a - a.adjoint()).norm();
    if (asym > 1e-10 * a.norm()) throw linalg_error("smallest_eigenvalue: input not Hermitian");
    Eigen::SelfAdjointEigenSolver<cmat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

int numerical_rank(const cmat& a, double rel_threshold) {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0))
        throw std::invalid_argument("numerical_rank: rel_threshold must lie in (0, 1)");
    if (!all_finite(a)) throw linalg_error("numerical_rank: non-finite entries");
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<cmat> svd(a);
    const rvec& sv = svd.singularValues();
    if (sv(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_threshold * sv(0)) ++rank;
    return rank;
}

double log_det_hpd(const cmat& a) {
    Eigen::LLT<cmat> llt(hermitian_part(a));
    if (llt.info() != Eigen::Success) throw linalg_error("log_det_hpd: matrix not positive definite");
    const cmat& l = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i).real());
    return 2.0 * s;
}

}  // namespace grds
