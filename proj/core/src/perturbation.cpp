#include "grds/perturbation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace grds {

namespace {

using lcplx = std::complex<long double>;
using lmat = Eigen::Matrix<lcplx, Eigen::Dynamic, Eigen::Dynamic>;

template <class M>
M x_map(const M& q, const M& p) {
    const M qp = M::Identity(q.rows(), q.cols()) - q;
    return qp * p * q + q * p.adjoint() * qp;
}

template <class M>
M y_map(const M& q, const M& p) {
    const M qp = M::Identity(q.rows(), q.cols()) - q;
    const M pa = p.adjoint();
    const M diff = qp - q;
    return qp * p * q * pa * qp - q * pa * qp * p * q + (qp * p * diff * p * q + q * pa * diff * pa * qp) * 0.5L;
}

// e^{lP}.Q as a projection matrix, in extended precision.
lmat acted_projection(const lmat& e, const lmat& phi) {
    const Eigen::Index n = e.rows();
    if (phi.cols() == 0) return lmat::Zero(n, n);
    const lmat psi = e * phi;
    Eigen::HouseholderQR<lmat> qr(psi);
    const lmat basis = qr.householderQ() * lmat::Identity(n, phi.cols());
    return basis * basis.adjoint();
}

template <class M>
void pin_phases_impl(M& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::Index i = 0;
        vectors.col(k).cwiseAbs().maxCoeff(&i);
        const auto c = vectors(i, k);
        if (std::abs(c) > 0) vectors.col(k) *= std::conj(c) / std::abs(c);
    }
}

struct ExtendedTriple {
    lmat x, y, z;
};

ExtendedTriple extended_triple(const cmat& frame, const cmat& p, double lambda) {
    const lmat phi = frame.cast<lcplx>();
    const lmat pl = p.cast<lcplx>();
    const lmat q = phi * phi.adjoint();
    const long double lam = lambda;
    const lmat e = (lam * pl).exp();
    ExtendedTriple t;
    t.x = x_map(q, pl);
    t.y = y_map(q, pl);
    t.z = (acted_projection(e, phi) - q - lam * t.x - lam * lam * t.y) / (lam * lam * lam);
    return t;
}

void check_expansion_inputs(const Projection& q, const cmat& p, double lambda) {
    if (p.rows() != q.dim() || p.cols() != q.dim()) throw std::invalid_argument("expansion_maps: P has the wrong shape");
    if (!(lambda > 0.0 && lambda <= expansion_lambda_max)) {
        std::ostringstream msg;
        msg << "expansion_maps: lambda = " << lambda << " outside (0, 2^-6]";
        throw std::invalid_argument(msg.str());
    }
    if (operator_norm(p) > 1.0 + 1e-12) throw std::invalid_argument("expansion_maps: ||P|| > 1");
}

}  // namespace

cmat expansion_x(const cmat& q, const cmat& p) {
    return x_map(q, p);
}

cmat expansion_y(const cmat& q, const cmat& p) {
    const cmat qp = cmat::Identity(q.rows(), q.cols()) - q;
    const cmat pa = p.adjoint();
    const cmat diff = qp - q;
    return qp * p * q * pa * qp - q * pa * qp * p * q + 0.5 * (qp * p * diff * p * q + q * pa * diff * pa * qp);
}

ExpansionTriple expansion_maps(const Projection& q, const cmat& p, double lambda) {
    check_expansion_inputs(q, p, lambda);
    const ExtendedTriple ext = extended_triple(q.frame(), p, lambda);
    ExpansionTriple t;
    t.lambda = lambda;
    t.x = ext.x.cast<cplx>();
    t.y = ext.y.cast<cplx>();
    t.z = ext.z.cast<cplx>();
    const cmat qm = q.matrix();
    const cmat acted = act_projection(matrix_exponential(lambda * p), q).matrix();
    const cmat rebuilt = qm + lambda * t.x + lambda * lambda * t.y + lambda * lambda * lambda * t.z;
    t.reconstruction_error = operator_norm(rebuilt - acted);
    return t;
}

ExpansionRankCertificate expansion_rank_certificate(const Projection& q, const Projection& q_added, const cmat& p,
                                                    double lambda, double rel_threshold) {
    check_expansion_inputs(q, p, lambda);
    if (q_added.dim() != q.dim()) throw std::invalid_argument("expansion_rank_certificate: dimension mismatch");
    if (q.rank() > 0 && q_added.rank() > 0 && (q.frame().adjoint() * q_added.frame()).norm() > 1e-10)
        throw std::invalid_argument("expansion_rank_certificate: Q Q' != 0");
    cmat joint(q.dim(), q.rank() + q_added.rank());
    joint << q.frame(), q_added.frame();
    const ExtendedTriple base = extended_triple(q.frame(), p, lambda);
    const ExtendedTriple sum = extended_triple(joint, p, lambda);
    ExpansionRankCertificate c;
    c.added_rank = static_cast<int>(q_added.rank());
    c.rank_x = numerical_rank((sum.x - base.x).cast<cplx>(), rel_threshold);
    c.rank_y = numerical_rank((sum.y - base.y).cast<cplx>(), rel_threshold);
    c.rank_z = numerical_rank((sum.z - base.z).cast<cplx>(), rel_threshold);
    return c;
}

VectorExpansionReport vector_expansion_a(const GrassmannPair& p, const cmat& pert, const cmat& psi, double lambda) {
    const Eigen::Index n = p.w.dim();
    if (p.v.size() != n || pert.rows() != n || pert.cols() != n || psi.rows() != n)
        throw std::invalid_argument("vector_expansion_a: dimension mismatch");
    if (!(lambda >= 0.0)) throw std::invalid_argument("vector_expansion_a: lambda must be >= 0");
    validate_pair(p);
    const cmat w = p.w.matrix();
    const cmat wv = w + p.v * p.v.adjoint();
    VectorExpansionReport r;
    const cmat dx = expansion_x(wv, pert) - expansion_x(w, pert);
    r.a = (psi.adjoint() * dx * psi).trace().real();
    const GrassmannPair moved = act_pair(matrix_exponential(lambda * pert), p);
    r.change = (psi.adjoint() * moved.v).squaredNorm() - (psi.adjoint() * p.v).squaredNorm();
    r.first_order_residual = r.change - lambda * r.a;
    r.change_bound = 1.5 * lambda;
    r.a_bound = std::sqrt(2.0);
    r.residual_bound = 9.0 * lambda * lambda + 160.0 * lambda * lambda * lambda;
    constexpr double tol = 1e-13;
    r.change_ok = std::abs(r.change) <= r.change_bound + tol;
    r.a_ok = std::abs(r.a) <= r.a_bound + tol;
    r.residual_ok = std::abs(r.first_order_residual) <= r.residual_bound + tol;
    return r;
}

void pin_phases(cmat& vectors) {
    pin_phases_impl(vectors);
}

EigPerturbationReport eig_perturb(const cmat& h0, const cmat& h1, const cmat& h2, double lambda) {
    const Eigen::Index n = h0.rows();
    if (n < 2 || h0.cols() != n || h1.rows() != n || h1.cols() != n || h2.rows() != n || h2.cols() != n)
        throw eig_perturbation_error("eig_perturb: H0, H1, H2 must be square of equal size >= 2");
    for (const cmat* h : {&h0, &h1, &h2}) {
        if ((*h - h->adjoint()).norm() > 1e-12 * std::max(1.0, h->norm()))
            throw eig_perturbation_error("eig_perturb: inputs must be Hermitian");
    }
    if (!(lambda > 0.0)) throw eig_perturbation_error("eig_perturb: lambda must be positive");

    // The residual is O(lambda^3), so the spectra and the second-order formula are evaluated in
    // extended precision to keep it above the rounding floor.
    const lmat l0 = hermitian_part(h0).cast<lcplx>();
    const lmat l1 = hermitian_part(h1).cast<lcplx>();
    const lmat l2 = hermitian_part(h2).cast<lcplx>();
    const long double lam = lambda;
    Eigen::SelfAdjointEigenSolver<lmat> base(l0);
    lmat vectors = base.eigenvectors();
    pin_phases_impl(vectors);
    const auto& e = base.eigenvalues();
    const lmat h = l0 + lam * l1 + lam * lam * l2;
    const Eigen::SelfAdjointEigenSolver<lmat> full(h, Eigen::EigenvaluesOnly);
    const auto& ef = full.eigenvalues();
    const double scale = std::max(1.0, operator_norm(h.cast<cplx>()));
    constexpr double degeneracy_tol = 1e-12;
    if (static_cast<double>(e(1) - e(0)) <= degeneracy_tol * scale)
        throw eig_perturbation_error("eig_perturb: lowest eigenvalue of H0 is degenerate");
    if (static_cast<double>(ef(1) - ef(0)) <= degeneracy_tol * scale)
        throw eig_perturbation_error("eig_perturb: lowest eigenvalue of H is degenerate");

    EigPerturbationReport r;
    r.lambda = lambda;
    r.e0 = static_cast<double>(e(0));
    r.e0_exact = static_cast<double>(ef(0));
    const long double gap_big = e(1) - e(0);
    const long double gap_small = std::abs(ef(0) - e(0));
    r.gap_big = static_cast<double>(gap_big);
    r.gap_small = static_cast<double>(gap_small);
    if (!(gap_big / 2 > gap_small)) {
        std::ostringstream msg;
        msg << "eig_perturb: gap condition fails, G/2 = " << r.gap_big / 2.0 << " <= g = " << r.gap_small;
        throw eig_perturbation_error(msg.str());
    }
    for (Eigen::Index k = 1; k < n; ++k) {
        if (std::abs(e(0) - ef(k)) < gap_big - gap_small) {
            std::ostringstream msg;
            msg << "eig_perturb: gap condition fails, |E0 - E" << k << "(lambda)| < G - g";
            throw eig_perturbation_error(msg.str());
        }
    }

    const auto psi0 = vectors.col(0);
    const auto h1psi0 = (l1 * psi0).eval();
    long double second = 0.0L;
    for (Eigen::Index k = 1; k < n; ++k) second += std::norm(vectors.col(k).dot(h1psi0)) / (e(k) - e(0));
    const long double l2sq = lam * lam;
    const long double e2 = e(0) + lam * psi0.dot(h1psi0).real() + l2sq * psi0.dot(l2 * psi0).real() - l2sq * second;
    r.e0_second_order = static_cast<double>(e2);
    r.residual = static_cast<double>((ef(0) - e2) / (l2sq * lam));

    const double n_h = operator_norm(h.cast<cplx>());
    const double n1 = operator_norm(h1);
    const double n2 = operator_norm(h2);
    const double gg = r.gap_big;
    const double res = 1.0 + 2.0 * n_h / (gg - 2.0 * r.gap_small);
    r.bound = (1.0 + 8.0 * lambda / (gg * gg) * res * (n1 + lambda * n2)) *
                  (2.0 / (gg * gg) * n1 * n1 * n1 + 2.0 / gg * n1 * n2) +
              4.0 * lambda / (gg * gg) * res * (n2 * n2 + 2.0 / gg * n1 * n1 * n2);
    return r;
}

}  // namespace grds
