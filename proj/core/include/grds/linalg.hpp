#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace grds {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

class linalg_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HermitianEig {
    rvec values;   // ascending
    cmat vectors;  // orthonormal columns
};

inline constexpr double default_rank_threshold = 1e-9;
inline constexpr double default_expm_accuracy = 1e-12;

bool all_finite(const cmat& a);

// Spectral norm (largest singular value).
double operator_norm(const cmat& a);

// Hermitian part (A + A*)/2.
cmat hermitian_part(const cmat& a);

// e^A via Pade scaling-and-squaring. Requires ||A|| <= 64.
cmat matrix_exponential(const cmat& a, double accuracy_target = default_expm_accuracy);

// Orthonormal basis of range(M); throws linalg_error if M is rank deficient.
cmat thin_orthonormalize(const cmat& m);

// M = QR with Q an isometry and R upper triangular with real non-negative diagonal.
struct ThinQR {
    cmat q;
    cmat r;
};
ThinQR thin_qr(const cmat& m);

HermitianEig hermitian_eig(const cmat& a);
double smallest_eigenvalue(const cmat& a);

int numerical_rank(const cmat& a, double rel_threshold = default_rank_threshold);

// log det of a Hermitian positive definite matrix through its Cholesky factor.
double log_det_hpd(const cmat& a);

}  // namespace grds
