#pragma once

#include "grds/linalg.hpp"
#include "grds/partition.hpp"
#include "grds/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grds {

enum class EnsembleKind { haar_product, toeplitz_fourier, iid_entries, custom };
enum class OmegaLaw { uniform_pm1, bernoulli_pm1, uniform_interval };

std::string to_string(EnsembleKind k);
std::string to_string(OmegaLaw w);
EnsembleKind ensemble_kind_from_string(const std::string& s);
OmegaLaw omega_law_from_string(const std::string& s);

// Law of the perturbation P. Samples satisfy ||P|| <= 1 and E P = 0.
//  haar_product      P = A U B, U Haar on U(L), A and B fixed with norm <= 1
//  toeplitz_fourier  P = F diag(omega) F*, omega_j i.i.d. centred in [-1, 1]; F* = (c_L, c_1, c_{L-1}, ...)
//  iid_entries       P = G / ||G||, G a standard complex Gaussian matrix
//  custom            user sampler; "zero" is the built-in P = 0
struct Ensemble {
    EnsembleKind kind = EnsembleKind::custom;
    int dim = 0;

    OmegaLaw omega_law = OmegaLaw::uniform_pm1;
    // bernoulli_pm1: probability p of a nonzero entry; uniform_interval: half-width a.
    double omega_param = 0.5;
    cmat fourier;  // F* (columns c_sigma(a)); F (Delta + s) F* is diagonal in the stability ordering, P = F diag(omega) F*

    cmat left;   // A
    cmat right;  // B

    std::string custom_name;
    std::function<cmat(Stream&)> custom_sampler;

    cmat draw(Stream& s) const;
    // Toeplitz only: fills omega with a fresh draw. draw() consumes the stream identically.
    void draw_omega(Stream& s, rvec& omega) const;
    double omega_second_moment() const;
    void validate() const;
};

Ensemble make_zero_ensemble(int dim);
Ensemble make_iid_ensemble(int dim);
Ensemble make_custom_ensemble(int dim, std::string name, std::function<cmat(Stream&)> sampler);
// P = A U B. Throws if ||A|| or ||B|| exceeds 1 (by more than 1e-12).
Ensemble make_haar_ensemble(const cmat& a, const cmat& b);
Ensemble make_haar_ensemble(int dim);

struct ModelSpec {
    StabilitySpec stability;
    Ensemble ensemble;
    double lambda = 0.0;
    int q = 1;
    // Adjoint-inverse model T' = e^{-lambda P*} R^{-1}, driven by the same draws of P.
    bool adjoint = false;

    int dim() const { return stability.dim(); }
    void validate() const;
};

// kappa ladder (descending) and ensemble of the random Toeplitz model.
struct ToeplitzModel {
    std::vector<double> kappa;
    Ensemble ensemble;
};

// Fourier column c_k(n) = e^{2 pi i k n / L} / sqrt(L), columns ordered (c_L, c_1, c_{L-1}, c_2, ...),
// so the conjugated Laplacian has diagonal s - 2cos(2 pi sigma(a) / L) increasing down the rows.
ToeplitzModel make_toeplitz_model(int dim, double s, OmegaLaw law, double omega_param = 0.5);
cmat fourier_columns(int dim);
std::vector<int> fourier_order(int dim);

ModelSpec make_model(const std::vector<double>& kappa, int la, int lb, int lc, Ensemble ensemble, double lambda, int q);

// Draws T = e^{lambda P} R (or the adjoint-inverse variant) from a stream.
// matrix() and advance() consume the stream identically, so a trajectory can use the fast
// structured path while tests reconstruct each T with matrix().
class Stepper {
public:
    explicit Stepper(const ModelSpec& model);

    const ModelSpec& model() const { return model_; }
    cmat matrix(Stream& s) const;
    // x <- T x in place with a fresh draw. work must not alias x.
    void advance(Stream& s, cmat& x, cmat& work) const;

private:
    ModelSpec model_;
    rvec r_diag_;
    bool structured_ = false;
    bool frozen_ = false;  // lambda = 0: T is exactly the diagonal
};

// e^{lambda P} R for one fresh draw of P. Errors if the sampler produced ||P|| > 1.
cmat sample_step(const ModelSpec& model, Stream& s);

struct BetaExact {
    double value = 0.0;
    bool lower_bound = false;
    std::string formula;
};

std::optional<BetaExact> beta_exact(const ModelSpec& model);

struct BetaOptions {
    int n_inner = 2000;
    int n_starts = 8;
    int refine_iters = 30;
    unsigned threads = 1;
};

struct BetaEstimate {
    double value = 0.0;         // inner mean at the minimizer, evaluated on a fresh batch
    double standard_error = 0.0;
    double search_value = 0.0;  // minimum found on the search batch (biased low)
    cvec v;
    cmat w_frame;               // Psi of W = Psi Psi*, rank q - 1 (dual form: rank L_c - q + 1)
    int n_inner = 0;
    int n_starts = 0;
    int refine_iters = 0;
};

// Upper estimate of beta = inf E||c((1 - W) P v)||^2 over c(v) = 0, W <= P_c of rank q - 1.
BetaEstimate beta_monte_carlo(const ModelSpec& model, const BetaOptions& opt, Stream& s);
// Same infimum written as inf E v* P* W~ P v with W~ <= P_c of rank L_c - q + 1.
BetaEstimate beta_monte_carlo_dual(const ModelSpec& model, const BetaOptions& opt, Stream& s);

}  // namespace grds
