#include "grds/ensembles.hpp"

#include "grds/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace grds {

std::string to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::haar_product: return "haar_product";
        case EnsembleKind::toeplitz_fourier: return "toeplitz_fourier";
        case EnsembleKind::iid_entries: return "iid_entries";
        case EnsembleKind::custom: return "custom";
    }
    return "unknown";
}

std::string to_string(OmegaLaw w) {
    switch (w) {
        case OmegaLaw::uniform_pm1: return "uniform_pm1";
        case OmegaLaw::bernoulli_pm1: return "bernoulli_pm1";
        case OmegaLaw::uniform_interval: return "uniform_interval";
    }
    return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "haar_product" || s == "haar") return EnsembleKind::haar_product;
    if (s == "toeplitz_fourier" || s == "toeplitz") return EnsembleKind::toeplitz_fourier;
    if (s == "iid_entries" || s == "iid") return EnsembleKind::iid_entries;
    if (s == "custom") return EnsembleKind::custom;
    throw std::invalid_argument("unknown ensemble kind '" + s + "'");
}

OmegaLaw omega_law_from_string(const std::string& s) {
    if (s == "uniform_pm1") return OmegaLaw::uniform_pm1;
    if (s == "bernoulli_pm1") return OmegaLaw::bernoulli_pm1;
    if (s == "uniform_interval") return OmegaLaw::uniform_interval;
    throw std::invalid_argument("unknown omega law '" + s + "'");
}

void Ensemble::draw_omega(Stream& s, rvec& omega) const {
    omega.resize(dim);
    switch (omega_law) {
        case OmegaLaw::uniform_pm1: {
            std::uint64_t word = 0;
            for (int j = 0; j < dim; ++j) {
                if (j % 64 == 0) word = s.bits();
                omega(j) = ((word >> (j % 64)) & 1u) ? 1.0 : -1.0;
            }
            break;
        }
        case OmegaLaw::bernoulli_pm1:
            for (int j = 0; j < dim; ++j) {
                const double u = s.uniform();
                omega(j) = u < 0.5 * omega_param ? -1.0 : (u < omega_param ? 1.0 : 0.0);
            }
            break;
        case OmegaLaw::uniform_interval:
            for (int j = 0; j < dim; ++j) omega(j) = s.uniform(-omega_param, omega_param);
            break;
    }
}

double Ensemble::omega_second_moment() const {
    switch (omega_law) {
        case OmegaLaw::uniform_pm1: return 1.0;
        case OmegaLaw::bernoulli_pm1: return omega_param;
        case OmegaLaw::uniform_interval: return omega_param * omega_param / 3.0;
    }
    return 0.0;
}

cmat Ensemble::draw(Stream& s) const {
    switch (kind) {
        case EnsembleKind::toeplitz_fourier: {
            rvec omega;
            draw_omega(s, omega);
            return fourier.adjoint() * omega.cast<cplx>().asDiagonal() * fourier;
        }
        case EnsembleKind::haar_product:
            return left * haar_unitary(dim, s) * right;
        case EnsembleKind::iid_entries: {
            cmat g = s.gaussian_matrix(dim, dim);
            return g / operator_norm(g);
        }
        case EnsembleKind::custom:
            if (!custom_sampler) return cmat::Zero(dim, dim);
            return custom_sampler(s);
    }
    throw std::logic_error("Ensemble::draw: unknown kind");
}

void Ensemble::validate() const {
    if (dim < 1) throw std::invalid_argument("Ensemble: dimension must be positive");
    switch (kind) {
        case EnsembleKind::toeplitz_fourier:
            if (fourier.rows() != dim || fourier.cols() != dim)
                throw std::invalid_argument("Ensemble: Fourier matrix has the wrong size");
            if (omega_law == OmegaLaw::bernoulli_pm1 && !(omega_param > 0.0 && omega_param <= 1.0))
                throw std::invalid_argument("Ensemble: bernoulli_pm1 needs p in (0, 1]");
            if (omega_law == OmegaLaw::uniform_interval && !(omega_param > 0.0 && omega_param <= 1.0))
                throw std::invalid_argument("Ensemble: uniform_interval needs a in (0, 1]");
            break;
        case EnsembleKind::haar_product:
            if (left.rows() != dim || left.cols() != dim || right.rows() != dim || right.cols() != dim)
                throw std::invalid_argument("Ensemble: A and B must be L x L");
            break;
        default: break;
    }
}

Ensemble make_zero_ensemble(int dim) {
    Ensemble e;
    e.kind = EnsembleKind::custom;
    e.dim = dim;
    e.custom_name = "zero";
    e.custom_sampler = [dim](Stream&) { return cmat::Zero(dim, dim).eval(); };
    return e;
}

Ensemble make_iid_ensemble(int dim) {
    Ensemble e;
    e.kind = EnsembleKind::iid_entries;
    e.dim = dim;
    return e;
}

Ensemble make_custom_ensemble(int dim, std::string name, std::function<cmat(Stream&)> sampler) {
    Ensemble e;
    e.kind = EnsembleKind::custom;
    e.dim = dim;
    e.custom_name = std::move(name);
    e.custom_sampler = std::move(sampler);
    return e;
}

Ensemble make_haar_ensemble(const cmat& a, const cmat& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("make_haar_model: A and B must be square of equal size");
    for (const cmat* m : {&a, &b}) {
        const double n = operator_norm(*m);
        if (n > 1.0 + 1e-12) {
            std::ostringstream msg;
            msg << "make_haar_model: operator norm " << n << " exceeds 1";
            throw std::invalid_argument(msg.str());
        }
    }
    Ensemble e;
    e.kind = EnsembleKind::haar_product;
    e.dim = static_cast<int>(a.rows());
    e.left = a;
    e.right = b;
    return e;
}

Ensemble make_haar_ensemble(int dim) {
    return make_haar_ensemble(cmat::Identity(dim, dim), cmat::Identity(dim, dim));
}

void ModelSpec::validate() const {
    stability.validate();
    ensemble.validate();
    if (ensemble.dim != stability.dim()) throw std::invalid_argument("ModelSpec: ensemble and stability dimensions differ");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("ModelSpec: lambda must be >= 0");
    if (q < 1 || q > stability.lc) {
        std::ostringstream msg;
        msg << "ModelSpec: need 1 <= q <= L_c, got q = " << q << ", L_c = " << stability.lc;
        throw std::invalid_argument(msg.str());
    }
}

std::vector<int> fourier_order(int dim) {
    std::vector<int> order(dim);
    for (int a = 0; a < dim; ++a) order[a] = a == 0 ? dim : (a % 2 == 1 ? (a + 1) / 2 : dim - a / 2);
    return order;
}

cmat fourier_columns(int dim) {
    const std::vector<int> order = fourier_order(dim);
    cmat u(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int a = 0; a < dim; ++a) {
        for (int n = 0; n < dim; ++n) {
            const long phase_index = (static_cast<long>(order[a]) * n) % dim;
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase_index) / dim;
            u(n, a) = std::polar(norm, angle);
        }
    }
    return u;
}

ToeplitzModel make_toeplitz_model(int dim, double s, OmegaLaw law, double omega_param) {
    if (dim < 1 || dim % 2 == 0) throw std::invalid_argument("make_toeplitz_model: L must be odd");
    if (!(s > 2.0)) throw std::invalid_argument("make_toeplitz_model: s must exceed 2 so that R > 0");
    const std::vector<int> order = fourier_order(dim);
    ToeplitzModel m;
    m.kappa.resize(dim);
    // Folding k to min(k, L - k) makes the two modes of each pair bit-identical, so the ladder is monotone.
    for (int a = 0; a < dim; ++a) {
        const int k = std::min(order[a] % dim, dim - order[a] % dim);
        m.kappa[dim - 1 - a] = s - 2.0 * std::cos(2.0 * std::numbers::pi * k / dim);
    }
    m.ensemble.kind = EnsembleKind::toeplitz_fourier;
    m.ensemble.dim = dim;
    m.ensemble.omega_law = law;
    m.ensemble.omega_param = omega_param;
    m.ensemble.fourier = fourier_columns(dim);
    m.ensemble.validate();
    return m;
}

ModelSpec make_model(const std::vector<double>& kappa, int la, int lb, int lc, Ensemble ensemble, double lambda, int q) {
    ModelSpec m;
    m.stability = make_stability(kappa, la, lb, lc);
    m.ensemble = std::move(ensemble);
    m.lambda = lambda;
    m.q = q;
    m.validate();
    return m;
}

Stepper::Stepper(const ModelSpec& model) : model_(model) {
    model_.validate();
    r_diag_ = model_.stability.r_diagonal();
    if (model_.adjoint) r_diag_ = r_diag_.cwiseInverse();
    structured_ = model_.ensemble.kind == EnsembleKind::toeplitz_fourier;
    frozen_ = model_.lambda == 0.0;
}

namespace {

void check_perturbation_norm(const cmat& p) {
    const double n = operator_norm(p);
    if (n > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "sample_step: sampler produced ||P|| = " << n << " > 1";
        throw std::runtime_error(msg.str());
    }
}

}  // namespace

cmat Stepper::matrix(Stream& s) const {
    const double lam = model_.adjoint ? -model_.lambda : model_.lambda;
    const int n = model_.dim();
    if (structured_) {
        thread_local rvec omega;
        model_.ensemble.draw_omega(s, omega);
        if (frozen_) return r_diag_.cast<cplx>().asDiagonal();
        const cmat& u = model_.ensemble.fourier;
        const cvec e = (lam * omega).array().exp().cast<cplx>().matrix();
        return u.adjoint() * e.asDiagonal() * (u * r_diag_.cast<cplx>().asDiagonal());
    }
    cmat p = model_.ensemble.draw(s);
    if (p.rows() != n || p.cols() != n) throw std::runtime_error("sample_step: sampler returned the wrong shape");
    check_perturbation_norm(p);
    if (frozen_) return r_diag_.cast<cplx>().asDiagonal();
    if (model_.adjoint) p.adjointInPlace();
    return matrix_exponential(lam * p) * r_diag_.cast<cplx>().asDiagonal();
}

void Stepper::advance(Stream& s, cmat& x, cmat& work) const {
    if (!structured_) {
        const cmat t = matrix(s);
        work.noalias() = t * x;
        x.swap(work);
        return;
    }
    thread_local rvec omega;
    model_.ensemble.draw_omega(s, omega);
    x = r_diag_.asDiagonal() * x;
    if (frozen_) return;
    const double lam = model_.adjoint ? -model_.lambda : model_.lambda;
    const cmat& u = model_.ensemble.fourier;
    work.noalias() = u * x;
    for (Eigen::Index j = 0; j < work.rows(); ++j) work.row(j) *= std::exp(lam * omega(j));
    x.noalias() = u.adjoint() * work;
}

cmat sample_step(const ModelSpec& model, Stream& s) {
    return Stepper(model).matrix(s);
}

std::optional<BetaExact> beta_exact(const ModelSpec& model) {
    const StabilitySpec& sp = model.stability;
    const double l = sp.dim();
    if (model.ensemble.kind == EnsembleKind::toeplitz_fourier) {
        if (model.q != 1) return std::nullopt;
        BetaExact b;
        b.value = sp.lc / l * model.ensemble.omega_second_moment();
        b.lower_bound = false;
        b.formula = "L_c / L * E(omega^2)";
        return b;
    }
    if (model.ensemble.kind == EnsembleKind::haar_product) {
        const double mu_a = smallest_eigenvalue(model.ensemble.left * model.ensemble.left.adjoint());
        const double mu_b = smallest_eigenvalue(model.ensemble.right.adjoint() * model.ensemble.right);
        BetaExact b;
        b.value = std::max(mu_a, 0.0) * std::max(mu_b, 0.0) * (sp.lc - model.q + 1) / l;
        b.lower_bound = true;
        b.formula = "mu_1(A A*) * mu_1(B* B) * (L_c - q + 1) / L";
        return b;
    }
    return std::nullopt;
}

namespace {

// Eigenvectors of a Hermitian matrix for the k smallest (top = false) or largest eigenvalues.
cmat extreme_eigenvectors(const cmat& m, int k, bool top) {
    if (k == 0) return cmat(m.rows(), 0);
    HermitianEig eig = hermitian_eig(m);
    return top ? eig.vectors.rightCols(k) : eig.vectors.leftCols(k);
}

enum class BetaForm { primal, dual };

BetaEstimate beta_search(const ModelSpec& model, const BetaOptions& opt, Stream& s, BetaForm form) {
    model.validate();
    if (opt.n_inner < 100) throw std::invalid_argument("beta_monte_carlo: n_inner < 100 is too noisy");
    if (opt.n_starts < 1 || opt.refine_iters < 0) throw std::invalid_argument("beta_monte_carlo: bad search options");
    const StabilitySpec& sp = model.stability;
    const int l = sp.dim();
    const int lc = sp.lc;
    const int free_dim = l - lc;
    if (free_dim < 1) throw std::invalid_argument("beta_monte_carlo: c(v) = 0 leaves no room for v");
    const int k = form == BetaForm::primal ? model.q - 1 : lc - model.q + 1;

    // Only the block of P mapping the (a, b) rows into the c rows enters the objective.
    auto draw_blocks = [&](Stream stream) {
        std::vector<cmat> blocks(opt.n_inner);
        for (int i = 0; i < opt.n_inner; ++i) blocks[i] = model.ensemble.draw(stream).bottomLeftCorner(lc, free_dim);
        return blocks;
    };
    const std::vector<cmat> search = draw_blocks(s.substream(0));

    // Objective on a batch for unit v in C^{free_dim} and frame psi in C^{lc x k}.
    auto weight = [&](const cmat& psi) {
        cmat w = psi * psi.adjoint();
        return form == BetaForm::primal ? (cmat::Identity(lc, lc) - w).eval() : w;
    };
    auto objective = [&](const std::vector<cmat>& batch, const cvec& v, const cmat& psi, rvec* samples) {
        const cmat g = weight(psi);
        double total = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const cvec bv = batch[i] * v;
            const double f = std::max(0.0, (bv.adjoint() * g * bv)(0, 0).real());
            if (samples) (*samples)(static_cast<Eigen::Index>(i)) = f;
            total += f;
        }
        return total / static_cast<double>(batch.size());
    };

    struct Candidate {
        double value = std::numeric_limits<double>::infinity();
        cvec v;
        cmat psi;
    };
    std::vector<Candidate> starts(opt.n_starts);
    parallel_for(static_cast<std::size_t>(opt.n_starts), opt.threads, [&](std::size_t idx) {
        Stream st = s.substream(2 + idx);
        cvec v = st.random_unit_vector(free_dim);
        cmat psi = random_frame(lc, k, st);
        for (int it = 0; it < opt.refine_iters; ++it) {
            const cmat g = weight(psi);
            cmat mv = cmat::Zero(free_dim, free_dim);
            for (const cmat& b : search) mv.noalias() += b.adjoint() * g * b;
            v = extreme_eigenvectors(hermitian_part(mv), 1, false).col(0);
            cmat nv = cmat::Zero(lc, lc);
            for (const cmat& b : search) {
                const cvec bv = b * v;
                nv.noalias() += bv * bv.adjoint();
            }
            // Primal: W soaks up the largest part of P v. Dual: W~ keeps the smallest.
            psi = extreme_eigenvectors(hermitian_part(nv), k, form == BetaForm::primal);
        }
        starts[idx] = {objective(search, v, psi, nullptr), v, psi};
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < starts.size(); ++i)
        if (starts[i].value < starts[best].value) best = i;

    const std::vector<cmat> fresh = draw_blocks(s.substream(1));
    rvec samples(opt.n_inner);
    BetaEstimate out;
    out.value = objective(fresh, starts[best].v, starts[best].psi, &samples);
    const double var = (samples.array() - out.value).square().sum() / (opt.n_inner - 1);
    out.standard_error = std::sqrt(var / opt.n_inner);
    out.search_value = starts[best].value;
    out.v = cvec::Zero(l);
    out.v.head(free_dim) = starts[best].v;
    out.w_frame = cmat::Zero(l, k);
    out.w_frame.bottomRows(lc) = starts[best].psi;
    out.n_inner = opt.n_inner;
    out.n_starts = opt.n_starts;
    out.refine_iters = opt.refine_iters;
    return out;
}

}  // namespace

BetaEstimate beta_monte_carlo(const ModelSpec& model, const BetaOptions& opt, Stream& s) {
    return beta_search(model, opt, s, BetaForm::primal);
}

BetaEstimate beta_monte_carlo_dual(const ModelSpec& model, const BetaOptions& opt, Stream& s) {
    return beta_search(model, opt, s, BetaForm::dual);
}

}  // namespace grds
