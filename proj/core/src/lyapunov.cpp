#include "grds/lyapunov.hpp"

#include "grds/grassmann.hpp"
#include "grds/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace grds {

namespace {

// Rows of the most expanding diagonal entries, largest first; ties keep row order.
cmat expanding_frame(const rvec& diag, int k) {
    std::vector<int> rows(diag.size());
    std::iota(rows.begin(), rows.end(), 0);
    std::stable_sort(rows.begin(), rows.end(), [&](int a, int b) { return std::abs(diag(a)) > std::abs(diag(b)); });
    cmat f = cmat::Zero(diag.size(), k);
    for (int w = 0; w < k; ++w) f(rows[w], w) = 1.0;
    return f;
}

struct RunResult {
    std::vector<double> sums;                  // total of sum_{w<=q} log r_ww over the N steps, per q
    std::vector<std::vector<double>> batches;  // batch means, [q][batch]
};

RunResult run_frame(const ModelSpec& model, int q_max, long steps, long burn_in, int batches, Stream& s) {
    const Stepper stepper(model);
    rvec diag = model.stability.r_diagonal();
    if (model.adjoint) diag = diag.cwiseInverse();
    cmat frame = expanding_frame(diag, q_max);
    cmat work(frame.rows(), frame.cols());
    const int nb = static_cast<int>(std::min<long>(batches, steps));
    RunResult out;
    out.sums.assign(q_max, 0.0);
    out.batches.assign(q_max, std::vector<double>(nb, 0.0));
    std::vector<long> batch_len(nb, 0);
    std::vector<double> logs(q_max);
    const long total = burn_in + steps;
    for (long n = 1; n <= total; ++n) {
        try {
            stepper.advance(s, frame, work);
            if (q_max == 1) {
                const double r = frame.norm();
                if (!(r > 0.0) || !std::isfinite(r)) throw linalg_error("frame collapsed");
                logs[0] = std::log(r);
                frame /= r;
            } else {
                ThinQR qr = thin_qr(frame);
                for (int w = 0; w < q_max; ++w) {
                    const double r = qr.r(w, w).real();
                    if (!(r > 0.0)) throw linalg_error("Gram breakdown: zero diagonal in the triangular factor");
                    logs[w] = std::log(r);
                }
                frame = std::move(qr.q);
            }
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "estimate_partial_sums: step " << n << ": " << e.what();
            throw linalg_error(msg.str());
        }
        if (n <= burn_in) continue;
        const long k = n - burn_in - 1;
        const int b = static_cast<int>((k * nb) / steps);
        ++batch_len[b];
        double cum = 0.0;
        for (int w = 0; w < q_max; ++w) {
            cum += logs[w];
            out.sums[w] += cum;
            out.batches[w][b] += cum;
        }
    }
    for (int w = 0; w < q_max; ++w)
        for (int b = 0; b < nb; ++b) out.batches[w][b] /= static_cast<double>(batch_len[b]);
    return out;
}

double mean_se(const std::vector<double>& xs, double mean) {
    const std::size_t n = xs.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

LyapunovBounds evaluate_bounds(const ModelSpec& model) {
    const StabilitySpec& sp = model.stability;
    const double eta = macroscopic_gap(sp);
    const double l2 = model.lambda * model.lambda;
    const int mid = sp.lb + sp.lc;
    LyapunovBounds b;
    b.lower = std::log(sp.k(mid)) - (1.5 - 10.0 / eta * std::log(sp.k(sp.dim()) / sp.k(mid))) * l2;
    b.upper = sp.lb >= 1 ? std::log(sp.k(sp.lb)) + (1.5 - 10.0 / eta * std::log(sp.k(sp.lb) / sp.k(1))) * l2
                         : std::numeric_limits<double>::quiet_NaN();
    return b;
}

std::vector<LyapunovEstimate> estimate_partial_sums(const ModelSpec& model, const LyapunovOptions& opt, Stream& s) {
    model.validate();
    if (opt.q_max < 1 || opt.q_max > model.dim()) throw std::invalid_argument("estimate_partial_sums: need 1 <= q_max <= L");
    if (opt.steps < 1) throw std::invalid_argument("estimate_partial_sums: steps must be >= 1");
    if (opt.burn_in < 0) throw std::invalid_argument("estimate_partial_sums: burn_in must be >= 0");
    if (opt.batches < 1 || opt.replicas < 1) throw std::invalid_argument("estimate_partial_sums: bad batch options");

    const LyapunovBounds bounds = evaluate_bounds(model);
    std::vector<LyapunovEstimate> out(opt.q_max);
    if (opt.replicas == 1) {
        RunResult r = run_frame(model, opt.q_max, opt.steps, opt.burn_in, opt.batches, s);
        for (int w = 0; w < opt.q_max; ++w) {
            LyapunovEstimate& e = out[w];
            e.partial_sum = r.sums[w] / static_cast<double>(opt.steps);
            e.batch_means = std::move(r.batches[w]);
            e.standard_error = mean_se(e.batch_means, e.partial_sum);
        }
    } else {
        std::vector<RunResult> runs(opt.replicas);
        parallel_for(static_cast<std::size_t>(opt.replicas), opt.threads, [&](std::size_t k) {
            Stream st = s.substream(k);
            runs[k] = run_frame(model, opt.q_max, opt.steps, opt.burn_in, opt.batches, st);
        });
        for (int w = 0; w < opt.q_max; ++w) {
            LyapunovEstimate& e = out[w];
            for (const RunResult& r : runs) e.batch_means.push_back(r.sums[w] / static_cast<double>(opt.steps));
            e.partial_sum = std::accumulate(e.batch_means.begin(), e.batch_means.end(), 0.0) / opt.replicas;
            e.standard_error = mean_se(e.batch_means, e.partial_sum);
        }
    }
    for (int w = 0; w < opt.q_max; ++w) {
        out[w].q = w + 1;
        out[w].samples = opt.steps * opt.replicas;
        if (!model.adjoint) {
            out[w].bound_lower = bounds.lower;
            out[w].bound_upper = bounds.upper;
        }
    }
    return out;
}

namespace {

struct StepSides {
    double lhs = 0.0;
    double rhs = 0.0;
};

StepSides step_sides(const ModelSpec& model, const cmat& phi, const cmat& p, double slack_scale) {
    const StabilitySpec& sp = model.stability;
    const double lam = model.lambda;
    const cmat r = sp.r_matrix();
    const cmat t = matrix_exponential(lam * p) * r;
    const cmat tphi = t * phi;
    const double q = static_cast<double>(phi.cols());
    StepSides out;
    out.lhs = log_det_hpd(tphi.adjoint() * tphi);
    const int mid = sp.lb + sp.lc;
    const double d = phi.topRows(sp.la).squaredNorm();
    const cmat psi = act_frame(r, phi);
    const double coupling = (psi.adjoint() * (p + p.adjoint()) * psi).trace().real();
    // The first-order term enters once, as in the last line of the appendix estimate.
    out.rhs = 2.0 * (q * std::log(sp.k(mid)) + d * std::log(sp.k(sp.dim()) / sp.k(mid))) +
              lam * std::exp(0.75 * lam * lam) * coupling - 3.0 * lam * lam * q * slack_scale;
    return out;
}

}  // namespace

double step_estimate_gap(const ModelSpec& model, const cmat& phi, const cmat& p, double slack_scale) {
    const StepSides s = step_sides(model, phi, p, slack_scale);
    return s.rhs - s.lhs;
}

namespace {

cmat adversarial_perturbation(const cmat& phi, int first_row, int rows, Stream& s) {
    const Eigen::Index n = phi.rows();
    cvec x = phi * s.random_unit_vector(phi.cols());
    cvec y = cvec::Zero(n);
    for (;;) {
        y.segment(first_row, rows) = s.random_unit_vector(rows);
        for (int pass = 0; pass < 2; ++pass) y -= phi * (phi.adjoint() * y);
        const double norm = y.norm();
        if (norm > 1e-6) {
            y /= norm;
            break;
        }
    }
    const double c = -s.uniform();
    return x * y.adjoint() + c * y * x.adjoint();
}

}  // namespace

StepEstimateReport verify_step_estimate(const ModelSpec& model, const StepEstimateOptions& opt, Stream& s) {
    model.validate();
    const int n = model.dim();
    const int rows = opt.rows < 0 ? n - opt.first_row : opt.rows;
    if (opt.first_row < 0 || rows < model.q || opt.first_row + rows > n)
        throw std::invalid_argument("verify_step_estimate: bad row window for Q");
    StepEstimateReport rep;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < opt.samples; ++i) {
        cmat phi = cmat::Zero(n, model.q);
        phi.middleRows(opt.first_row, rows) = random_frame(rows, model.q, s);
        const cmat p = opt.adversarial && rows > model.q && s.uniform() < 0.5 ? adversarial_perturbation(phi, opt.first_row, rows, s)
                                                                              : model.ensemble.draw(s);
        const StepSides sides = step_sides(model, phi, p, opt.slack_scale);
        const double gap = sides.rhs - sides.lhs;
        const double tol = 1e-13 * std::max(1.0, std::abs(sides.lhs));
        rep.worst_margin = std::max(rep.worst_margin, gap);
        if (gap > tol) ++rep.violations;
        ++rep.samples;
    }
    return rep;
}

ReflectionResult reflection_check(const ModelSpec& model, int q, long steps, long burn_in, Stream& s, int batches) {
    const int n = model.dim();
    if (q < 1 || q > n) throw std::invalid_argument("reflection_check: need 1 <= q <= L");
    ModelSpec adjoint = model;
    adjoint.adjoint = true;

    LyapunovOptions fwd_opt;
    fwd_opt.q_max = q;
    fwd_opt.steps = steps;
    fwd_opt.burn_in = burn_in;
    fwd_opt.batches = batches;
    LyapunovOptions adj_opt = fwd_opt;
    adj_opt.q_max = n;

    Stream fwd_stream = s;
    Stream adj_stream = s;
    const std::vector<LyapunovEstimate> fwd = estimate_partial_sums(model, fwd_opt, fwd_stream);
    const std::vector<LyapunovEstimate> adj = estimate_partial_sums(adjoint, adj_opt, adj_stream);
    s = fwd_stream;

    // gamma_k = S_k - S_{k-1}, evaluated on the totals and on each batch.
    auto increment = [](const std::vector<LyapunovEstimate>& est, int k, double& value, double& se) {
        const LyapunovEstimate& cur = est[k - 1];
        std::vector<double> per_batch = cur.batch_means;
        value = cur.partial_sum;
        if (k > 1) {
            const LyapunovEstimate& prev = est[k - 2];
            value -= prev.partial_sum;
            for (std::size_t b = 0; b < per_batch.size(); ++b) per_batch[b] -= prev.batch_means[b];
        }
        se = mean_se(per_batch, std::accumulate(per_batch.begin(), per_batch.end(), 0.0) / per_batch.size());
    };

    ReflectionResult r;
    r.q = q;
    double se_fwd = 0.0, se_adj = 0.0;
    increment(fwd, q, r.gamma_q, se_fwd);
    increment(adj, n - q + 1, r.gamma_reflected, se_adj);
    r.discrepancy = std::abs(r.gamma_q + r.gamma_reflected);
    r.combined_se = std::sqrt(se_fwd * se_fwd + se_adj * se_adj);
    return r;
}

}  // namespace grds
