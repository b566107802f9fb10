#include "grds/dynamics.hpp"

#include "grds/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grds {

bool RegionLabel::in_step(int m) const {
    return std::find(steps.begin(), steps.end(), m) != steps.end();
}

Projection unstable_initial_projection(const StabilitySpec& stability, int q) {
    return Projection::from_isometry(first_rows(stability.dim(), q));
}

Projection stable_initial_projection(const StabilitySpec& stability, int q) {
    return Projection::from_isometry(last_rows(stability.dim(), q));
}

namespace {

// Largest eigenvalue of B B* for a block B of a frame, i.e. the norm of the compressed projection.
double compressed_norm(const cmat& block) {
    if (block.rows() == 0 || block.cols() == 0) return 0.0;
    if (block.cols() == 1 || block.rows() == 1) return block.squaredNorm();
    const double s = operator_norm(block);
    return s * s;
}

void orthonormalize_in_place(cmat& frame) {
    if (frame.cols() == 1) {
        const double n = frame.norm();
        if (!(n > 1e-300) || !std::isfinite(n)) throw linalg_error("frame collapsed to zero");
        frame /= n;
        return;
    }
    frame = thin_qr(frame).q;
}

[[noreturn]] void rethrow_at_step(long step, const std::exception& e) {
    std::ostringstream msg;
    msg << "step " << step << ": " << e.what();
    throw linalg_error(msg.str());
}

void propagate(const Stepper& stepper, cmat& frame, long steps, Stream& s) {
    cmat work(frame.rows(), frame.cols());
    for (long n = 1; n <= steps; ++n) {
        try {
            stepper.advance(s, frame, work);
            orthonormalize_in_place(frame);
        } catch (const std::exception& e) {
            rethrow_at_step(n, e);
        }
    }
}

}  // namespace

double block_norm_a(const cmat& frame, const StabilitySpec& stability) {
    return compressed_norm(frame.topRows(stability.la));
}

double block_norm_gamma_perp(const cmat& frame, const StabilitySpec& stability) {
    return compressed_norm(frame.topRows(stability.la + stability.lb));
}

TrajectoryRecord simulate_projection(const ModelSpec& model, const Projection& q0, long steps, long record_every,
                                     Stream& s) {
    if (steps < 1) throw std::invalid_argument("simulate_projection: steps must be >= 1");
    if (record_every < 1) throw std::invalid_argument("simulate_projection: record_every must be >= 1");
    if (q0.rank() != model.q || q0.dim() != model.dim())
        throw std::invalid_argument("simulate_projection: initial projection does not match the model");
    const Stepper stepper(model);
    const StabilitySpec& stability = model.stability;
    cmat frame = q0.frame();
    cmat work(frame.rows(), frame.cols());
    TrajectoryRecord rec;
    auto record = [&](long n) {
        rec.times.push_back(n);
        rec.d_values.push_back(frame.topRows(stability.la).squaredNorm());
        rec.norm_a.push_back(block_norm_a(frame, stability));
        rec.norm_gup.push_back(block_norm_gamma_perp(frame, stability));
    };
    record(0);
    for (long n = 1; n <= steps; ++n) {
        try {
            stepper.advance(s, frame, work);
            orthonormalize_in_place(frame);
        } catch (const std::exception& e) {
            rethrow_at_step(n, e);
        }
        if (n % record_every == 0 || n == steps) record(n);
    }
    return rec;
}

ExpectedD estimate_expected_d(const ModelSpec& model, const Projection& q0, long horizon, int n_traj, Stream& s,
                              unsigned threads) {
    if (n_traj < 2) throw std::invalid_argument("estimate_expected_d: n_traj must be >= 2");
    if (horizon < 0) throw std::invalid_argument("estimate_expected_d: horizon must be >= 0");
    if (q0.rank() != model.q || q0.dim() != model.dim())
        throw std::invalid_argument("estimate_expected_d: initial projection does not match the model");
    const Stepper stepper(model);
    ExpectedD out;
    out.finals.assign(n_traj, 0.0);
    parallel_for(static_cast<std::size_t>(n_traj), threads, [&](std::size_t k) {
        Stream st = s.substream(k);
        cmat frame = q0.frame();
        propagate(stepper, frame, horizon, st);
        out.finals[k] = frame.topRows(model.stability.la).squaredNorm();
    });
    double sum = 0.0;
    for (double d : out.finals) sum += d;
    out.mean = sum / n_traj;
    double ss = 0.0;
    for (double d : out.finals) ss += (d - out.mean) * (d - out.mean);
    out.std_dev = std::sqrt(ss / (n_traj - 1));
    out.half_width = 1.96 * out.std_dev / std::sqrt(static_cast<double>(n_traj));
    out.bound = theorem_bound(macroscopic_gap(model.stability), model.q, model.lambda);
    out.n_traj = n_traj;
    out.horizon = horizon;
    return out;
}

double overwhelming_threshold(double beta, double eta, double lambda) {
    return std::pow(2.0, -21.0 / 5.0) * std::pow(beta, 0.6) * std::pow(eta, -0.2) *
           std::pow(theta_of(lambda), -0.6) * std::pow(lambda, 1.4);
}

void LadderParams::validate(const StabilitySpec& stability, double lambda) const {
    ladder.validate(stability.dim());
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("ladder precondition violated: sigma not in (0, 1)");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("ladder precondition violated: tau not in (0, 1)");
    const double lhs = sigma + 1.75 * lambda + 2.0 / sigma * lambda / tau;
    if (!(lhs < 1.0)) {
        std::ostringstream msg;
        msg << "ladder precondition violated: sigma + 7/4 lambda + (2/sigma)(lambda/tau) = " << lhs << " >= 1";
        throw std::invalid_argument(msg.str());
    }
    for (int m = 0; m <= ladder.top_level(); ++m) {
        if (tau > ladder.tau(stability, m)) {
            std::ostringstream msg;
            msg << "ladder precondition violated: tau = " << tau << " exceeds tau_" << m << " = " << ladder.tau(stability, m);
            throw std::invalid_argument(msg.str());
        }
    }
}

LadderParams default_ladder_params(const StabilitySpec& stability, const Ladder& ladder, double lambda, double beta) {
    LadderParams lp;
    lp.sigma = std::pow(2.0, -1.5);
    lp.tau = 16.0 * lambda;
    lp.ladder = ladder;
    lp.overwhelming = overwhelming_threshold(beta, macroscopic_gap(stability), lambda);
    return lp;
}

RegionLabel classify_pair(const GrassmannPair& p, const StabilitySpec& stability, const LadderParams& lp, double lambda) {
    const int n = stability.dim();
    const std::vector<int>& cuts = lp.ladder.cuts;
    const int top = lp.ladder.top_level();
    RegionLabel r;
    r.trace = p.w.rank() == 0 ? 0.0 : p.w.frame().topRows(n - cuts.front()).squaredNorm();
    r.in_overwhelming = r.trace <= lp.overwhelming;
    const double anticone_level = 2.0 / lp.sigma * lambda / lp.tau;
    r.x2.resize(top + 1);
    r.z2.resize(top + 1);
    r.cone.resize(top + 1);
    r.anticone.resize(top + 1);
    for (int m = 0; m <= top; ++m) {
        r.x2[m] = p.v.head(n - cuts[m + 1]).squaredNorm();
        r.z2[m] = p.v.tail(cuts[m]).squaredNorm();
        r.cone[m] = r.x2[m] <= lp.sigma;
        r.anticone[m] = r.z2[m] <= anticone_level;
        if (r.cone[m] && !r.cone_index) r.cone_index = m;
        if (r.anticone[m]) r.anticone_index = m;
        if (r.cone[m] && r.anticone[m]) r.steps.push_back(m);
    }
    for (int m = 0; m < top; ++m) {
        if (!r.cone[m] && r.cone[m + 1] && r.anticone[m] && !r.anticone[m + 1]) r.interspace = m;
    }
    return r;
}

std::vector<MovementViolation> movement_violations(const RegionLabel& b, const RegionLabel& a, const LadderParams& lp,
                                                   const StabilitySpec& stability) {
    std::vector<MovementViolation> out;
    const int top = lp.ladder.top_level();
    for (int m = 0; m <= top; ++m) {
        // 1. Entering A_m means entering S_m.
        if (!b.anticone[m] && a.anticone[m] && !a.cone[m]) out.push_back({1, m});
        // 2. Leaving C_m means leaving S_m.
        if (b.cone[m] && !a.cone[m] && !b.anticone[m]) out.push_back({2, m});
        if (m < top) {
            // 3. Entering A_{m+1} means leaving I_{m+1/2}.
            if (lp.tau <= lp.ladder.tau(stability, m + 1) && !b.anticone[m + 1] && a.anticone[m + 1] &&
                !b.in_interspace(m))
                out.push_back({3, m});
            // 4. From S_m, leaving C_m while staying in A_m means entering I_{m+1/2}.
            if (b.in_step(m) && !a.cone[m] && a.anticone[m] && !a.in_interspace(m)) out.push_back({4, m});
        }
        // 5. Leaving I_{m-1/2} means leaving A_{m-1} or entering S_{m-1} or S_m.
        if (m >= 1 && b.in_interspace(m - 1) && !a.in_interspace(m - 1)) {
            if (a.anticone[m - 1] && !a.in_step(m - 1) && !a.in_step(m)) out.push_back({5, m});
        }
    }
    return out;
}

PairTrajectory simulate_pair(const ModelSpec& model, const GrassmannPair& p0, long steps, const LadderParams& lp,
                             Stream& s, long record_every) {
    if (steps < 1) throw std::invalid_argument("simulate_pair: steps must be >= 1");
    if (record_every < 1) throw std::invalid_argument("simulate_pair: record_every must be >= 1");
    validate_pair(p0);
    const StabilitySpec& stability = model.stability;
    lp.validate(stability, model.lambda);
    const Stepper stepper(model);
    const Eigen::Index w = p0.w.rank();

    // Columns (Phi_W, v): the QR factor of T (Phi_W, v) yields T.W and ((T.W)^perp T) o v together.
    cmat frame(model.dim(), w + 1);
    frame.leftCols(w) = p0.w.frame();
    frame.col(w) = p0.v;
    cmat work(frame.rows(), frame.cols());

    auto state = [&] {
        return GrassmannPair{Projection::from_isometry(frame.leftCols(w)), frame.col(w)};
    };

    PairTrajectory out;
    RegionLabel current = classify_pair(state(), stability, lp, model.lambda);
    auto record = [&](long n) {
        out.record.times.push_back(n);
        out.record.d_values.push_back(frame.topRows(stability.la).squaredNorm());
        out.record.norm_a.push_back(block_norm_a(frame, stability));
        out.record.norm_gup.push_back(block_norm_gamma_perp(frame, stability));
        out.record.labels.push_back(current);
    };
    record(0);
    for (long n = 1; n <= steps; ++n) {
        try {
            stepper.advance(s, frame, work);
            frame = thin_qr(frame).q;
        } catch (const std::exception& e) {
            rethrow_at_step(n, e);
        }
        RegionLabel next = classify_pair(state(), stability, lp, model.lambda);
        if (current.in_overwhelming && next.in_overwhelming) {
            ++out.audited_steps;
            for (const MovementViolation& v : movement_violations(current, next, lp, stability)) {
                ++out.violations;
                out.violation_log.emplace_back(n, v);
            }
        }
        current = std::move(next);
        if (n % record_every == 0 || n == steps) record(n);
    }
    out.final_state = state();
    return out;
}

}  // namespace grds
