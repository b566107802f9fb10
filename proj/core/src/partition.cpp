#include "grds/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace grds {

rvec StabilitySpec::r_diagonal() const {
    const int n = dim();
    rvec d(n);
    for (int r = 0; r < n; ++r) d(r) = kappa(n - 1 - r);
    return d;
}

cmat StabilitySpec::r_matrix() const {
    return r_diagonal().cast<cplx>().asDiagonal();
}

void StabilitySpec::validate() const {
    const int n = dim();
    if (n < 1) throw std::invalid_argument("StabilitySpec: empty kappa");
    if (la < 0 || lb < 0 || lc < 0 || la + lb + lc != n) {
        std::ostringstream msg;
        msg << "StabilitySpec: la + lb + lc = " << la + lb + lc << " but L = " << n;
        throw std::invalid_argument(msg.str());
    }
    for (int i = 0; i < n; ++i) {
        if (!(kappa(i) > 0.0) || !std::isfinite(kappa(i)))
            throw std::invalid_argument("StabilitySpec: kappa must be finite and positive");
        if (i > 0 && kappa(i) > kappa(i - 1))
            throw std::invalid_argument("StabilitySpec: kappa must be non-increasing in the index");
    }
}

StabilitySpec make_stability(const std::vector<double>& kappa, int la, int lb, int lc) {
    StabilitySpec s;
    s.kappa = Eigen::Map<const rvec>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
    s.la = la;
    s.lb = lb;
    s.lc = lc;
    s.validate();
    return s;
}

double relative_gap(const StabilitySpec& stability, int i, int j) {
    if (!(1 <= i && i < j && j <= stability.dim())) {
        std::ostringstream msg;
        msg << "relative_gap: need 1 <= i < j <= L, got (" << i << ", " << j << ")";
        throw std::invalid_argument(msg.str());
    }
    const double r = stability.k(j) / stability.k(i);
    return 1.0 - r * r;
}

double macroscopic_gap(const StabilitySpec& stability) {
    if (stability.lb == 0) return 0.0;
    return relative_gap(stability, stability.lc, stability.lb + stability.lc);
}

SubdivisionResult subdivide(const StabilitySpec& stability, int a, int b, int f, double phi) {
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("subdivide: phi must lie in (0, 1)");
    if (!(1 <= a && a < b && b <= stability.dim())) throw std::invalid_argument("subdivide: need 1 <= a < b <= L");
    if (f < 1) throw std::invalid_argument("subdivide: F must be at least 1");
    if (f > b - a) {
        std::ostringstream msg;
        msg << "subdivide: F = " << f << " exceeds b - a = " << b - a;
        throw std::invalid_argument(msg.str());
    }
    const double eta_ab = relative_gap(stability, a, b);
    if (!(eta_ab > 0.0)) throw std::invalid_argument("subdivide: eta(a, b) must be positive");
    const double allowed = phi / f * eta_ab;
    for (int j = a; j < b; ++j) {
        if (relative_gap(stability, j, j + 1) > allowed) {
            std::ostringstream msg;
            msg << "subdivide: eta(J, J+1) = " << relative_gap(stability, j, j + 1) << " exceeds (phi/F) eta(a, b) = "
                << allowed << " at J = " << j;
            throw subdivision_error(msg.str(), j);
        }
    }

    const double k2a = stability.k(a) * stability.k(a);
    const double k2b = stability.k(b) * stability.k(b);
    const double threshold = (1.0 - phi) / f * (k2a - k2b);

    SubdivisionResult out;
    out.cuts.push_back(a);
    int prev = a;
    for (int ff = 1; ff < f; ++ff) {
        const double k2prev = stability.k(prev) * stability.k(prev);
        int chosen = -1;
        for (int j = prev + 1; j <= b - f + ff; ++j) {
            if (k2prev - stability.k(j) * stability.k(j) >= threshold) {
                chosen = j;
                break;
            }
        }
        if (chosen < 0) throw std::logic_error("subdivide: greedy step found no admissible index");
        out.cuts.push_back(chosen);
        prev = chosen;
    }
    out.cuts.push_back(b);
    for (std::size_t i = 1; i < out.cuts.size(); ++i)
        out.gaps.push_back(relative_gap(stability, out.cuts[i - 1], out.cuts[i]));
    return out;
}

cmat first_rows(int dim, int k) {
    cmat m = cmat::Zero(dim, k);
    for (int i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
}

cmat last_rows(int dim, int k) {
    cmat m = cmat::Zero(dim, k);
    for (int i = 0; i < k; ++i) m(dim - k + i, i) = 1.0;
    return m;
}

double Ladder::tau(const StabilitySpec& stability, int m) const {
    if (m < 0 || m > top_level()) throw std::out_of_range("Ladder::tau: level out of range");
    return relative_gap(stability, cuts[m], cuts[m + 1]);
}

void Ladder::validate(int dim) const {
    if (cuts.size() < 2) throw std::invalid_argument("Ladder: need at least two cuts");
    if (cuts.front() < 1 || cuts.back() > dim) throw std::invalid_argument("Ladder: cuts must lie in [1, L]");
    for (std::size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] <= cuts[i - 1]) throw std::invalid_argument("Ladder: cuts must be strictly increasing");
}

FrameKind frame_kind_from_string(const std::string& s) {
    if (s == "alpha") return FrameKind::alpha;
    if (s == "alpha_perp") return FrameKind::alpha_perp;
    if (s == "gamma") return FrameKind::gamma;
    if (s == "gamma_perp") return FrameKind::gamma_perp;
    if (s == "zeta") return FrameKind::zeta;
    if (s == "zeta_perp") return FrameKind::zeta_perp;
    if (s == "chi") return FrameKind::chi;
    if (s == "chi_perp") return FrameKind::chi_perp;
    throw std::invalid_argument("unknown frame kind '" + s + "'");
}

std::string to_string(FrameKind k) {
    switch (k) {
        case FrameKind::alpha: return "alpha";
        case FrameKind::alpha_perp: return "alpha_perp";
        case FrameKind::gamma: return "gamma";
        case FrameKind::gamma_perp: return "gamma_perp";
        case FrameKind::zeta: return "zeta";
        case FrameKind::zeta_perp: return "zeta_perp";
        case FrameKind::chi: return "chi";
        case FrameKind::chi_perp: return "chi_perp";
    }
    return "unknown";
}

cmat reference_frame(const StabilitySpec& stability, FrameKind kind, const Ladder* ladder, int m) {
    const int n = stability.dim();
    switch (kind) {
        case FrameKind::alpha: return first_rows(n, stability.la);
        case FrameKind::alpha_perp: return last_rows(n, stability.lb + stability.lc);
        case FrameKind::gamma: return last_rows(n, stability.lc);
        case FrameKind::gamma_perp: return first_rows(n, stability.la + stability.lb);
        default: break;
    }
    if (ladder == nullptr) throw std::invalid_argument("reference_frame: " + to_string(kind) + " needs a ladder");
    ladder->validate(n);
    const int top = ladder->top_level();
    if (m > top) throw std::out_of_range("reference_frame: ladder index out of range");
    const int d = m < 0 ? ladder->cuts.front() : ladder->cuts[m];
    const int e = m < 0 ? ladder->cuts.back() : ladder->cuts[m + 1];
    switch (kind) {
        case FrameKind::zeta: return last_rows(n, d);
        case FrameKind::zeta_perp: return first_rows(n, n - d);
        case FrameKind::chi: return first_rows(n, n - e);
        case FrameKind::chi_perp: return last_rows(n, e);
        default: break;
    }
    throw std::invalid_argument("reference_frame: unknown kind");
}

double theta_of(double lambda) {
    return std::log(std::pow(2.0, -54.0 / 5.0) / lambda);
}

double theorem_bound(double eta, int q, double lambda) {
    return 10.0 / eta * q * lambda * lambda;
}

bool HypothesisReport::all_pass() const {
    for (const HypothesisVerdict* v : {&h1, &h2, &h3, &h4, &h5})
        if (v->evaluated && !v->pass) return false;
    return true;
}

namespace {

double ratio_margin(double lhs, double rhs) {
    if (rhs == 0.0) return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return lhs / rhs - 1.0;
}

}  // namespace

HypothesisReport check_hypotheses_eta(double eta, double lambda, int q, double beta,
                                      const std::string& beta_provenance) {
    if (!(lambda > 0.0)) throw std::invalid_argument("check_hypotheses: lambda must be positive");
    if (q < 1) throw std::invalid_argument("check_hypotheses: q must be at least 1");
    HypothesisReport r;
    r.lambda = lambda;
    r.q = q;
    r.beta = beta;
    r.beta_provenance = beta_provenance;
    r.eta = eta;
    r.theta = theta_of(lambda);
    r.theta_below_one = r.theta < 1.0;

    r.h1.evaluated = true;
    r.h1.pass = eta > 0.0;
    r.h1.margin = -eta;
    r.h1.detail = "eta > 0";

    r.h2.evaluated = true;
    r.h2.pass = beta > 0.0;
    r.h2.margin = -beta;
    r.h2.detail = "beta > 0 (" + beta_provenance + ")";

    const double lam_max = std::pow(2.0, -13.0);
    const double m_range = ratio_margin(lambda, lam_max);
    const double rhs3 = std::pow(2.0, -17.0) * std::pow(beta, 8.0 / 3.0) * std::pow(eta, -1.0 / 3.0);
    const double m_coupling = ratio_margin(r.theta * lambda, rhs3);
    r.h3.evaluated = true;
    r.h3.pass = lambda < lam_max && r.theta * lambda <= rhs3 && eta > 0.0 && beta > 0.0;
    r.h3.margin = std::max(m_range, m_coupling);
    {
        std::ostringstream d;
        d << "lambda in (0, 2^-13) and theta*lambda = " << r.theta * lambda << " <= " << rhs3;
        r.h3.detail = d.str();
    }

    const double rhs4 = std::pow(2.0, -36.0 / 5.0) * std::pow(beta, 0.2) * std::pow(eta, 0.6) *
                        std::pow(r.theta, -0.2) * std::pow(lambda, -0.2);
    r.h4.evaluated = true;
    r.h4.pass = std::isfinite(rhs4) && static_cast<double>(q) <= rhs4;
    r.h4.margin = std::isfinite(rhs4) ? ratio_margin(static_cast<double>(q), rhs4)
                                      : std::numeric_limits<double>::quiet_NaN();
    {
        std::ostringstream d;
        d << "q = " << q << " <= " << rhs4;
        r.h4.detail = d.str();
    }

    r.t0 = 4.0 / beta * q * q * r.theta / (lambda * lambda);
    r.theorem_bound = theorem_bound(eta, q, lambda);
    return r;
}

HypothesisReport check_hypotheses(const StabilitySpec& stability, double lambda, int q, double beta,
                                  const std::string& beta_provenance) {
    stability.validate();
    HypothesisReport r = check_hypotheses_eta(macroscopic_gap(stability), lambda, q, beta, beta_provenance);
    const double rhs = 16.0 * lambda;
    auto scan = [&](int lo, int hi, HypothesisVerdict& v, const char* label) {
        double worst = 0.0;
        int count = 0;
        for (int i = lo; i <= hi; ++i) {
            if (i < 1 || i + 1 > stability.dim()) continue;
            worst = std::max(worst, relative_gap(stability, i, i + 1));
            ++count;
        }
        v.evaluated = count > 0;
        v.pass = count > 0 && worst < rhs;
        v.margin = ratio_margin(worst, rhs);
        std::ostringstream d;
        d << label << ": max eta(I, I+1) = " << worst << " < 16 lambda = " << rhs;
        v.detail = d.str();
    };
    scan(stability.lc, stability.lb + stability.lc, r.h5, "I in {L_c, ..., L_b + L_c}");
    scan(stability.lc, stability.lb + stability.lc - 1, r.h5_middle, "I in {L_c, ..., L_b + L_c - 1}");
    return r;
}

}  // namespace grds
