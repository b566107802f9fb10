#include "grds/serialize.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace grds {

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("field '") + key + "': " + e.what());
    }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? field<T>(j, key) : fallback;
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

json to_json(const cmat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

cmat cmat_from_json(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("matrix: expected an array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
    cmat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols) throw std::invalid_argument("matrix: ragged rows");
        for (Eigen::Index k = 0; k < cols; ++k) {
            const json& e = j[i][k];
            if (e.is_number()) {
                m(i, k) = cplx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2) {
                m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
            } else {
                throw std::invalid_argument("matrix: entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

json to_json(const StabilitySpec& stability) {
    std::vector<double> kappa(stability.kappa.data(), stability.kappa.data() + stability.kappa.size());
    return {{"kappa", kappa}, {"la", stability.la}, {"lb", stability.lb}, {"lc", stability.lc}};
}

StabilitySpec stability_from_json(const json& j) {
    return make_stability(field<std::vector<double>>(j, "kappa"), field<int>(j, "la"), field<int>(j, "lb"),
                     field<int>(j, "lc"));
}

json to_json(const Ensemble& e) {
    json j{{"kind", to_string(e.kind)}, {"dim", e.dim}};
    switch (e.kind) {
        case EnsembleKind::toeplitz_fourier:
            j["omega_law"] = to_string(e.omega_law);
            j["omega_param"] = e.omega_param;
            break;
        case EnsembleKind::haar_product:
            j["left"] = to_json(e.left);
            j["right"] = to_json(e.right);
            break;
        case EnsembleKind::custom: j["name"] = e.custom_name; break;
        case EnsembleKind::iid_entries: break;
    }
    return j;
}

Ensemble ensemble_from_json(const json& j) {
    const EnsembleKind kind = ensemble_kind_from_string(field<std::string>(j, "kind"));
    const int dim = field<int>(j, "dim");
    switch (kind) {
        case EnsembleKind::toeplitz_fourier: {
            Ensemble e;
            e.kind = kind;
            e.dim = dim;
            e.omega_law = omega_law_from_string(field_or<std::string>(j, "omega_law", "uniform_pm1"));
            e.omega_param = field_or<double>(j, "omega_param", 0.5);
            e.fourier = fourier_columns(dim);
            e.validate();
            return e;
        }
        case EnsembleKind::haar_product:
            if (!j.contains("left") && !j.contains("right")) return make_haar_ensemble(dim);
            return make_haar_ensemble(cmat_from_json(j.at("left")), cmat_from_json(j.at("right")));
        case EnsembleKind::iid_entries: return make_iid_ensemble(dim);
        case EnsembleKind::custom: {
            const std::string name = field<std::string>(j, "name");
            if (name != "zero") throw std::invalid_argument("ensemble: custom sampler '" + name + "' cannot be loaded");
            return make_zero_ensemble(dim);
        }
    }
    throw std::invalid_argument("ensemble: unknown kind");
}

json to_json(const ModelSpec& m) {
    return {{"stability", to_json(m.stability)},
            {"ensemble", to_json(m.ensemble)},
            {"lambda", m.lambda},
            {"q", m.q},
            {"adjoint", m.adjoint}};
}

ModelSpec model_from_json(const json& j) {
    ModelSpec m;
    m.stability = stability_from_json(field<json>(j, "stability"));
    m.ensemble = ensemble_from_json(field<json>(j, "ensemble"));
    m.lambda = field<double>(j, "lambda");
    m.q = field<int>(j, "q");
    m.adjoint = field_or<bool>(j, "adjoint", false);
    m.validate();
    return m;
}

json to_json(const ExpectedD& d) {
    return {{"mean", d.mean},     {"half_width", d.half_width}, {"std_dev", d.std_dev},
            {"bound", d.bound},   {"n_traj", d.n_traj},         {"horizon", d.horizon},
            {"finals", d.finals}};
}

json to_json(const LyapunovEstimate& e) {
    return {{"q", e.q},
            {"partial_sum", e.partial_sum},
            {"samples", e.samples},
            {"standard_error", e.standard_error},
            {"bound_lower", optional_number(e.bound_lower)},
            {"bound_upper", optional_number(e.bound_upper)},
            {"batch_means", e.batch_means}};
}

json to_json(const LyapunovBounds& b) {
    return {{"lower", b.lower}, {"upper", std::isnan(b.upper) ? json(nullptr) : json(b.upper)}};
}

json to_json(const ReflectionResult& r) {
    return {{"q", r.q},
            {"gamma_q", r.gamma_q},
            {"gamma_reflected", r.gamma_reflected},
            {"discrepancy", r.discrepancy},
            {"combined_se", r.combined_se}};
}

json to_json(const StepEstimateReport& r) {
    return {{"samples", r.samples}, {"violations", r.violations}, {"worst_margin", r.worst_margin}};
}

json to_json(const BetaEstimate& b) {
    return {{"value", b.value},
            {"standard_error", b.standard_error},
            {"search_value", b.search_value},
            {"n_inner", b.n_inner},
            {"n_starts", b.n_starts},
            {"refine_iters", b.refine_iters}};
}

json to_json(const BetaExact& b) {
    return {{"value", b.value}, {"lower_bound", b.lower_bound}, {"formula", b.formula}};
}

json to_json(const HypothesisVerdict& v) {
    if (!v.evaluated) return {{"evaluated", false}, {"detail", v.detail}};
    return {{"evaluated", true}, {"pass", v.pass}, {"margin", v.margin}, {"detail", v.detail}};
}

json to_json(const HypothesisReport& r) {
    return {{"lambda", r.lambda},
            {"q", r.q},
            {"beta", r.beta},
            {"beta_provenance", r.beta_provenance},
            {"eta", r.eta},
            {"theta", r.theta},
            {"theta_below_one", r.theta_below_one},
            {"H1", to_json(r.h1)},
            {"H2", to_json(r.h2)},
            {"H3", to_json(r.h3)},
            {"H4", to_json(r.h4)},
            {"H5", to_json(r.h5)},
            {"H5_middle", to_json(r.h5_middle)},
            {"T0", r.t0},
            {"theorem_bound", r.theorem_bound},
            {"all_pass", r.all_pass()}};
}

json to_json(const EigPerturbationReport& r) {
    return {{"e0", r.e0},
            {"e0_exact", r.e0_exact},
            {"e0_second_order", r.e0_second_order},
            {"residual", r.residual},
            {"bound", r.bound},
            {"gap_big", r.gap_big},
            {"gap_small", r.gap_small},
            {"lambda", r.lambda},
            {"holds", r.holds()}};
}

json to_json(const CheckResult& c) {
    json params = json::object();
    for (const auto& [k, v] : c.parameters) params[k] = v;
    return {{"name", c.name},
            {"reference", c.reference},
            {"samples", c.samples},
            {"violations", c.violations},
            {"worst_margin", std::isfinite(c.worst_margin) ? json(c.worst_margin) : json(nullptr)},
            {"tolerance", c.tolerance},
            {"parameters", params},
            {"seed", c.seed},
            {"passed", c.passed()}};
}

json to_json(const Scorecard& s) {
    json checks = json::array();
    for (const CheckResult& c : s.checks) checks.push_back(to_json(c));
    return {{"seed", s.seed}, {"checks", checks}, {"total_violations", s.total_violations()}, {"passed", s.passed()}};
}

json to_json(const AuditConfig& c) {
    return {{"samples", c.samples},
            {"dims", c.dims},
            {"x_norm_bound", c.x_norm_bound},
            {"y_norm_bound", c.y_norm_bound},
            {"z_norm_bound", c.z_norm_bound},
            {"step_slack_scale", c.step_slack_scale},
            {"step_lambda", c.step_lambda},
            {"step_dim", c.step_dim},
            {"beta_inner", c.beta_inner},
            {"beta_starts", c.beta_starts},
            {"beta_refine", c.beta_refine},
            {"movement_trajectories", c.movement_trajectories},
            {"movement_steps", c.movement_steps},
            {"movement_lambda", c.movement_lambda},
            {"third_order_triples", c.third_order_triples},
            {"hamiltonian_lambda", c.hamiltonian_lambda}};
}

AuditConfig audit_config_from_json(const json& j) {
    AuditConfig c;
    c.samples = field_or(j, "samples", c.samples);
    c.dims = field_or(j, "dims", c.dims);
    c.x_norm_bound = field_or(j, "x_norm_bound", c.x_norm_bound);
    c.y_norm_bound = field_or(j, "y_norm_bound", c.y_norm_bound);
    c.z_norm_bound = field_or(j, "z_norm_bound", c.z_norm_bound);
    c.step_slack_scale = field_or(j, "step_slack_scale", c.step_slack_scale);
    c.step_lambda = field_or(j, "step_lambda", c.step_lambda);
    c.step_dim = field_or(j, "step_dim", c.step_dim);
    c.beta_inner = field_or(j, "beta_inner", c.beta_inner);
    c.beta_starts = field_or(j, "beta_starts", c.beta_starts);
    c.beta_refine = field_or(j, "beta_refine", c.beta_refine);
    c.movement_trajectories = field_or(j, "movement_trajectories", c.movement_trajectories);
    c.movement_steps = field_or(j, "movement_steps", c.movement_steps);
    c.movement_lambda = field_or(j, "movement_lambda", c.movement_lambda);
    c.third_order_triples = field_or(j, "third_order_triples", c.third_order_triples);
    c.hamiltonian_lambda = field_or(j, "hamiltonian_lambda", c.hamiltonian_lambda);
    if (c.samples < 0) throw std::invalid_argument("field 'samples' must be >= 0");
    for (int d : c.dims)
        if (d < 4 || d > 16) throw std::invalid_argument("field 'dims': dimensions must lie in [4, 16]");
    return c;
}

std::string region_flags(const RegionLabel& label) {
    std::vector<std::string> parts;
    if (label.in_overwhelming) parts.emplace_back("O");
    if (label.cone_index) parts.push_back("C" + std::to_string(*label.cone_index));
    if (label.anticone_index) parts.push_back("A" + std::to_string(*label.anticone_index));
    for (int m : label.steps) parts.push_back("S" + std::to_string(m));
    if (label.interspace) parts.push_back("I" + std::to_string(*label.interspace));
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += '|';
        out += parts[i];
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
    os << "time,d,norm_a,norm_gup,flags\n";
    std::ostringstream line;
    line.precision(17);
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        line.str("");
        line << rec.times[i] << ',' << rec.d_values[i] << ',' << rec.norm_a[i] << ',' << rec.norm_gup[i] << ',';
        if (i < rec.labels.size()) line << region_flags(rec.labels[i]);
        os << line.str() << '\n';
    }
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

}  // namespace grds
