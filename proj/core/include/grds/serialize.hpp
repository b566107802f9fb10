#pragma once

#include "grds/dynamics.hpp"
#include "grds/ensembles.hpp"
#include "grds/lyapunov.hpp"
#include "grds/partition.hpp"
#include "grds/perturbation.hpp"
#include "grds/verification.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace grds {

using json = nlohmann::json;

// Version of every JSON document written by the library and the command-line tool.
inline constexpr int schema_version = 1;

json to_json(const cmat& m);  // nested [re, im] pairs, row-major
cmat cmat_from_json(const json& j);

json to_json(const StabilitySpec& stability);
StabilitySpec stability_from_json(const json& j);

// Custom ensembles round-trip only for the built-in "zero" sampler.
json to_json(const Ensemble& e);
Ensemble ensemble_from_json(const json& j);

json to_json(const ModelSpec& m);
ModelSpec model_from_json(const json& j);

json to_json(const ExpectedD& d);
json to_json(const LyapunovEstimate& e);
json to_json(const LyapunovBounds& b);
json to_json(const ReflectionResult& r);
json to_json(const StepEstimateReport& r);
json to_json(const BetaEstimate& b);
json to_json(const BetaExact& b);
json to_json(const HypothesisVerdict& v);
json to_json(const HypothesisReport& r);
json to_json(const EigPerturbationReport& r);
json to_json(const CheckResult& c);
json to_json(const Scorecard& s);
json to_json(const AuditConfig& c);
AuditConfig audit_config_from_json(const json& j);

// Region flags of one recorded state: "O" (overwhelming), "C<m>" (first cone), "A<m>" (last
// anti-cone), "S<m>" (steps), "I<m>" (interspace), joined by '|'. Empty for unlabelled records.
std::string region_flags(const RegionLabel& label);

// Columns: time,d,norm_a,norm_gup,flags.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);

// Stable text form: keys sorted, two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace grds
