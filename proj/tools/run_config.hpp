#pragma once

#include "grds/grds.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grds::cli {

using grds::to_json;

// Model block shared by the simulate, lyapunov, beta and check commands.
//  toeplitz: kappa from the Fourier diagonal s - 2cos(2 pi k / L) (L odd, s > 2)
//  iid, haar, zero: kappa given explicitly, or kappa_I = s^{(L - I)/(L - 1)} when empty
// The partition is la rows of alpha, lc rows of gamma (0 means lc = q), the rest in beta.
struct ModelConfig {
    std::string model = "toeplitz";
    int L = 7;
    double s = 3.0;
    std::vector<double> kappa;
    int la = 1;
    int lc = 0;
    double lambda = 1e-4;
    int q = 1;
    std::string omega_law = "uniform_pm1";
    double omega_param = 0.5;
};

struct SimulateConfig {
    ModelConfig model;
    long T = 100000;
    int traj = 200;
    std::string init = "unstable";  // unstable: first q rows; stable: last q rows
    long record_every = 100;
    std::uint64_t seed = 0;
};

struct LyapunovConfig {
    ModelConfig model;  // partial sums are reported for q' = 1, ..., model.q
    long T = 100000;
    long burn_in = 1000;
    int batches = 20;
    int replicas = 1;
    bool reflect = false;
    std::uint64_t seed = 0;
};

struct BetaConfig {
    ModelConfig model;
    int inner = 2000;
    int starts = 8;
    int refine = 30;
    bool dual = false;
    std::uint64_t seed = 0;
};

struct CheckConfig {
    ModelConfig model;  // lambda and q are taken from here
    double beta = 0.0;
    std::optional<double> eta;  // when set, the gap comes from eta and H5 is not evaluated
};

struct VerifyRunConfig {
    AuditConfig audit;
    std::optional<std::vector<std::string>> checks;
    std::uint64_t seed = 0;
};

struct PerturbConfig {
    int L = 4;
    double lambda = 1.0 / 1024.0;
    // Explicit Hermitian H0, H1, H2; when absent a random admissible triple is drawn from the seed.
    std::optional<cmat> h0, h1, h2;
    std::uint64_t seed = 0;
};

json to_json(const ModelConfig& c);
json to_json(const SimulateConfig& c);
json to_json(const LyapunovConfig& c);
json to_json(const BetaConfig& c);
json to_json(const CheckConfig& c);
json to_json(const VerifyRunConfig& c);
json to_json(const PerturbConfig& c);

// Parsers start from `base` and override every field present in j; unknown keys are errors.
ModelConfig parse_model(const json& j, ModelConfig base = {});
SimulateConfig parse_simulate(const json& j, SimulateConfig base = {});
LyapunovConfig parse_lyapunov(const json& j, LyapunovConfig base = {});
BetaConfig parse_beta(const json& j, BetaConfig base = {});
CheckConfig parse_check(const json& j, CheckConfig base = {});
VerifyRunConfig parse_verify(const json& j, VerifyRunConfig base = {});
PerturbConfig parse_perturb(const json& j, PerturbConfig base = {});

ModelSpec build_model(const ModelConfig& c);

json run_simulate(const SimulateConfig& c, unsigned threads, TrajectoryRecord* sample_path = nullptr);
json run_lyapunov(const LyapunovConfig& c, unsigned threads);
json run_beta(const BetaConfig& c, unsigned threads);
json run_check(const CheckConfig& c);
json run_verify(const VerifyRunConfig& c, unsigned threads, bool* passed = nullptr);
json run_perturb(const PerturbConfig& c);

}  // namespace grds::cli
