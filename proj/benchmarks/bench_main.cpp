#include "grds/grds.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace grds;

namespace {

ModelSpec toeplitz(int dim, double lambda, int q) {
    const ToeplitzModel t = make_toeplitz_model(dim, 3.0, OmegaLaw::uniform_pm1);
    return make_model(t.kappa, 1, dim - 1 - q, q, t.ensemble, lambda, q);
}

void BM_MatrixExponential(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Stream s(1);
    const cmat p = s.gaussian_matrix(n, n) / std::sqrt(static_cast<double>(n));
    for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(1e-3 * p));
}
BENCHMARK(BM_MatrixExponential)->Arg(4)->Arg(8)->Arg(16);

void BM_ActProjection(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Stream s(2);
    const cmat t = s.gaussian_matrix(n, n) + 3.0 * cmat::Identity(n, n);
    const Projection q = Projection::from_isometry(random_frame(n, n / 2, s));
    for (auto _ : state) benchmark::DoNotOptimize(act_projection(t, q));
}
BENCHMARK(BM_ActProjection)->Arg(4)->Arg(8)->Arg(16);

// One step of the Toeplitz dynamics on an L x q frame: structured fast path.
void BM_StepperAdvance(benchmark::State& state) {
    const ModelSpec m = toeplitz(static_cast<int>(state.range(0)), 1e-3, 1);
    const Stepper stepper(m);
    Stream s(3);
    cmat x = random_frame(m.dim(), 1, s), work(m.dim(), 1);
    for (auto _ : state) {
        stepper.advance(s, x, work);
        x /= x.norm();
    }
}
BENCHMARK(BM_StepperAdvance)->Arg(7)->Arg(15);

void BM_ExpectedD(benchmark::State& state) {
    const ModelSpec m = toeplitz(7, 1e-3, 1);
    const Projection q0 = unstable_initial_projection(m.stability, 1);
    for (auto _ : state) {
        Stream s(4);
        benchmark::DoNotOptimize(estimate_expected_d(m, q0, 10000, 4, s));
    }
    state.SetItemsProcessed(state.iterations() * 40000);
}
BENCHMARK(BM_ExpectedD)->Unit(benchmark::kMillisecond);

void BM_PartialSums(benchmark::State& state) {
    const ModelSpec m = toeplitz(7, 1e-3, 1);
    LyapunovOptions opt;
    opt.q_max = static_cast<int>(state.range(0));
    opt.steps = 10000;
    opt.burn_in = 0;
    for (auto _ : state) {
        Stream s(5);
        benchmark::DoNotOptimize(estimate_partial_sums(m, opt, s));
    }
    state.SetItemsProcessed(state.iterations() * opt.steps);
}
BENCHMARK(BM_PartialSums)->Arg(1)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_ExpansionMaps(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Stream s(6);
    const Projection q = Projection::from_isometry(random_frame(n, n / 2, s));
    cmat p = s.gaussian_matrix(n, n);
    p /= operator_norm(p);
    for (auto _ : state) benchmark::DoNotOptimize(expansion_maps(q, p, 1.0 / 256.0));
}
BENCHMARK(BM_ExpansionMaps)->Arg(4)->Arg(8)->Arg(12);

void BM_EigPerturb(benchmark::State& state) {
    Stream s(7);
    const HamiltonianTriple t = random_hamiltonian_triple(static_cast<int>(state.range(0)), s);
    for (auto _ : state) benchmark::DoNotOptimize(eig_perturb(t.h0, t.h1, t.h2, std::ldexp(1.0, -10)));
}
BENCHMARK(BM_EigPerturb)->Arg(4)->Arg(8);

void BM_BetaMonteCarlo(benchmark::State& state) {
    const ModelSpec m = toeplitz(5, 1e-4, 1);
    BetaOptions opt;
    opt.n_inner = 500;
    opt.n_starts = 2;
    opt.refine_iters = 5;
    for (auto _ : state) {
        Stream s(8);
        benchmark::DoNotOptimize(beta_monte_carlo(m, opt, s));
    }
}
BENCHMARK(BM_BetaMonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
