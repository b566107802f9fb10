#include "grds/ensembles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace grds;
using grds::test::near;

TEST(Toeplitz, KappaFromFourierDiagonal) {
    const ToeplitzModel m = make_toeplitz_model(5, 3.0, OmegaLaw::uniform_pm1);
    const double c1 = 3.0 - 2.0 * std::cos(2.0 * std::numbers::pi / 5.0);
    const double c2 = 3.0 - 2.0 * std::cos(4.0 * std::numbers::pi / 5.0);
    ASSERT_EQ(m.kappa.size(), 5u);
    EXPECT_NEAR(m.kappa[4], 1.0, 1e-14);
    EXPECT_NEAR(m.kappa[3], 2.382, 1e-3);
    EXPECT_NEAR(m.kappa[2], c1, 1e-14);
    EXPECT_NEAR(m.kappa[1], c2, 1e-14);
    EXPECT_NEAR(m.kappa[0], 4.618, 1e-3);
}

TEST(Toeplitz, FourierConjugatesLaplacianToDiagonal) {
    const int n = 7;
    const double shift = 3.0;
    const ToeplitzModel m = make_toeplitz_model(n, shift, OmegaLaw::uniform_pm1);
    cmat lap = shift * cmat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
        lap(i, (i + 1) % n) -= 1.0;
        lap(i, (i + n - 1) % n) -= 1.0;
    }
    const cmat f = m.ensemble.fourier;
    cmat diag = cmat::Zero(n, n);
    for (int r = 0; r < n; ++r) diag(r, r) = m.kappa[n - 1 - r];
    EXPECT_TRUE(near(f.adjoint() * f, cmat::Identity(n, n), 1e-13));
    EXPECT_TRUE(near(f.adjoint() * lap * f, diag, 1e-13));
}

TEST(Toeplitz, LadderIsValidForEveryOddL) {
    for (int n = 1; n <= 41; n += 2) {
        const ToeplitzModel m = make_toeplitz_model(n, 2.5, OmegaLaw::uniform_pm1);
        EXPECT_NO_THROW(make_stability(m.kappa, 0, n, 0)) << "L = " << n;
        // Frequencies k and L - k share one eigenvalue.
        for (int i = 0; i + 1 < n; i += 2) EXPECT_EQ(m.kappa[i], m.kappa[i + 1]) << "L = " << n << ", i = " << i;
        EXPECT_NEAR(m.kappa[n - 1], 0.5, 1e-15);
    }
}

TEST(Toeplitz, InvalidParameters) {
    EXPECT_THROW(make_toeplitz_model(4, 3.0, OmegaLaw::uniform_pm1), std::invalid_argument);
    EXPECT_THROW(make_toeplitz_model(5, 2.0, OmegaLaw::uniform_pm1), std::invalid_argument);
    EXPECT_THROW(make_toeplitz_model(5, 3.0, OmegaLaw::bernoulli_pm1, 1.5), std::invalid_argument);
}

TEST(Ensembles, DrawsAreContractionsWithZeroMean) {
    const int n = 5;
    const ToeplitzModel t = make_toeplitz_model(n, 3.0, OmegaLaw::uniform_interval, 0.7);
    for (const Ensemble& e : {make_iid_ensemble(n), make_haar_ensemble(n), t.ensemble}) {
        Stream s(31);
        cmat mean = cmat::Zero(n, n);
        const int draws = 4000;
        for (int i = 0; i < draws; ++i) {
            const cmat p = e.draw(s);
            EXPECT_LE(operator_norm(p), 1.0 + 1e-12);
            mean += p;
        }
        mean /= draws;
        // Entries have variance at most 1, so the mean is within a few 1/sqrt(draws).
        EXPECT_LT(grds::test::max_abs(mean), 5.0 / std::sqrt(static_cast<double>(draws))) << to_string(e.kind);
    }
}

TEST(Ensembles, HaarRejectsLargeFactors) {
    EXPECT_THROW(make_haar_ensemble(2.0 * cmat::Identity(3, 3), cmat::Identity(3, 3)), std::invalid_argument);
    const Ensemble zero = make_haar_ensemble(cmat::Zero(3, 3), cmat::Identity(3, 3));
    Stream s(1);
    EXPECT_EQ(grds::test::max_abs(zero.draw(s)), 0.0);
}

TEST(Ensembles, KindRoundTripStrings) {
    for (EnsembleKind k : {EnsembleKind::haar_product, EnsembleKind::toeplitz_fourier, EnsembleKind::iid_entries})
        EXPECT_EQ(ensemble_kind_from_string(to_string(k)), k);
    EXPECT_THROW(ensemble_kind_from_string("gaussian"), std::invalid_argument);
}

TEST(Stepper, LambdaZeroAndZeroEnsembleGiveR) {
    const std::vector<double> kappa{3.0, 2.0, 1.5, 1.0};
    const ModelSpec frozen = make_model(kappa, 1, 2, 1, make_iid_ensemble(4), 0.0, 1);
    const ModelSpec zero = make_model(kappa, 1, 2, 1, make_zero_ensemble(4), 0.1, 1);
    Stream s(2);
    for (int i = 0; i < 5; ++i) {
        EXPECT_TRUE(near(Stepper(frozen).matrix(s), frozen.stability.r_matrix(), 0.0));
        EXPECT_TRUE(near(Stepper(zero).matrix(s), zero.stability.r_matrix(), 1e-15));
    }
}

TEST(Stepper, MatrixAndAdvanceConsumeIdentically) {
    const ToeplitzModel t = make_toeplitz_model(7, 3.0, OmegaLaw::uniform_pm1);
    const std::vector<ModelSpec> models{
        make_model(t.kappa, 2, 3, 2, t.ensemble, 0.05, 2),
        make_model({3.0, 2.5, 2.0, 1.5, 1.0}, 1, 2, 2, make_iid_ensemble(5), 0.05, 2),
    };
    for (const ModelSpec& m : models) {
        const Stepper st(m);
        Stream a(9), b(9);
        cmat x = Stream(3).gaussian_matrix(m.dim(), 2), work;
        cmat y = x;
        for (int step = 0; step < 10; ++step) {
            st.advance(a, x, work);
            y = st.matrix(b) * y;
        }
        EXPECT_TRUE(near(x, y, 1e-10 * grds::test::max_abs(y)));
        EXPECT_EQ(a.bits(), b.bits());
    }
}

TEST(Stepper, StructuredMatrixMatchesExponential) {
    const ToeplitzModel t = make_toeplitz_model(5, 3.0, OmegaLaw::uniform_pm1);
    const ModelSpec m = make_model(t.kappa, 1, 2, 2, t.ensemble, 0.1, 1);
    Stream a(4), b(4);
    const cmat p = m.ensemble.draw(a);
    const cmat expected = matrix_exponential(0.1 * p) * m.stability.r_matrix();
    EXPECT_TRUE(near(Stepper(m).matrix(b), expected, 1e-13));
}

TEST(Stepper, Deterministic) {
    const ModelSpec m = make_model({2.0, 1.5, 1.0}, 1, 1, 1, make_haar_ensemble(3), 0.2, 1);
    Stream a(5), b(5);
    EXPECT_TRUE(near(Stepper(m).matrix(a), Stepper(m).matrix(b), 0.0));
}

TEST(BetaExact, ToyModels) {
    const ToeplitzModel t = make_toeplitz_model(5, 3.0, OmegaLaw::uniform_pm1);
    const ModelSpec toe = make_model(t.kappa, 1, 2, 2, t.ensemble, 1e-4, 1);
    const auto b = beta_exact(toe);
    ASSERT_TRUE(b.has_value());
    EXPECT_DOUBLE_EQ(b->value, 0.4);
    EXPECT_FALSE(b->lower_bound);

    const ModelSpec toe2 = make_model(t.kappa, 1, 2, 2, t.ensemble, 1e-4, 2);
    EXPECT_FALSE(beta_exact(toe2).has_value());

    const ModelSpec haar = make_model({4.0, 3.0, 2.0, 1.0}, 1, 1, 2, make_haar_ensemble(4), 1e-4, 1);
    const auto h = beta_exact(haar);
    ASSERT_TRUE(h.has_value());
    EXPECT_NEAR(h->value, 0.5, 1e-14);
    EXPECT_TRUE(h->lower_bound);
}

TEST(BetaMonteCarlo, ZeroEnsembleGivesZero) {
    const ModelSpec m = make_model({3.0, 2.0, 1.5, 1.0}, 1, 1, 2, make_zero_ensemble(4), 1e-4, 1);
    Stream s(6);
    BetaOptions opt;
    opt.n_inner = 200;
    opt.n_starts = 2;
    opt.refine_iters = 3;
    const BetaEstimate e = beta_monte_carlo(m, opt, s);
    EXPECT_EQ(e.value, 0.0);
}

TEST(BetaMonteCarlo, ToeplitzWithinThreeStandardErrors) {
    const ToeplitzModel t = make_toeplitz_model(5, 3.0, OmegaLaw::uniform_pm1);
    const ModelSpec m = make_model(t.kappa, 1, 2, 2, t.ensemble, 1e-4, 1);
    BetaOptions opt;
    opt.n_inner = 1500;
    opt.n_starts = 4;
    opt.refine_iters = 20;
    Stream s(8);
    const BetaEstimate e = beta_monte_carlo(m, opt, s);
    EXPECT_LE(std::abs(e.value - 0.4), 3.0 * e.standard_error);
    EXPECT_LE(e.search_value, e.value + 5.0 * e.standard_error);
}

TEST(BetaMonteCarlo, ThreadCountDoesNotChangeResult) {
    const ModelSpec m = make_model({3.0, 2.5, 2.0, 1.5, 1.0}, 1, 2, 2, make_iid_ensemble(5), 1e-4, 2);
    BetaOptions opt;
    opt.n_inner = 300;
    opt.n_starts = 3;
    opt.refine_iters = 4;
    Stream a(10), b(10);
    opt.threads = 1;
    const BetaEstimate e1 = beta_monte_carlo(m, opt, a);
    opt.threads = 3;
    const BetaEstimate e3 = beta_monte_carlo(m, opt, b);
    EXPECT_EQ(e1.value, e3.value);
    EXPECT_EQ(e1.standard_error, e3.standard_error);
}
