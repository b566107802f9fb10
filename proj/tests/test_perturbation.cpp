#include "grds/audits.hpp"
#include "grds/perturbation.hpp"
#include "grds/rng.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace grds;
using grds::test::max_abs;
using grds::test::near;
using grds::test::real_matrix;

namespace {

cmat unit_ball_matrix(int n, Stream& s) {
    const cmat g = s.gaussian_matrix(n, n);
    return g / (operator_norm(g) * (1.0 + s.uniform()));
}

GrassmannPair random_pair(int n, int rank_w, Stream& s) {
    const cmat f = random_frame(n, rank_w + 1, s);
    return {Projection::from_isometry(f.leftCols(rank_w)), f.col(rank_w)};
}

}  // namespace

TEST(ExpansionMaps, HandEvaluatedX) {
    const cmat q = real_matrix({{1, 0}, {0, 0}});
    const cmat p = real_matrix({{0, 0}, {1, 0}});
    const cmat x = expansion_x(q, p);
    EXPECT_TRUE(near(x, real_matrix({{0, 1}, {1, 0}}), 0.0));
    EXPECT_NEAR(operator_norm(x), 1.0, 1e-15);
}

TEST(ExpansionMaps, TrivialProjectionsGiveZero) {
    Stream s(1);
    for (int n : {3, 6}) {
        const cmat p = unit_ball_matrix(n, s);
        for (const cmat& q : {cmat(cmat::Zero(n, n)), cmat(cmat::Identity(n, n))}) {
            EXPECT_EQ(max_abs(expansion_x(q, p)), 0.0);
            EXPECT_EQ(max_abs(expansion_y(q, p)), 0.0);
        }
    }
}

TEST(ExpansionMaps, ReconstructsAntiHermitianAction) {
    Stream s(2);
    const cmat g = s.gaussian_matrix(5, 5);
    cmat p = g - g.adjoint();
    p /= operator_norm(p);
    const Projection q = Projection::from_isometry(random_frame(5, 2, s));
    const ExpansionTriple t = expansion_maps(q, p, 0.01);
    const cmat rebuilt = q.matrix() + 0.01 * t.x + 1e-4 * t.y + 1e-6 * t.z;
    EXPECT_TRUE(near(rebuilt, act_projection(matrix_exponential(0.01 * p), q).matrix(), 1e-12));
    EXPECT_LE(t.reconstruction_error, 1e-12);
}

TEST(ExpansionMaps, SecondOrderMatchesFiniteDifference) {
    // (e^{lP}.Q - Q - l X) / l^2 = Y + l Z with ||Z|| <= 20, computed without expansion_maps.
    Stream s(3);
    const double lam = 1e-4;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 5;
        const cmat p = unit_ball_matrix(n, s);
        const Projection q = Projection::from_isometry(random_frame(n, 1 + trial % (n - 1), s));
        const cmat qm = q.matrix();
        const cmat moved = act_projection(matrix_exponential(lam * p), q).matrix();
        const cmat second = (moved - qm - lam * expansion_x(qm, p)) / (lam * lam);
        EXPECT_TRUE(near(second, expansion_y(qm, p), 20.0 * lam + 1e-6));
    }
}

TEST(ExpansionMaps, NormBoundsOnRandomDraws) {
    Stream s(4);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 9;
        const cmat p = unit_ball_matrix(n, s);
        const Projection q = Projection::from_isometry(random_frame(n, 1 + trial % (n - 1), s));
        const double lam = std::ldexp(1.0, -6) * s.uniform(1e-3, 1.0);
        const ExpansionTriple t = expansion_maps(q, p, lam);
        EXPECT_LE(operator_norm(t.x), 1.0 + 1e-9);
        EXPECT_LE(operator_norm(t.y), 1.5 + 1e-9);
        EXPECT_LE(operator_norm(t.z), 20.0 + 1e-6);
        EXPECT_LE(t.reconstruction_error, 1e-12);
    }
}

TEST(ExpansionMaps, RankCertificates) {
    Stream s(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 6 + trial % 5;
        const int k = 1 + trial % 2, added = 1 + trial % 2;
        const cmat f = random_frame(n, k + added, s);
        const Projection q = Projection::from_isometry(f.leftCols(k));
        const Projection q_added = Projection::from_isometry(f.rightCols(added));
        const double lam = std::exp(s.uniform(std::log(std::ldexp(1.0, -12)), std::log(std::ldexp(1.0, -6))));
        const ExpansionRankCertificate c = expansion_rank_certificate(q, q_added, unit_ball_matrix(n, s), lam);
        EXPECT_EQ(c.added_rank, added);
        EXPECT_TRUE(c.holds()) << "ranks " << c.rank_x << " " << c.rank_y << " " << c.rank_z;
    }
}

TEST(ExpansionMaps, Errors) {
    Stream s(6);
    const Projection q = Projection::from_isometry(random_frame(4, 2, s));
    const cmat p = unit_ball_matrix(4, s);
    EXPECT_THROW(expansion_maps(q, p, 0.0), std::invalid_argument);
    EXPECT_THROW(expansion_maps(q, p, 0.02), std::invalid_argument);
    EXPECT_THROW(expansion_maps(q, 2.0 * p / operator_norm(p), 0.01), std::invalid_argument);
    EXPECT_THROW(expansion_maps(q, unit_ball_matrix(5, s), 0.01), std::invalid_argument);
}

TEST(VectorExpansion, ZeroPerturbation) {
    Stream s(7);
    const GrassmannPair p = random_pair(6, 2, s);
    const VectorExpansionReport r = vector_expansion_a(p, cmat::Zero(6, 6), random_frame(6, 3, s), 1e-3);
    EXPECT_EQ(r.a, 0.0);
    EXPECT_NEAR(r.change, 0.0, 1e-14);
    EXPECT_TRUE(r.holds());
}

TEST(VectorExpansion, EmptyWMatchesDirectFormula) {
    Stream s(8);
    for (int trial = 0; trial < 20; ++trial) {
        const GrassmannPair p{Projection::zero(5), s.random_unit_vector(5)};
        const cmat pert = unit_ball_matrix(5, s);
        const cmat psi = random_frame(5, 2, s);
        const VectorExpansionReport r = vector_expansion_a(p, pert, psi, 1e-4);
        const double direct = (psi.adjoint() * expansion_x(p.v * p.v.adjoint(), pert) * psi).trace().real();
        EXPECT_NEAR(r.a, direct, 1e-13);
    }
}

TEST(VectorExpansion, InequalitiesOnRandomDraws) {
    Stream s(9);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 3 + trial % 8;
        const GrassmannPair p = random_pair(n, trial % (n - 1), s);
        const VectorExpansionReport r =
            vector_expansion_a(p, unit_ball_matrix(n, s), random_frame(n, 1 + trial % (n - 1), s), 1e-4);
        EXPECT_TRUE(r.holds()) << "a = " << r.a << ", change = " << r.change
                               << ", residual = " << r.first_order_residual;
    }
}

TEST(VectorExpansion, ShapeMismatch) {
    Stream s(10);
    const GrassmannPair p = random_pair(5, 1, s);
    EXPECT_THROW(vector_expansion_a(p, unit_ball_matrix(4, s), random_frame(5, 1, s), 1e-4), std::invalid_argument);
    EXPECT_THROW(vector_expansion_a(p, unit_ball_matrix(5, s), random_frame(4, 1, s), 1e-4), std::invalid_argument);
}

TEST(EigPerturb, TwoByTwoClosedForm) {
    const double lam = 0.01;
    const EigPerturbationReport r =
        eig_perturb(real_matrix({{0, 0}, {0, 1}}), real_matrix({{0, 1}, {1, 0}}), cmat::Zero(2, 2), lam);
    EXPECT_NEAR(r.e0_exact, (1.0 - std::sqrt(1.0 + 4.0 * lam * lam)) / 2.0, 1e-16);
    EXPECT_NEAR(r.e0_second_order, -lam * lam, 1e-18);
    // e0_exact + l^2 = l^4 + O(l^6), so the residual is l + O(l^3).
    EXPECT_NEAR(r.residual, lam, 1e-5);
    EXPECT_TRUE(r.holds());
    EXPECT_DOUBLE_EQ(r.gap_big, 1.0);
}

TEST(EigPerturb, NoPerturbationHasZeroResidual) {
    Stream s(11);
    const HamiltonianTriple t = random_hamiltonian_triple(5, s);
    for (double lam : {1e-3, 1e-2}) {
        const EigPerturbationReport r = eig_perturb(t.h0, cmat::Zero(5, 5), cmat::Zero(5, 5), lam);
        EXPECT_EQ(r.residual, 0.0);
        EXPECT_TRUE(r.holds());
    }
}

TEST(EigPerturb, BoundOnRandomTriples) {
    Stream s(12);
    int evaluated = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const HamiltonianTriple t = random_hamiltonian_triple(2 + trial % 7, s);
        try {
            const EigPerturbationReport r = eig_perturb(t.h0, t.h1, t.h2, std::ldexp(1.0, -10));
            EXPECT_TRUE(r.holds()) << "residual " << r.residual << " bound " << r.bound;
            ++evaluated;
        } catch (const eig_perturbation_error&) {
        }
    }
    EXPECT_GT(evaluated, 200);
}

TEST(EigPerturb, ThirdOrderConvergence) {
    Stream s(13);
    int in_window = 0, evaluated = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const HamiltonianTriple t = random_hamiltonian_triple(2 + trial % 7, s);
        try {
            const EigPerturbationReport a = eig_perturb(t.h0, t.h1, t.h2, std::ldexp(1.0, -10));
            const EigPerturbationReport b = eig_perturb(t.h0, t.h1, t.h2, std::ldexp(1.0, -11));
            // |e0 - e0_2| = l^3 |residual|.
            const double slope = 3.0 + std::log2(std::abs(a.residual) / std::abs(b.residual));
            EXPECT_GE(slope, 2.5);
            if (slope <= 3.5) ++in_window;
            ++evaluated;
        } catch (const eig_perturbation_error&) {
        }
    }
    ASSERT_GT(evaluated, 50);
    EXPECT_GE(in_window, evaluated * 9 / 10);
}

TEST(EigPerturb, Errors) {
    const cmat h0 = real_matrix({{0, 0}, {0, 1}});
    const cmat h1 = real_matrix({{0, 1}, {1, 0}});
    const cmat z = cmat::Zero(2, 2);
    EXPECT_THROW(eig_perturb(h0, h1, z, 0.0), eig_perturbation_error);
    EXPECT_THROW(eig_perturb(h0, real_matrix({{0, 1}, {0, 0}}), z, 0.01), eig_perturbation_error);
    EXPECT_THROW(eig_perturb(cmat::Zero(2, 2), h1, z, 0.01), eig_perturbation_error);  // degenerate E0
    EXPECT_THROW(eig_perturb(h0, h1, cmat::Zero(3, 3), 0.01), eig_perturbation_error);
    // g = |E0(l) - E0| too large relative to G.
    EXPECT_THROW(eig_perturb(h0, h1, z, 0.9), eig_perturbation_error);
}

TEST(EigPerturb, PinnedPhases) {
    Stream s(14);
    cmat v = random_frame(4, 3, s);
    const cmat before = v;
    pin_phases(v);
    for (int k = 0; k < 3; ++k) {
        Eigen::Index i = 0;
        v.col(k).cwiseAbs().maxCoeff(&i);
        EXPECT_NEAR(v(i, k).imag(), 0.0, 1e-15);
        EXPECT_GT(v(i, k).real(), 0.0);
        EXPECT_NEAR(std::abs(before.col(k).dot(v.col(k))), 1.0, 1e-14);
    }
}
