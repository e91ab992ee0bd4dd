#include "barrier_mbrl/learner.hpp"

#include <gtest/gtest.h>

#include "frozen_values.hpp"
#include "test_support.hpp"

using namespace barrier_mbrl;
using testing_support::f16_plant;
using testing_support::Gen;
using testing_support::rel_err;
using testing_support::vec;

namespace {

CostSpec f16_cost() { return {10.0 * Matrix::Identity(3, 3), Matrix::Identity(1, 1)}; }

LearnerState unit_learner() { return {Vector::Ones(6), Matrix::Identity(6, 6), Vector::Ones(6)}; }

ExtrapolationSet f16_grid() { return grid_extrapolation_points(Vector::Zero(3), 0.08, 5); }

}  // namespace

TEST(QuadraticBasis, OrderingAndValues) {
    const QuadraticBasis basis(3);
    EXPECT_EQ(basis.size(), 6);
    EXPECT_EQ(basis.input_size(), 3);
    const Vector s = (Vector(3) << 2.0, 3.0, 5.0).finished();
    const Vector expected = (Vector(6) << 6, 10, 15, 4, 9, 25).finished();
    EXPECT_EQ(basis.value(s), expected);
    const Matrix grad = basis.gradient(s);
    const Matrix expected_grad = (Matrix(6, 3) << 3, 2, 0, 5, 0, 2, 0, 5, 3, 4, 0, 0, 0, 6, 0, 0, 0, 10).finished();
    EXPECT_EQ(grad, expected_grad);
    EXPECT_TRUE(basis.value(Vector::Zero(3)).isZero(0.0));
    EXPECT_TRUE(basis.gradient(Vector::Zero(3)).isZero(0.0));
    EXPECT_THROW((void)basis.value(Vector::Zero(2)), DimensionError);
    EXPECT_THROW(QuadraticBasis(0), InvalidArgument);
    EXPECT_EQ(QuadraticBasis(1).size(), 1);
    EXPECT_EQ(QuadraticBasis(4).size(), 10);
}

TEST(QuadraticBasisProperty, GradientMatchesFiniteDifferences) {
    Gen gen(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = gen.integer(1, 5);
        const QuadraticBasis basis(n);
        const Vector s = gen.vector(n, -3.0, 3.0);
        Matrix fd(basis.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Vector e = Vector::Unit(n, j) * 1e-5;
            fd.col(j) = (basis.value(s + e) - basis.value(s - e)) / 2e-5;
        }
        EXPECT_LE((fd - basis.gradient(s)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(FunctionBasis, ChecksZeroConditionsAndDimensions) {
    const auto value = [](const Vector& s) { return Vector(s.array().square()); };
    const auto grad = [](const Vector& s) { return Matrix(2.0 * s.asDiagonal()); };
    const FunctionBasis ok(2, 2, value, grad);
    EXPECT_EQ(ok.value(Vector::Ones(2)), Vector::Ones(2));
    const auto shifted = [](const Vector& s) { return Vector(s.array().square() + 1.0); };
    EXPECT_THROW(FunctionBasis(2, 2, shifted, grad), InvalidArgument);
    EXPECT_THROW(FunctionBasis(3, 2, value, grad), DimensionError);
    static_assert(ValueBasis<FunctionBasis>);
    static_assert(ValueBasis<QuadraticBasis>);
}

TEST(CostSpec, ValidatesWeights) {
    EXPECT_THROW(CostSpec(Matrix::Identity(2, 2), Matrix::Zero(1, 1)), InvalidArgument);
    EXPECT_THROW(CostSpec(-Matrix::Identity(2, 2), Matrix::Identity(1, 1)), InvalidArgument);
    EXPECT_THROW(CostSpec(Matrix::Ones(2, 3), Matrix::Identity(1, 1)), DimensionError);
    const CostSpec cost(Matrix::Identity(2, 2), 4.0 * Matrix::Identity(1, 1));
    EXPECT_DOUBLE_EQ(cost.R_inv()(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(cost.state_cost(Vector::Ones(2)), 2.0);
    EXPECT_DOUBLE_EQ(cost.control_cost(Vector::Constant(1, 0.5)), 1.0);
    EXPECT_THROW(cost.check_against(f16_plant()), DimensionError);
}

TEST(LearnerGains, AllGainsMustBePositive) {
    EXPECT_NO_THROW(LearnerGains{}.validate());
    for (int i = 0; i < 5; ++i) {
        LearnerGains g;
        double* fields[] = {&g.k_c, &g.k_a1, &g.k_a2, &g.beta, &g.gamma};
        *fields[i] = 0.0;
        EXPECT_THROW(g.validate(), InvalidArgument) << i;
        *fields[i] = NAN;
        EXPECT_THROW(g.validate(), InvalidArgument) << i;
    }
}

TEST(LearnerState, GammaMustBeSymmetricPositiveDefinite) {
    EXPECT_NO_THROW(unit_learner().validate());
    auto bad = unit_learner();
    bad.Gamma(0, 1) = 0.5;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = unit_learner();
    bad.Gamma(2, 2) = -1.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = unit_learner();
    bad.W_a = Vector::Ones(5);
    EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(Extrapolation, GridLayout) {
    const auto grid = f16_grid();
    ASSERT_EQ(grid.size(), 125u);
    EXPECT_EQ(grid.points.front(), Vector::Constant(3, -0.04));
    EXPECT_EQ(grid.points.back(), Vector::Constant(3, 0.04));
    EXPECT_EQ(grid.points[1], (Vector(3) << -0.04, -0.04, -0.02).finished());  // last axis fastest
    EXPECT_EQ(grid.points[62], Vector::Zero(3));
    EXPECT_NO_THROW(grid.validate(3, 1.0));
    EXPECT_THROW(grid.validate(3, 0.05), InvalidArgument);
    EXPECT_THROW(grid.validate(2, 1.0), DimensionError);
    EXPECT_THROW(ExtrapolationSet{}.validate(3, 1.0), InvalidArgument);
    EXPECT_THROW((void)grid_extrapolation_points(Vector::Zero(3), 0.08, 1), InvalidArgument);
    EXPECT_THROW((void)grid_extrapolation_points(Vector::Zero(3), -1.0, 3), InvalidArgument);
    EXPECT_THROW((void)grid_extrapolation_points(Vector::Zero(7), 1.0, 10), InvalidArgument);
}

TEST(Learner, PolicyOmegaAndBellmanErrorMatchReference) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    const Vector ones = Vector::Ones(6);
    EXPECT_LE(rel_err(policy_hat(Vector::Unit(3, 0) * 0.1, ones, plant, cost, basis), vec(frozen::kPolicyAt01)),
              1e-14);
    EXPECT_LE(rel_err(regressor_omega(Vector::Unit(3, 0) * 0.01, ones, plant, cost, basis),
                      vec(frozen::kOmegaAt001)),
              1e-14);
    EXPECT_NEAR(bellman_error_at(Vector::Constant(3, 0.01), ones, ones, plant, cost, basis), frozen::kBellmanAt001[0],
                1e-14);
    EXPECT_DOUBLE_EQ(value_hat(Vector::Constant(3, 1.0), ones, basis), 6.0);
}

TEST(Learner, UpdateLawsAtTheBenchmarkStartMatchReference) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    const LearnerGains gains;
    const auto learner = unit_learner();
    const auto grid = f16_grid();
    const auto critic = critic_rhs(learner, grid, plant, cost, basis, gains);
    EXPECT_LE(rel_err(critic.W_c_dot, vec(frozen::kCriticRhs0)), 1e-12);
    EXPECT_LE(rel_err(critic.Gamma_dot, vec(frozen::kGammaRhs0).reshaped<Eigen::RowMajor>(6, 6)), 1e-12);
    EXPECT_LE(rel_err(actor_rhs(learner, grid, plant, cost, basis, gains), vec(frozen::kActorRhs0)), 1e-12);
    const double pe = pe_metric(extrapolation_terms(learner, grid, plant, cost, basis, gains));
    EXPECT_NEAR(pe, frozen::kPe0[0], 1e-6 * frozen::kPe0[0]);
}

TEST(Learner, PeMetricOfOrthonormalRegressors) {
    std::vector<Vector> omegas;
    for (int i = 0; i < 4; ++i) omegas.push_back(Vector::Unit(4, i));
    EXPECT_DOUBLE_EQ(pe_metric(omegas, std::vector<double>(4, 1.0)), 0.25);
    EXPECT_DOUBLE_EQ(pe_metric(omegas, std::vector<double>(4, 2.0)), 0.0625);
    omegas.pop_back();
    EXPECT_EQ(pe_metric(omegas, std::vector<double>(3, 1.0)), 0.0);
    EXPECT_THROW((void)pe_metric(omegas, std::vector<double>(2, 1.0)), DimensionError);
    EXPECT_THROW((void)rho(Vector::Ones(2), 0.0), InvalidArgument);
    EXPECT_DOUBLE_EQ(rho(Vector::Ones(2), 0.5), 2.0);
}

TEST(Learner, DimensionMismatchesAreRejected) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    EXPECT_THROW((void)policy_hat(Vector::Zero(3), Vector::Ones(5), plant, cost, basis), DimensionError);
    EXPECT_THROW((void)bellman_error_at(Vector::Zero(2), Vector::Ones(6), Vector::Ones(6), plant, cost, basis),
                 DimensionError);
}

// Bellman error at the origin is exactly zero for any weights.
TEST(LearnerProperty, BellmanErrorVanishesAtTheOrigin) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    Gen gen(42);
    for (int trial = 0; trial < 200; ++trial) {
        const Vector wc = gen.vector(6, -50.0, 50.0);
        const Vector wa = gen.vector(6, -50.0, 50.0);
        EXPECT_EQ(bellman_error_at(Vector::Zero(3), wc, wa, plant, cost, basis), 0.0);
    }
}

// The cached fast path and the direct evaluation agree.
TEST(LearnerProperty, CachedPointTermsMatchDirectEvaluation) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    const auto grid = f16_grid();
    const auto cache = precompute_points(grid, plant, cost, basis);
    Gen gen(43);
    for (int trial = 0; trial < 20; ++trial) {
        const LearnerState st{gen.vector(6, -3.0, 3.0), gen.spd(6), gen.vector(6, -3.0, 3.0)};
        const auto fast = extrapolation_terms(cache, st.W_c, st.W_a, cost, 1.0);
        const auto slow = extrapolation_terms(st, grid, plant, cost, basis, LearnerGains{});
        ASSERT_EQ(fast.size(), slow.size());
        for (std::size_t k = 0; k < fast.size(); ++k) {
            EXPECT_LE(rel_err(fast[k].omega, slow[k].omega), 1e-13);
            EXPECT_LE(rel_err(fast[k].u, slow[k].u), 1e-13);
            EXPECT_LE(rel_err(fast[k].G_sigma, slow[k].G_sigma), 1e-13);
            EXPECT_NEAR(fast[k].delta, slow[k].delta, 1e-12 * std::max(1.0, std::abs(slow[k].delta)));
            EXPECT_NEAR(fast[k].rho, slow[k].rho, 1e-13 * slow[k].rho);
        }
    }
}

// Gamma_dot preserves symmetry and the gram term can only lower Gamma.
TEST(LearnerProperty, GammaDynamicsStaySymmetric) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    const auto grid = f16_grid();
    Gen gen(44);
    for (int trial = 0; trial < 20; ++trial) {
        const LearnerState st{gen.vector(6, -3.0, 3.0), gen.spd(6), gen.vector(6, -3.0, 3.0)};
        const auto d = critic_rhs(st, grid, plant, cost, basis, LearnerGains{});
        EXPECT_LE((d.Gamma_dot - d.Gamma_dot.transpose()).cwiseAbs().maxCoeff(),
                  1e-12 * std::max(1.0, d.Gamma_dot.cwiseAbs().maxCoeff()));
        const Matrix forgetting = LearnerGains{}.beta * st.Gamma;
        EXPECT_LE(testing_support::jacobi_eigenvalues(d.Gamma_dot - forgetting).back(), 1e-10);
    }
}

// Actor update with W_a = W_c and no coupling reduces to -k_a2 W_a.
TEST(LearnerProperty, ActorLeakageWhenWeightsAgreeAndGradientVanishes) {
    const auto plant = f16_plant();
    const auto cost = f16_cost();
    const QuadraticBasis basis(3);
    const ExtrapolationSet origin{{Vector::Zero(3)}};
    Gen gen(45);
    for (int trial = 0; trial < 50; ++trial) {
        const Vector w = gen.vector(6, -5.0, 5.0);
        const LearnerState st{w, Matrix::Identity(6, 6), w};
        const LearnerGains gains;
        EXPECT_LE((actor_rhs(st, origin, plant, cost, basis, gains) + gains.k_a2 * w).norm(), 1e-14);
    }
}
