#include "barrier_mbrl/observer.hpp"

#include <gtest/gtest.h>

#include "frozen_values.hpp"
#include "test_support.hpp"

using namespace barrier_mbrl;
using testing_support::f16_plant;
using testing_support::Gen;
using testing_support::jacobi_eigenvalues;
using testing_support::rel_err;
using testing_support::vec;

TEST(ControlMath, F16ObserverLyapunovSolution) {
    const ObserverConfig obs(f16_plant(), Matrix::Ones(3, 1));
    const Matrix zeta = Matrix::Identity(3, 3);
    const auto cert = control_math::solve_lyapunov(obs.error_matrix(), zeta);
    const Matrix P_ref = vec(frozen::kLyapunovP).reshaped<Eigen::RowMajor>(3, 3);
    EXPECT_LE(rel_err(cert.P, P_ref), 1e-12);
    EXPECT_LE(cert.residual, 1e-10 * zeta.norm());
    EXPECT_GT(jacobi_eigenvalues(cert.P).front(), 0.0);
}

TEST(ControlMath, HurwitzAndAbscissa) {
    const Matrix stable = (Matrix(2, 2) << -1, 5, 0, -2).finished();
    const Matrix marginal = (Matrix(2, 2) << 0, 1, -1, 0).finished();
    EXPECT_TRUE(control_math::is_hurwitz(stable));
    EXPECT_FALSE(control_math::is_hurwitz(marginal));
    EXPECT_NEAR(control_math::spectral_abscissa(stable), -1.0, 1e-14);
    EXPECT_NEAR(control_math::spectral_abscissa(marginal), 0.0, 1e-14);
    EXPECT_THROW((void)control_math::is_hurwitz(Matrix::Ones(2, 3)), DimensionError);
}

TEST(ControlMath, SymmetryAndDefiniteness) {
    EXPECT_TRUE(control_math::is_symmetric(Matrix::Identity(3, 3)));
    EXPECT_FALSE(control_math::is_symmetric((Matrix(2, 2) << 1, 1, 0, 1).finished()));
    EXPECT_THROW((void)control_math::min_eig_sym((Matrix(2, 2) << 1, 1, 0, 1).finished()), NotSymmetric);
    EXPECT_TRUE(control_math::is_positive_definite(2.0 * Matrix::Identity(2, 2)));
    EXPECT_FALSE(control_math::is_positive_definite((Matrix(2, 2) << 1, 2, 2, 1).finished()));
}

TEST(ControlMath, LyapunovRejectsBadInput) {
    const Matrix unstable = (Matrix(2, 2) << 1, 0, 0, -1).finished();
    EXPECT_THROW((void)control_math::solve_lyapunov(unstable, Matrix::Identity(2, 2)), NotHurwitz);
    EXPECT_THROW((void)control_math::solve_lyapunov(-Matrix::Identity(2, 2), -Matrix::Identity(2, 2)),
                 InvalidArgument);
    EXPECT_THROW((void)control_math::solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                 DimensionError);
}

TEST(ControlMath, ScalarLyapunovClosedForm) {
    // 2 a p = -z  =>  p = -z / (2 a)
    const auto cert = control_math::solve_lyapunov(Matrix::Constant(1, 1, -4.0), Matrix::Constant(1, 1, 3.0));
    EXPECT_NEAR(cert.P(0, 0), 3.0 / 8.0, 1e-16);
}

// The Eigen eigen solver agrees with an independent Jacobi iteration.
TEST(ControlMathProperty, MinEigenvalueMatchesJacobi) {
    Gen gen(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = gen.integer(1, 8);
        const Matrix m = gen.matrix(n, n, -2.0, 2.0);
        const Matrix s = m + m.transpose();
        EXPECT_NEAR(control_math::min_eig_sym(s), jacobi_eigenvalues(s).front(), 1e-12);
    }
}

// Random Hurwitz matrices and SPD right-hand sides yield SPD certificates.
TEST(ControlMathProperty, LyapunovSolutionsAreCertificates) {
    Gen gen(32);
    int solved = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = gen.integer(1, 6);
        Matrix A = gen.matrix(n, n, -1.0, 1.0);
        A -= (control_math::spectral_abscissa(A) + gen.uniform(0.1, 2.0)) * Matrix::Identity(n, n);
        ASSERT_TRUE(control_math::is_hurwitz(A));
        const Matrix zeta = gen.spd(n);
        const auto cert = control_math::solve_lyapunov(A, zeta);
        EXPECT_LE(cert.residual, 1e-10 * zeta.norm());
        EXPECT_TRUE(control_math::is_symmetric(cert.P, 0.0));
        EXPECT_GT(jacobi_eigenvalues(cert.P).front(), 0.0);
        ++solved;
    }
    EXPECT_EQ(solved, 200);
}
