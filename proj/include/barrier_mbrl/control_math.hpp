#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "barrier_mbrl/errors.hpp"

namespace barrier_mbrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Solution P of P Acl + Acl^T P = -zeta together with its residual.
struct LyapunovCertificate {
    Matrix P;
    Matrix zeta;
    double residual = 0.0;  ///< ||P Acl + Acl^T P + zeta||_F
};

namespace control_math {

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kLyapunovResidualTolerance = 1e-10;

inline void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols() || M.rows() == 0) {
        throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
    }
}

/// Largest real part among the eigenvalues of M (spectral abscissa).
[[nodiscard]] inline double spectral_abscissa(const Matrix& M) {
    require_square(M, "spectral_abscissa");
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw SingularSystem("eigenvalue iteration did not converge");
    }
    return es.eigenvalues().real().maxCoeff();
}

[[nodiscard]] inline bool is_hurwitz(const Matrix& M) {
    require_square(M, "is_hurwitz");
    Eigen::EigenSolver<Matrix> es(M, false);
    if (es.info() != Eigen::Success) {
        return false;
    }
    return (es.eigenvalues().real().array() < 0.0).all();
}

[[nodiscard]] inline bool is_symmetric(const Matrix& M, double tol = kSymmetryTolerance) {
    if (M.rows() != M.cols()) {
        return false;
    }
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

[[nodiscard]] inline double min_eig_sym(const Matrix& M) {
    require_square(M, "min_eig_sym");
    if (!is_symmetric(M)) {
        throw NotSymmetric("min_eig_sym: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

[[nodiscard]] inline bool is_positive_definite(const Matrix& M) {
    return is_symmetric(M) && min_eig_sym(M) > 0.0;
}

/// Frobenius norm of P Acl + Acl^T P + zeta.
[[nodiscard]] inline double lyapunov_residual(const Matrix& Acl, const Matrix& P, const Matrix& zeta) {
    return (P * Acl + Acl.transpose() * P + zeta).norm();
}

/// Solves P Acl + Acl^T P = -zeta through the column-stacked n^2 x n^2 system
/// (I ⊗ Acl^T + Acl^T ⊗ I) vec(P) = -vec(zeta).
[[nodiscard]] inline LyapunovCertificate solve_lyapunov(const Matrix& Acl, const Matrix& zeta) {
    require_square(Acl, "solve_lyapunov");
    const auto n = Acl.rows();
    if (zeta.rows() != n || zeta.cols() != n) {
        throw DimensionError("solve_lyapunov: zeta must match Acl");
    }
    if (!is_positive_definite(zeta)) {
        throw InvalidArgument("solve_lyapunov: zeta must be symmetric positive definite");
    }
    if (!is_hurwitz(Acl)) {
        throw NotHurwitz("solve_lyapunov: closed-loop matrix is not Hurwitz");
    }

    const Matrix I = Matrix::Identity(n, n);
    const Matrix At = Acl.transpose();
    Matrix K = Matrix::Zero(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // Block (i, j) of I ⊗ At plus block (i, j) of At ⊗ I.
            K.block(i * n, j * n, n, n) = I(i, j) * At + At(i, j) * I;
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(zeta.data(), n * n);

    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n * n) {
        throw SingularSystem("solve_lyapunov: vectorized system is rank deficient");
    }
    const Vector p = lu.solve(rhs);
    const Eigen::Map<const Matrix> raw(p.data(), n, n);
    const Matrix P = 0.5 * (raw + raw.transpose());

    LyapunovCertificate cert{P, zeta, lyapunov_residual(Acl, P, zeta)};
    if (cert.residual > kLyapunovResidualTolerance * zeta.norm()) {
        throw SingularSystem("solve_lyapunov: residual " + std::to_string(cert.residual) +
                             " exceeds tolerance");
    }
    if (min_eig_sym(cert.P) <= 0.0) {
        throw NotHurwitz("solve_lyapunov: solution is not positive definite");
    }
    return cert;
}

}  // namespace control_math
}  // namespace barrier_mbrl
