#pragma once

#include <string>
#include <vector>

#include "barrier_mbrl/barrier.hpp"

namespace barrier_mbrl {

/// True iff every row of C is a standard basis vector and no two rows select
/// the same state.
[[nodiscard]] inline bool validate_selection_matrix(const Matrix& C) {
    if (C.rows() == 0 || C.cols() == 0) {
        return false;
    }
    std::vector<bool> taken(static_cast<std::size_t>(C.cols()), false);
    for (Eigen::Index r = 0; r < C.rows(); ++r) {
        Eigen::Index one_at = -1;
        for (Eigen::Index c = 0; c < C.cols(); ++c) {
            const double v = C(r, c);
            if (v == 1.0) {
                if (one_at >= 0) {
                    return false;
                }
                one_at = c;
            } else if (v != 0.0) {
                return false;
            }
        }
        if (one_at < 0 || taken[static_cast<std::size_t>(one_at)]) {
            return false;
        }
        taken[static_cast<std::size_t>(one_at)] = true;
    }
    return true;
}

/// xdot = A x + B u, y = C x, with the state confined to `limits`.
class LinearPlant {
public:
    LinearPlant(Matrix A, Matrix B, Matrix C, BarrierLimits limits)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), limits_(std::move(limits)) {
        const auto n = A_.rows();
        if (n == 0 || A_.cols() != n) {
            throw DimensionError("plant: A must be square and non-empty");
        }
        if (B_.rows() != n || B_.cols() == 0) {
            throw DimensionError("plant: B must be n x m with m >= 1");
        }
        if (C_.cols() != n || C_.rows() == 0) {
            throw DimensionError("plant: C must be q x n with q >= 1");
        }
        if (limits_.size() != n) {
            throw DimensionError("plant: barrier limits must have n entries");
        }
        if (!validate_selection_matrix(C_)) {
            throw InvalidArgument("plant: every row of C must be a distinct standard basis vector");
        }
        selection_.resize(static_cast<std::size_t>(C_.rows()));
        for (Eigen::Index r = 0; r < C_.rows(); ++r) {
            Eigen::Index idx = 0;
            C_.row(r).maxCoeff(&idx);
            selection_[static_cast<std::size_t>(r)] = idx;
        }
    }

    [[nodiscard]] Eigen::Index states() const noexcept { return A_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const noexcept { return B_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const noexcept { return C_.rows(); }

    [[nodiscard]] const Matrix& A() const noexcept { return A_; }
    [[nodiscard]] const Matrix& B() const noexcept { return B_; }
    [[nodiscard]] const Matrix& C() const noexcept { return C_; }
    [[nodiscard]] const BarrierLimits& limits() const noexcept { return limits_; }

    /// State index picked by each output row.
    [[nodiscard]] const std::vector<Eigen::Index>& selection() const noexcept { return selection_; }

    void check_state(const Vector& x) const {
        if (x.size() != states()) {
            throw DimensionError("plant: state has length " + std::to_string(x.size()) + ", expected " +
                                 std::to_string(states()));
        }
    }

    void check_input(const Vector& u) const {
        if (u.size() != inputs()) {
            throw DimensionError("plant: input has length " + std::to_string(u.size()) + ", expected " +
                                 std::to_string(inputs()));
        }
    }

    void check_output(const Vector& y) const {
        if (y.size() != outputs()) {
            throw DimensionError("plant: output has length " + std::to_string(y.size()) + ", expected " +
                                 std::to_string(outputs()));
        }
    }

private:
    Matrix A_;
    Matrix B_;
    Matrix C_;
    BarrierLimits limits_;
    std::vector<Eigen::Index> selection_;
};

[[nodiscard]] inline Vector plant_rhs(const Vector& x, const Vector& u, const LinearPlant& plant) {
    plant.check_state(x);
    plant.check_input(u);
    return plant.A() * x + plant.B() * u;
}

[[nodiscard]] inline Vector plant_output(const Vector& x, const LinearPlant& plant) {
    plant.check_state(x);
    return plant.C() * x;
}

/// Drift of the transformed system: T(s) ⊙ (A bf_inv(s)).
[[nodiscard]] inline Vector transformed_F(const Vector& s, const LinearPlant& plant) {
    plant.check_state(s);
    const Vector t = barrier::t_vec(s, plant.limits());
    const Vector x = barrier::bf_inv_vec(s, plant.limits());
    return t.cwiseProduct(plant.A() * x);
}

/// Input matrix of the transformed system: row i of B scaled by T_i(s_i).
[[nodiscard]] inline Matrix transformed_G(const Vector& s, const LinearPlant& plant) {
    plant.check_state(s);
    const Vector t = barrier::t_vec(s, plant.limits());
    return t.asDiagonal() * plant.B();
}

/// Applies the barrier to each output using the limits of the state it selects.
[[nodiscard]] inline Vector transform_output(const Vector& y, const LinearPlant& plant) {
    plant.check_output(y);
    Vector out(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const auto i = plant.selection()[static_cast<std::size_t>(j)];
        try {
            out[j] = barrier::bf(y[j], plant.limits().lower(i), plant.limits().upper(i));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " (output " + std::to_string(j) + ")",
                              static_cast<std::size_t>(j));
        }
    }
    return out;
}

}  // namespace barrier_mbrl
