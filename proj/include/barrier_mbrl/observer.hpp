#pragma once

#include "barrier_mbrl/control_math.hpp"
#include "barrier_mbrl/plant.hpp"

namespace barrier_mbrl {

/// Observer gain L (n x q) paired with the plant it observes. A - L C must be
/// Hurwitz.
class ObserverConfig {
public:
    ObserverConfig(LinearPlant plant, Matrix L) : plant_(std::move(plant)), L_(std::move(L)) {
        if (L_.rows() != plant_.states() || L_.cols() != plant_.outputs()) {
            throw DimensionError("observer: L must be n x q");
        }
        if (!control_math::is_hurwitz(error_matrix())) {
            throw NotHurwitz("observer: A - L C is not Hurwitz");
        }
    }

    [[nodiscard]] const LinearPlant& plant() const noexcept { return plant_; }
    [[nodiscard]] const Matrix& L() const noexcept { return L_; }

    /// A - L C, the estimation-error matrix.
    [[nodiscard]] Matrix error_matrix() const { return plant_.A() - L_ * plant_.C(); }

private:
    LinearPlant plant_;
    Matrix L_;
};

/// Estimate held in both coordinate systems; s_hat = bf_vec(x_hat).
struct ObserverState {
    Vector x_hat;
    Vector s_hat;

    static ObserverState from_transformed(Vector s_hat, const BarrierLimits& limits) {
        Vector x_hat = barrier::bf_inv_vec(s_hat, limits);
        return {std::move(x_hat), std::move(s_hat)};
    }

    static ObserverState from_original(Vector x_hat, const BarrierLimits& limits) {
        Vector s_hat = barrier::bf_vec(x_hat, limits);
        return {std::move(x_hat), std::move(s_hat)};
    }
};

/// Estimator in original coordinates:
/// xhat_dot_i = (B u)_i + (A b(xhat) + L (y_m - C b(xhat)))_i / T_i(b(xhat_i)).
[[nodiscard]] inline Vector observer_rhs_original(const Vector& x_hat, const Vector& u, const Vector& y_m,
                                                  const ObserverConfig& cfg) {
    const auto& plant = cfg.plant();
    plant.check_state(x_hat);
    plant.check_input(u);
    plant.check_output(y_m);
    const Vector s = barrier::bf_vec(x_hat, plant.limits());
    const Vector inner = plant.A() * s + cfg.L() * (y_m - plant.C() * s);
    const Vector t = barrier::t_vec(s, plant.limits());
    return plant.B() * u + inner.cwiseQuotient(t);
}

/// Estimator in transformed coordinates:
/// shat_dot = A shat + G(shat) u + L (y_m - C shat).
[[nodiscard]] inline Vector observer_rhs_transformed(const Vector& s_hat, const Vector& u, const Vector& y_m,
                                                     const ObserverConfig& cfg) {
    const auto& plant = cfg.plant();
    plant.check_state(s_hat);
    plant.check_input(u);
    plant.check_output(y_m);
    return plant.A() * s_hat + transformed_G(s_hat, plant) * u + cfg.L() * (y_m - plant.C() * s_hat);
}

[[nodiscard]] inline Vector estimation_error_transformed(const Vector& s, const Vector& s_hat) {
    if (s.size() != s_hat.size()) {
        throw DimensionError("estimation error: length mismatch");
    }
    return s - s_hat;
}

}  // namespace barrier_mbrl
