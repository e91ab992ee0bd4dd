#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "barrier_mbrl/simulator.hpp"

namespace barrier_mbrl::verify {

struct Check {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

[[nodiscard]] inline Check at_most(std::string name, double measured, double tolerance) {
    return {std::move(name), measured, tolerance, std::isfinite(measured) && measured <= tolerance};
}

[[nodiscard]] inline Check at_least(std::string name, double measured, double threshold) {
    return {std::move(name), measured, threshold, std::isfinite(measured) && measured >= threshold};
}

[[nodiscard]] inline bool all_passed(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ----------------------------------------------------------------------------
// Barrier identities
// ----------------------------------------------------------------------------

inline constexpr int kBarrierSamples = 1000;
inline constexpr double kRoundtripTolerance = 1e-12;  // relative to interval width
inline constexpr double kDerivativeTolerance = 1e-6;
inline constexpr double kDerivativeStep = 1e-6;

/// Worst |bf_inv(bf(y)) - y| / (hi - lo) over evenly spaced samples kept at
/// least 1e-6 of the width away from each limit.
[[nodiscard]] inline double barrier_roundtrip_error(double lo, double hi, int samples = kBarrierSamples) {
    const double width = hi - lo;
    const double edge = 1e-6;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double frac = edge + (1.0 - 2.0 * edge) * k / (samples - 1);
        const double y = lo + width * frac;
        const double back = barrier::bf_inv(barrier::bf(y, lo, hi), lo, hi);
        worst = std::max(worst, std::abs(back - y) / width);
    }
    return worst;
}

/// Worst |1/T(s) - central difference of bf_inv| / max(1, |FD|) on [-10, 10].
[[nodiscard]] inline double barrier_derivative_error(double lo, double hi, int samples = kBarrierSamples) {
    double worst = 0.0;
    const double h = kDerivativeStep;
    for (int k = 0; k < samples; ++k) {
        const double s = -10.0 + 20.0 * k / (samples - 1);
        const double fd = (barrier::bf_inv(s + h, lo, hi) - barrier::bf_inv(s - h, lo, hi)) / (2.0 * h);
        worst = std::max(worst, std::abs(1.0 / barrier::t_factor(s, lo, hi) - fd) / std::max(1.0, std::abs(fd)));
    }
    return worst;
}

[[nodiscard]] inline std::vector<Check> barrier_suite(const BarrierLimits& limits) {
    double roundtrip = 0.0;
    double derivative = 0.0;
    double monotonic_violations = 0.0;
    double zero_error = 0.0;
    for (Eigen::Index i = 0; i < limits.size(); ++i) {
        const double lo = limits.lower(i);
        const double hi = limits.upper(i);
        roundtrip = std::max(roundtrip, barrier_roundtrip_error(lo, hi));
        derivative = std::max(derivative, barrier_derivative_error(lo, hi));
        double prev = -INFINITY;
        for (int k = 1; k < kBarrierSamples; ++k) {
            const double v = barrier::bf(lo + (hi - lo) * k / kBarrierSamples, lo, hi);
            monotonic_violations += v > prev ? 0.0 : 1.0;
            prev = v;
        }
        zero_error = std::max({zero_error, std::abs(barrier::bf(0.0, lo, hi)), std::abs(barrier::bf_inv(0.0, lo, hi))});
    }
    return {at_most("barrier roundtrip |b^-1(b(y)) - y| / width", roundtrip, kRoundtripTolerance),
            at_most("barrier derivative 1/T vs finite difference", derivative, kDerivativeTolerance),
            at_most("barrier monotonicity violations", monotonic_violations, 0.0),
            at_most("barrier zero preservation", zero_error, 0.0)};
}

// ----------------------------------------------------------------------------
// Observer Lyapunov certificate
// ----------------------------------------------------------------------------

[[nodiscard]] inline std::vector<Check> lyapunov_suite(const ObserverConfig& observer, const Matrix& zeta) {
    const Matrix Acl = observer.error_matrix();
    std::vector<Check> checks;
    checks.push_back({"A - L C spectral abscissa < 0", control_math::spectral_abscissa(Acl), 0.0,
                      control_math::is_hurwitz(Acl)});
    try {
        const auto cert = control_math::solve_lyapunov(Acl, zeta);
        checks.push_back(at_most("Lyapunov residual / ||zeta||_F", cert.residual / zeta.norm(),
                                 control_math::kLyapunovResidualTolerance));
        const double min_eig = control_math::min_eig_sym(cert.P);
        checks.push_back({"Lyapunov P positive definite (min eig)", min_eig, 0.0, min_eig > 0.0});
    } catch (const Error& e) {
        checks.push_back({std::string("Lyapunov solve: ") + e.what(), NAN, 0.0, false});
    }
    return checks;
}

// ----------------------------------------------------------------------------
// Dual-coordinate trajectory equivalence
// ----------------------------------------------------------------------------

inline constexpr double kLemmaDuration = 1.0;
inline constexpr double kLemmaDt = 1e-4;
inline constexpr double kLemmaTolerance = 1e-6;
inline constexpr std::array<double, 3> kOrderSteps{1e-3, 5e-4, 2.5e-4};
inline constexpr double kMinOrder = 3.5;

[[nodiscard]] inline SimConfig lemma_config(double dt) {
    SimConfig sim;
    sim.dt = dt;
    sim.duration = kLemmaDuration;
    sim.log_stride = std::max(1, static_cast<int>(std::lround(0.01 / dt)));
    return sim;
}

template <class RunAtStep>
std::vector<Check> lemma_checks(const std::string& label, RunAtStep&& run_at) {
    std::vector<Check> checks;
    checks.push_back(at_most(label + " sup deviation at dt=1e-4 over 1 s", run_at(kLemmaDt), kLemmaTolerance));
    std::array<double, kOrderSteps.size()> dev{};
    for (std::size_t i = 0; i < kOrderSteps.size(); ++i) {
        dev[i] = run_at(kOrderSteps[i]);
    }
    double order = INFINITY;
    for (std::size_t i = 0; i + 1 < dev.size(); ++i) {
        order = std::min(order, convergence_order(dev[i], dev[i + 1]));
    }
    checks.push_back(at_least(label + " convergence order over dt halvings", order, kMinOrder));
    return checks;
}

[[nodiscard]] inline std::vector<Check> lemma1_suite(const LinearPlant& plant, const TransformedFeedback& feedback,
                                                     const Vector& x0) {
    return lemma_checks("lemma1", [&](double dt) {
        return simulate_lemma1_pair(plant, feedback, x0, lemma_config(dt)).max_deviation;
    });
}

[[nodiscard]] inline std::vector<Check> lemma2_suite(const ObserverConfig& observer, const TransformedFeedback& feedback,
                                                     const Vector& x0, const Vector& x_hat0) {
    return lemma_checks("lemma2", [&](double dt) {
        return simulate_lemma2_pair(observer, feedback, x0, x_hat0, lemma_config(dt)).max_deviation;
    });
}

}  // namespace barrier_mbrl::verify
