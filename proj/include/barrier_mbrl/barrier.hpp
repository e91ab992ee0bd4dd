#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "barrier_mbrl/errors.hpp"

namespace barrier_mbrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace barrier {

/// Inputs closer than this fraction of the interval width to a limit are rejected.
inline constexpr double kMarginFraction = 1e-9;

/// Largest |s| accepted in transformed coordinates.
inline constexpr double kOverflowGuard = 50.0;

namespace detail {

inline void check_interval(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < 0.0 && 0.0 < hi)) {
        std::ostringstream os;
        os << "barrier limits must satisfy lo < 0 < hi, got (" << lo << ", " << hi << ")";
        throw DomainError(os.str());
    }
}

inline void check_transformed(double s) {
    if (!std::isfinite(s) || std::abs(s) > kOverflowGuard) {
        std::ostringstream os;
        os << "transformed coordinate " << s << " exceeds overflow guard " << kOverflowGuard;
        throw DomainError(os.str());
    }
}

}  // namespace detail

/// Barrier function mapping the open interval (lo, hi) onto the real line.
[[nodiscard]] inline double bf(double y, double lo, double hi) {
    detail::check_interval(lo, hi);
    const double margin = kMarginFraction * (hi - lo);
    if (!std::isfinite(y) || y < lo + margin || y > hi - margin) {
        std::ostringstream os;
        os << "value " << y << " outside barrier interval (" << lo << ", " << hi << ") margin";
        throw DomainError(os.str());
    }
    return std::log(hi * (lo - y) / (lo * (hi - y)));
}

[[nodiscard]] inline double bf_inv(double s, double lo, double hi) {
    detail::check_interval(lo, hi);
    detail::check_transformed(s);
    // Divide through by the dominant exponential so large |s| does not cancel, then keep the
    // rounded result off the limits themselves.
    double x;
    if (s >= 0.0) {
        const double em = std::exp(-s);
        x = lo * hi * (1.0 - em) / (lo - hi * em);
    } else {
        const double es = std::exp(s);
        x = lo * hi * (es - 1.0) / (lo * es - hi);
    }
    return std::clamp(x, std::nextafter(lo, 0.0), std::nextafter(hi, 0.0));
}

/// Reciprocal of d bf_inv / ds. Strictly positive on the guarded domain.
[[nodiscard]] inline double t_factor(double s, double lo, double hi) {
    detail::check_interval(lo, hi);
    detail::check_transformed(s);
    return (lo * lo * std::exp(s) - 2.0 * lo * hi + hi * hi * std::exp(-s)) /
           (hi * lo * lo - lo * hi * hi);
}

}  // namespace barrier

/// Per-state box (lower_i, upper_i) with lower_i < 0 < upper_i.
class BarrierLimits {
public:
    BarrierLimits(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size() || lower_.size() == 0) {
            throw DimensionError("barrier limits: lower and upper must be non-empty and equal length");
        }
        for (Eigen::Index i = 0; i < lower_.size(); ++i) {
            if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
                throw InvalidArgument("barrier limits: non-finite entry at index " + std::to_string(i));
            }
            if (!(lower_[i] < 0.0 && 0.0 < upper_[i])) {
                throw InvalidArgument("barrier limits: need lower < 0 < upper at index " + std::to_string(i));
            }
        }
    }

    static BarrierLimits symmetric(Eigen::Index n, double half_width) {
        return {Vector::Constant(n, -half_width), Vector::Constant(n, half_width)};
    }

    [[nodiscard]] Eigen::Index size() const noexcept { return lower_.size(); }
    [[nodiscard]] const Vector& lower() const noexcept { return lower_; }
    [[nodiscard]] const Vector& upper() const noexcept { return upper_; }
    [[nodiscard]] double lower(Eigen::Index i) const { return lower_[i]; }
    [[nodiscard]] double upper(Eigen::Index i) const { return upper_[i]; }

    /// min_i min(x_i - lower_i, upper_i - x_i); positive iff x is inside the box.
    [[nodiscard]] double margin(const Vector& x) const {
        check_size(x);
        return std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
    }

    void check_size(const Vector& v) const {
        if (v.size() != size()) {
            throw DimensionError("vector of length " + std::to_string(v.size()) +
                                 " does not match barrier dimension " + std::to_string(size()));
        }
    }

private:
    Vector lower_;
    Vector upper_;
};

namespace barrier {

namespace detail {

template <class ScalarOp>
Vector apply(const Vector& v, const BarrierLimits& limits, ScalarOp op) {
    limits.check_size(v);
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        try {
            out[i] = op(v[i], limits.lower(i), limits.upper(i));
        } catch (const DomainError& e) {
            throw DomainError(std::string(e.what()) + " (component " + std::to_string(i) + ")",
                              static_cast<std::size_t>(i));
        }
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline Vector bf_vec(const Vector& x, const BarrierLimits& limits) {
    return detail::apply(x, limits, [](double y, double lo, double hi) { return bf(y, lo, hi); });
}

[[nodiscard]] inline Vector bf_inv_vec(const Vector& s, const BarrierLimits& limits) {
    return detail::apply(s, limits, [](double v, double lo, double hi) { return bf_inv(v, lo, hi); });
}

[[nodiscard]] inline Vector t_vec(const Vector& s, const BarrierLimits& limits) {
    return detail::apply(s, limits, [](double v, double lo, double hi) { return t_factor(v, lo, hi); });
}

}  // namespace barrier
}  // namespace barrier_mbrl
