#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "barrier_mbrl/control_math.hpp"
#include "barrier_mbrl/plant.hpp"

namespace barrier_mbrl {

// ============================================================================
// Basis functions for value-function approximation
// ============================================================================

/// A basis sigma: R^n -> R^l with gradient R^n -> R^{l x n}. Implementations
/// must satisfy sigma(0) = 0 and grad sigma(0) = 0.
template <class B>
concept ValueBasis = requires(const B& b, const Vector& s) {
    { b.size() } -> std::convertible_to<Eigen::Index>;
    { b.input_size() } -> std::convertible_to<Eigen::Index>;
    { b.value(s) } -> std::convertible_to<Vector>;
    { b.gradient(s) } -> std::convertible_to<Matrix>;
};

/// All quadratic monomials of s: cross terms s_i s_j (i < j, lexicographic)
/// followed by the squares s_i^2. For n = 3 this is
/// [s1 s2; s1 s3; s2 s3; s1^2; s2^2; s3^2].
class QuadraticBasis {
public:
    explicit QuadraticBasis(Eigen::Index n) : n_(n) {
        if (n < 1) {
            throw InvalidArgument("quadratic basis: dimension must be positive");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                terms_.push_back({i, j});
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            terms_.push_back({i, i});
        }
    }

    [[nodiscard]] Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(terms_.size()); }
    [[nodiscard]] Eigen::Index input_size() const noexcept { return n_; }

    [[nodiscard]] Vector value(const Vector& s) const {
        check(s);
        Vector out(size());
        for (Eigen::Index k = 0; k < size(); ++k) {
            const auto [i, j] = terms_[static_cast<std::size_t>(k)];
            out[k] = s[i] * s[j];
        }
        return out;
    }

    [[nodiscard]] Matrix gradient(const Vector& s) const {
        check(s);
        Matrix out = Matrix::Zero(size(), n_);
        for (Eigen::Index k = 0; k < size(); ++k) {
            const auto [i, j] = terms_[static_cast<std::size_t>(k)];
            if (i == j) {
                out(k, i) = 2.0 * s[i];
            } else {
                out(k, i) = s[j];
                out(k, j) = s[i];
            }
        }
        return out;
    }

private:
    struct Term {
        Eigen::Index i;
        Eigen::Index j;
    };

    void check(const Vector& s) const {
        if (s.size() != n_) {
            throw DimensionError("quadratic basis: input has wrong length");
        }
    }

    Eigen::Index n_;
    std::vector<Term> terms_;
};

/// User-supplied basis. The zero conditions are checked at construction.
class FunctionBasis {
public:
    using ValueFn = std::function<Vector(const Vector&)>;
    using GradientFn = std::function<Matrix(const Vector&)>;

    FunctionBasis(Eigen::Index l, Eigen::Index n, ValueFn value, GradientFn gradient)
        : l_(l), n_(n), value_(std::move(value)), gradient_(std::move(gradient)) {
        const Vector zero = Vector::Zero(n_);
        const Vector v0 = value_(zero);
        const Matrix g0 = gradient_(zero);
        if (v0.size() != l_ || g0.rows() != l_ || g0.cols() != n_) {
            throw DimensionError("function basis: evaluation rules disagree with declared dimensions");
        }
        if (!v0.isZero(0.0) || !g0.isZero(0.0)) {
            throw InvalidArgument("function basis: sigma(0) and grad sigma(0) must vanish");
        }
    }

    [[nodiscard]] Eigen::Index size() const noexcept { return l_; }
    [[nodiscard]] Eigen::Index input_size() const noexcept { return n_; }
    [[nodiscard]] Vector value(const Vector& s) const { return value_(s); }
    [[nodiscard]] Matrix gradient(const Vector& s) const { return gradient_(s); }

private:
    Eigen::Index l_;
    Eigen::Index n_;
    ValueFn value_;
    GradientFn gradient_;
};

// ============================================================================
// Cost, gains, learner state, extrapolation set
// ============================================================================

/// Running cost c(s, u) = s^T Q s + u^T R u in transformed coordinates.
class CostSpec {
public:
    CostSpec(Matrix Q, Matrix R) : Q_(std::move(Q)), R_(std::move(R)) {
        if (Q_.rows() != Q_.cols() || R_.rows() != R_.cols() || Q_.rows() == 0 || R_.rows() == 0) {
            throw DimensionError("cost: Q and R must be square");
        }
        if (!control_math::is_positive_definite(Q_)) {
            throw InvalidArgument("cost: Q must be symmetric positive definite");
        }
        if (!control_math::is_positive_definite(R_)) {
            throw InvalidArgument("cost: R must be symmetric positive definite");
        }
        R_inv_ = R_.llt().solve(Matrix::Identity(R_.rows(), R_.cols()));
    }

    [[nodiscard]] const Matrix& Q() const noexcept { return Q_; }
    [[nodiscard]] const Matrix& R() const noexcept { return R_; }
    [[nodiscard]] const Matrix& R_inv() const noexcept { return R_inv_; }

    [[nodiscard]] double state_cost(const Vector& s) const { return s.dot(Q_ * s); }
    [[nodiscard]] double control_cost(const Vector& u) const { return u.dot(R_ * u); }

    void check_against(const LinearPlant& plant) const {
        if (Q_.rows() != plant.states() || R_.rows() != plant.inputs()) {
            throw DimensionError("cost: Q must be n x n and R must be m x m");
        }
    }

private:
    Matrix Q_;
    Matrix R_;
    Matrix R_inv_;
};

struct LearnerGains {
    double k_c = 100.0;
    double k_a1 = 100.0;
    double k_a2 = 1.0;
    double beta = 0.1;    ///< forgetting factor
    double gamma = 1.0;   ///< normalization gain in rho

    void validate() const {
        const auto positive = [](double v, const char* name) {
            if (!(std::isfinite(v) && v > 0.0)) {
                throw InvalidArgument(std::string("learner gains: ") + name + " must be positive");
            }
        };
        positive(k_c, "k_c");
        positive(k_a1, "k_a1");
        positive(k_a2, "k_a2");
        positive(beta, "beta");
        positive(gamma, "gamma");
    }
};

struct LearnerState {
    Vector W_c;    ///< critic weights
    Matrix Gamma;  ///< least-squares gain, symmetric positive definite
    Vector W_a;    ///< actor weights

    [[nodiscard]] Eigen::Index size() const noexcept { return W_c.size(); }

    void validate() const {
        const auto l = W_c.size();
        if (l == 0 || W_a.size() != l || Gamma.rows() != l || Gamma.cols() != l) {
            throw DimensionError("learner state: W_c, W_a and Gamma dimensions disagree");
        }
        if (!control_math::is_symmetric(Gamma, 1e-9) || control_math::min_eig_sym(Gamma) <= 0.0) {
            throw InvalidArgument("learner state: Gamma must be symmetric positive definite");
        }
    }
};

struct ExtrapolationSet {
    std::vector<Vector> points;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

    /// Every point has length n and lies inside the closed ball of radius chi.
    void validate(Eigen::Index n, double chi) const {
        if (points.empty()) {
            throw InvalidArgument("extrapolation set: need at least one point");
        }
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (points[k].size() != n) {
                throw DimensionError("extrapolation set: point " + std::to_string(k) + " has wrong length");
            }
            if (!points[k].allFinite() || points[k].norm() > chi) {
                throw InvalidArgument("extrapolation set: point " + std::to_string(k) +
                                      " outside operating ball");
            }
        }
    }
};

inline constexpr std::int64_t kMaxGridPoints = 1'000'000;

/// Uniform per_axis^n grid over the cube of edge `side` centred at `center`,
/// endpoints included. The last axis varies fastest.
[[nodiscard]] inline ExtrapolationSet grid_extrapolation_points(const Vector& center, double side, int per_axis) {
    if (per_axis < 2) {
        throw InvalidArgument("extrapolation grid: per_axis must be at least 2");
    }
    if (!(side > 0.0) || !std::isfinite(side)) {
        throw InvalidArgument("extrapolation grid: side must be positive");
    }
    const auto n = center.size();
    if (n == 0) {
        throw DimensionError("extrapolation grid: empty center");
    }
    std::int64_t total = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
        total *= per_axis;
        if (total > kMaxGridPoints) {
            throw InvalidArgument("extrapolation grid: more than 1e6 points requested");
        }
    }

    ExtrapolationSet set;
    set.points.reserve(static_cast<std::size_t>(total));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::int64_t p = 0; p < total; ++p) {
        Vector r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double frac = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (per_axis - 1);
            r[i] = center[i] + side * (frac - 0.5);
        }
        set.points.push_back(std::move(r));
        for (auto i = n - 1; i >= 0; --i) {
            auto& d = idx[static_cast<std::size_t>(i)];
            if (++d < per_axis) {
                break;
            }
            d = 0;
        }
    }
    return set;
}

// ============================================================================
// Value, policy and Bellman error
// ============================================================================

namespace detail {

template <ValueBasis Basis>
void check_basis(const Basis& basis, const Vector& s, const Vector& W) {
    if (basis.input_size() != s.size()) {
        throw DimensionError("basis input dimension does not match state");
    }
    if (basis.size() != W.size()) {
        throw DimensionError("weight vector length does not match basis size");
    }
}

}  // namespace detail

template <ValueBasis Basis>
[[nodiscard]] double value_hat(const Vector& s_hat, const Vector& W_c, const Basis& basis) {
    detail::check_basis(basis, s_hat, W_c);
    return W_c.dot(basis.value(s_hat));
}

/// u = -1/2 R^{-1} G(s)^T grad sigma(s)^T W_a.
template <ValueBasis Basis>
[[nodiscard]] Vector policy_hat(const Vector& s_hat, const Vector& W_a, const LinearPlant& plant,
                                const CostSpec& cost, const Basis& basis) {
    detail::check_basis(basis, s_hat, W_a);
    const Matrix G = transformed_G(s_hat, plant);
    return -0.5 * cost.R_inv() * (G.transpose() * (basis.gradient(s_hat).transpose() * W_a));
}

/// Every quantity the update laws need at a single evaluation point.
struct PointTerms {
    Vector omega;          ///< grad sigma (F + G u)
    Vector u;              ///< policy at the point
    Matrix G_sigma;        ///< grad sigma G R^{-1} G^T grad sigma^T
    double state_cost = 0.0;
    double control_cost = 0.0;
    double delta = 0.0;    ///< Bellman error
    double rho = 1.0;      ///< 1 + gamma omega^T omega
};

[[nodiscard]] inline double rho(const Vector& omega, double gamma) {
    if (!(gamma > 0.0)) {
        throw InvalidArgument("rho: gamma must be positive");
    }
    return 1.0 + gamma * omega.squaredNorm();
}

template <ValueBasis Basis>
[[nodiscard]] PointTerms evaluate_point(const Vector& p, const Vector& W_c, const Vector& W_a,
                                        const LinearPlant& plant, const CostSpec& cost, const Basis& basis,
                                        double gamma) {
    detail::check_basis(basis, p, W_c);
    detail::check_basis(basis, p, W_a);
    const Matrix grad = basis.gradient(p);
    const Vector F = transformed_F(p, plant);
    const Matrix G = transformed_G(p, plant);
    const Matrix grad_G = grad * G;

    PointTerms t;
    t.u = -0.5 * cost.R_inv() * (grad_G.transpose() * W_a);
    t.omega = grad * (F + G * t.u);
    t.G_sigma = grad_G * cost.R_inv() * grad_G.transpose();
    t.state_cost = cost.state_cost(p);
    t.control_cost = cost.control_cost(t.u);
    t.delta = t.omega.dot(W_c) + t.state_cost + t.control_cost;
    t.rho = rho(t.omega, gamma);
    return t;
}

template <ValueBasis Basis>
[[nodiscard]] Vector regressor_omega(const Vector& p, const Vector& W_a, const LinearPlant& plant,
                                     const CostSpec& cost, const Basis& basis) {
    detail::check_basis(basis, p, W_a);
    const Vector u = policy_hat(p, W_a, plant, cost, basis);
    return basis.gradient(p) * (transformed_F(p, plant) + transformed_G(p, plant) * u);
}

/// Bellman error at p: grad V(p) (F(p) + G(p) u) + p^T Q p + u^T R u, with the
/// value gradient formed first (W_c^T grad sigma) and then applied to sdot.
template <ValueBasis Basis>
[[nodiscard]] double bellman_error_at(const Vector& p, const Vector& W_c, const Vector& W_a,
                                      const LinearPlant& plant, const CostSpec& cost, const Basis& basis) {
    detail::check_basis(basis, p, W_c);
    const Vector u = policy_hat(p, W_a, plant, cost, basis);
    const Vector s_dot = transformed_F(p, plant) + transformed_G(p, plant) * u;
    const Eigen::RowVectorXd value_gradient = W_c.transpose() * basis.gradient(p);
    return value_gradient.dot(s_dot) + cost.state_cost(p) + cost.control_cost(u);
}

// ============================================================================
// Update laws
// ============================================================================

/// lambda_min((1/N) sum omega_k omega_k^T / rho_k^2), clamped at zero.
[[nodiscard]] inline double pe_metric(const std::vector<Vector>& omegas, const std::vector<double>& rhos) {
    if (omegas.empty() || omegas.size() != rhos.size()) {
        throw DimensionError("pe_metric: need equal, non-empty lists");
    }
    const auto l = omegas.front().size();
    Matrix gram = Matrix::Zero(l, l);
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        gram.noalias() += omegas[k] * omegas[k].transpose() / (rhos[k] * rhos[k]);
    }
    gram /= static_cast<double>(omegas.size());
    return std::max(0.0, control_math::min_eig_sym(gram));
}

/// Weight-independent pieces of the point evaluation. Extrapolation points are
/// fixed, so these are formed once per run.
struct PointCache {
    Vector grad_F;    ///< grad sigma(r) F(r)
    Matrix grad_G;    ///< grad sigma(r) G(r)
    Matrix G_sigma;   ///< grad_G R^{-1} grad_G^T
    double state_cost = 0.0;
};

template <ValueBasis Basis>
[[nodiscard]] std::vector<PointCache> precompute_points(const ExtrapolationSet& extrap, const LinearPlant& plant,
                                                        const CostSpec& cost, const Basis& basis) {
    std::vector<PointCache> cache;
    cache.reserve(extrap.size());
    for (const auto& r : extrap.points) {
        if (basis.input_size() != r.size()) {
            throw DimensionError("basis input dimension does not match extrapolation point");
        }
        const Matrix grad = basis.gradient(r);
        PointCache c;
        c.grad_F = grad * transformed_F(r, plant);
        c.grad_G = grad * transformed_G(r, plant);
        c.G_sigma = c.grad_G * cost.R_inv() * c.grad_G.transpose();
        c.state_cost = cost.state_cost(r);
        cache.push_back(std::move(c));
    }
    return cache;
}

[[nodiscard]] inline std::vector<PointTerms> extrapolation_terms(const std::vector<PointCache>& cache,
                                                                 const Vector& W_c, const Vector& W_a,
                                                                 const CostSpec& cost, double gamma) {
    std::vector<PointTerms> terms;
    terms.reserve(cache.size());
    for (const auto& c : cache) {
        if (c.grad_F.size() != W_c.size() || c.grad_F.size() != W_a.size()) {
            throw DimensionError("weight vector length does not match basis size");
        }
        PointTerms t;
        t.u = -0.5 * cost.R_inv() * (c.grad_G.transpose() * W_a);
        t.omega = c.grad_F + c.grad_G * t.u;
        t.G_sigma = c.G_sigma;
        t.state_cost = c.state_cost;
        t.control_cost = cost.control_cost(t.u);
        t.delta = t.omega.dot(W_c) + t.state_cost + t.control_cost;
        t.rho = rho(t.omega, gamma);
        terms.push_back(std::move(t));
    }
    return terms;
}

template <ValueBasis Basis>
[[nodiscard]] std::vector<PointTerms> extrapolation_terms(const LearnerState& learner, const ExtrapolationSet& extrap,
                                                          const LinearPlant& plant, const CostSpec& cost,
                                                          const Basis& basis, const LearnerGains& gains) {
    std::vector<PointTerms> terms;
    terms.reserve(extrap.size());
    for (const auto& r : extrap.points) {
        terms.push_back(evaluate_point(r, learner.W_c, learner.W_a, plant, cost, basis, gains.gamma));
    }
    return terms;
}

struct CriticDerivative {
    Vector W_c_dot;
    Matrix Gamma_dot;
};

/// Critic and least-squares gain dynamics driven by the extrapolated Bellman errors.
[[nodiscard]] inline CriticDerivative critic_rhs(const LearnerState& learner, const std::vector<PointTerms>& terms,
                                                 const LearnerGains& gains) {
    const auto l = learner.size();
    const double N = static_cast<double>(terms.size());
    Vector err_sum = Vector::Zero(l);
    Matrix gram_sum = Matrix::Zero(l, l);
    for (const auto& t : terms) {
        err_sum += t.omega * (t.delta / t.rho);
        gram_sum.noalias() += t.omega * t.omega.transpose() / (t.rho * t.rho);
    }
    CriticDerivative d;
    d.W_c_dot = -(gains.k_c / N) * (learner.Gamma * err_sum);
    d.Gamma_dot = gains.beta * learner.Gamma - (gains.k_c / N) * (learner.Gamma * gram_sum * learner.Gamma);
    return d;
}

template <ValueBasis Basis>
[[nodiscard]] CriticDerivative critic_rhs(const LearnerState& learner, const ExtrapolationSet& extrap,
                                          const LinearPlant& plant, const CostSpec& cost, const Basis& basis,
                                          const LearnerGains& gains) {
    return critic_rhs(learner, extrapolation_terms(learner, extrap, plant, cost, basis, gains), gains);
}

/// Actor dynamics: -k_a1 (W_a - W_c) + sum_k k_c G_sigma_k^T W_a omega_k^T W_c / (4 N rho_k) - k_a2 W_a.
[[nodiscard]] inline Vector actor_rhs(const LearnerState& learner, const std::vector<PointTerms>& terms,
                                      const LearnerGains& gains) {
    const double N = static_cast<double>(terms.size());
    Vector coupling = Vector::Zero(learner.size());
    for (const auto& t : terms) {
        coupling += (t.G_sigma.transpose() * learner.W_a) * (t.omega.dot(learner.W_c) / (4.0 * N * t.rho));
    }
    return -gains.k_a1 * (learner.W_a - learner.W_c) + gains.k_c * coupling - gains.k_a2 * learner.W_a;
}

template <ValueBasis Basis>
[[nodiscard]] Vector actor_rhs(const LearnerState& learner, const ExtrapolationSet& extrap, const LinearPlant& plant,
                               const CostSpec& cost, const Basis& basis, const LearnerGains& gains) {
    return actor_rhs(learner, extrapolation_terms(learner, extrap, plant, cost, basis, gains), gains);
}

[[nodiscard]] inline double pe_metric(const std::vector<PointTerms>& terms) {
    std::vector<Vector> omegas;
    std::vector<double> rhos;
    omegas.reserve(terms.size());
    rhos.reserve(terms.size());
    for (const auto& t : terms) {
        omegas.push_back(t.omega);
        rhos.push_back(t.rho);
    }
    return pe_metric(omegas, rhos);
}

}  // namespace barrier_mbrl
