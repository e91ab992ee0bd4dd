#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "barrier_mbrl/learner.hpp"
#include "barrier_mbrl/observer.hpp"

namespace barrier_mbrl {

// ============================================================================
// Faults and events
// ============================================================================

enum class EventKind { SafetyViolation, Divergence, NonFiniteState };

[[nodiscard]] inline const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::SafetyViolation: return "SafetyViolation";
        case EventKind::Divergence: return "Divergence";
        case EventKind::NonFiniteState: return "NonFiniteState";
    }
    return "Unknown";
}

/// Raised inside a right-hand side when the coupled state leaves its valid
/// region. `stage` is the RK4 substage (0-3), or -1 for a post-step check.
class SimulationFault : public Error {
public:
    SimulationFault(EventKind kind, const std::string& what) : Error(what), kind_(kind) {}

    [[nodiscard]] EventKind kind() const noexcept { return kind_; }
    [[nodiscard]] int stage() const noexcept { return stage_; }
    void set_stage(int stage) noexcept { stage_ = stage; }

private:
    EventKind kind_;
    int stage_ = -1;
};

/// A DomainError annotated with the RK4 substage that raised it.
class StageError : public DomainError {
public:
    StageError(int stage, const DomainError& inner)
        : DomainError("rk4 stage " + std::to_string(stage) + ": " + inner.what(), inner.index()), stage_(stage) {}

    [[nodiscard]] int stage() const noexcept { return stage_; }

private:
    int stage_;
};

struct SimEvent {
    EventKind kind;
    double t = 0.0;   ///< start time of the step in which the fault arose
    int stage = -1;
    std::string message;
};

// ============================================================================
// Integrator
// ============================================================================

/// One classical fourth-order Runge-Kutta step of ydot = rhs(t, y).
template <class Rhs>
[[nodiscard]] Vector rk4_step(Rhs&& rhs, const Vector& y, double t, double dt) {
    int stage = 0;
    try {
        const Vector k1 = rhs(t, y);
        stage = 1;
        const Vector k2 = rhs(t + 0.5 * dt, Vector(y + 0.5 * dt * k1));
        stage = 2;
        const Vector k3 = rhs(t + 0.5 * dt, Vector(y + 0.5 * dt * k2));
        stage = 3;
        const Vector k4 = rhs(t + dt, Vector(y + dt * k3));
        return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (SimulationFault& e) {
        e.set_stage(stage);
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const DomainError& e) {
        throw StageError(stage, e);
    }
}

// ============================================================================
// Configuration and logs
// ============================================================================

struct SimConfig {
    double dt = 1e-3;
    double duration = 10.0;
    int log_stride = 10;
    double operating_radius = 50.0;  ///< ball in shat-space: extrapolation points and divergence guard
    double weight_guard = 1e6;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InvalidArgument("sim: dt must be positive");
        }
        if (!(duration > 0.0) || !std::isfinite(duration)) {
            throw InvalidArgument("sim: duration must be positive");
        }
        if (dt > duration) {
            throw InvalidArgument("sim: dt must not exceed duration");
        }
        if (log_stride < 1) {
            throw InvalidArgument("sim: log_stride must be at least 1");
        }
        if (!(operating_radius > 0.0) || !(weight_guard > 0.0)) {
            throw InvalidArgument("sim: guards must be positive");
        }
    }

    [[nodiscard]] long steps() const { return std::lround(duration / dt); }
};

struct TrajectoryRow {
    double t = 0.0;
    Vector x;
    Vector x_hat;
    Vector s;
    Vector s_hat;
    Vector u;
    double be = 0.0;  ///< Bellman error at the current estimate
    Vector W_c;
    Vector W_a;
    double w_gap = 0.0;
    double pe = 0.0;
    double gamma_min_eig = 0.0;
    double gamma_asymmetry = 0.0;  ///< max |Gamma - Gamma^T|, not serialized
    double safety_margin = 0.0;
};

struct TrajectoryLog {
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Eigen::Index l = 0;
    std::vector<TrajectoryRow> rows;

    [[nodiscard]] std::vector<std::string> columns() const {
        std::vector<std::string> cols{"t"};
        const auto add = [&cols](const std::string& prefix, Eigen::Index count) {
            for (Eigen::Index i = 1; i <= count; ++i) {
                cols.push_back(prefix + std::to_string(i));
            }
        };
        add("x", n);
        add("xhat", n);
        add("s", n);
        add("shat", n);
        add("u", m);
        cols.emplace_back("be");
        add("wc", l);
        add("wa", l);
        for (const char* c : {"w_gap", "pe", "gamma_mineig", "safety_margin"}) {
            cols.emplace_back(c);
        }
        return cols;
    }

    void write_csv(std::ostream& os) const {
        const auto cols = columns();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            os << (i ? "," : "") << cols[i];
        }
        os << '\n';
        std::ostringstream line;
        line << std::setprecision(17);
        for (const auto& r : rows) {
            line.str({});
            line << r.t;
            const auto put = [&line](const Vector& v) {
                for (Eigen::Index i = 0; i < v.size(); ++i) {
                    line << ',' << v[i];
                }
            };
            put(r.x);
            put(r.x_hat);
            put(r.s);
            put(r.s_hat);
            put(r.u);
            line << ',' << r.be;
            put(r.W_c);
            put(r.W_a);
            line << ',' << r.w_gap << ',' << r.pe << ',' << r.gamma_min_eig << ',' << r.safety_margin << '\n';
            os << line.str();
        }
    }
};

struct SimResult {
    TrajectoryLog log;
    std::optional<SimEvent> event;

    [[nodiscard]] bool completed() const noexcept { return !event.has_value(); }
};

// ============================================================================
// Closed loop: plant in x, observer in shat, learner weights, u = u_hat(shat, W_a)
// ============================================================================

template <ValueBasis Basis>
struct ClosedLoopSetup {
    ObserverConfig observer;
    CostSpec cost;
    Basis basis;
    LearnerGains gains;
    ExtrapolationSet extrapolation;

    [[nodiscard]] const LinearPlant& plant() const noexcept { return observer.plant(); }

    [[nodiscard]] std::vector<PointCache> point_cache() const {
        return precompute_points(extrapolation, plant(), cost, basis);
    }
};

/// Flat layout [x (n) | shat (n) | W_c (l) | vec(Gamma) (l*l) | W_a (l)].
struct ClosedLoopState {
    Vector x;
    Vector s_hat;
    LearnerState learner;
    double t = 0.0;

    [[nodiscard]] Vector pack() const {
        const auto n = x.size();
        const auto l = learner.size();
        Vector y(2 * n + 2 * l + l * l);
        y << x, s_hat, learner.W_c, Eigen::Map<const Vector>(learner.Gamma.data(), l * l), learner.W_a;
        return y;
    }

    static ClosedLoopState unpack(const Vector& y, Eigen::Index n, Eigen::Index l, double t) {
        ClosedLoopState st;
        st.x = y.segment(0, n);
        st.s_hat = y.segment(n, n);
        st.learner.W_c = y.segment(2 * n, l);
        st.learner.Gamma = Eigen::Map<const Matrix>(y.data() + 2 * n + l, l, l);
        st.learner.W_a = y.segment(2 * n + l + l * l, l);
        st.t = t;
        return st;
    }
};

namespace detail {

inline Vector checked_transform(const Vector& x, const BarrierLimits& limits) {
    try {
        return barrier::bf_vec(x, limits);
    } catch (const DomainError& e) {
        throw SimulationFault(EventKind::SafetyViolation, std::string("state reached barrier: ") + e.what());
    }
}

inline void check_estimate(const Vector& s_hat, double radius) {
    if (!s_hat.allFinite()) {
        throw SimulationFault(EventKind::NonFiniteState, "non-finite state estimate");
    }
    if (s_hat.lpNorm<Eigen::Infinity>() > radius) {
        throw SimulationFault(EventKind::Divergence, "transformed estimate left operating ball");
    }
}

}  // namespace detail

template <ValueBasis Basis>
[[nodiscard]] Vector closed_loop_rhs(const ClosedLoopSetup<Basis>& setup, const std::vector<PointCache>& cache,
                                     const SimConfig& sim, const ClosedLoopState& st) {
    const auto& plant = setup.plant();
    if (!st.x.allFinite() || !st.learner.W_c.allFinite() || !st.learner.W_a.allFinite() ||
        !st.learner.Gamma.allFinite()) {
        throw SimulationFault(EventKind::NonFiniteState, "non-finite closed-loop state");
    }
    detail::checked_transform(st.x, plant.limits());
    detail::check_estimate(st.s_hat, sim.operating_radius);

    const Vector u = policy_hat(st.s_hat, st.learner.W_a, plant, setup.cost, setup.basis);
    const Vector y_m = transform_output(plant_output(st.x, plant), plant);

    const auto terms = extrapolation_terms(cache, st.learner.W_c, st.learner.W_a, setup.cost, setup.gains.gamma);
    const CriticDerivative critic = critic_rhs(st.learner, terms, setup.gains);
    const Vector actor = actor_rhs(st.learner, terms, setup.gains);

    ClosedLoopState d;
    d.x = plant_rhs(st.x, u, plant);
    d.s_hat = observer_rhs_transformed(st.s_hat, u, y_m, setup.observer);
    d.learner.W_c = critic.W_c_dot;
    d.learner.Gamma = critic.Gamma_dot;
    d.learner.W_a = actor;
    return d.pack();
}

template <ValueBasis Basis>
[[nodiscard]] TrajectoryRow make_row(const ClosedLoopSetup<Basis>& setup, const std::vector<PointCache>& cache,
                                     const ClosedLoopState& st) {
    const auto& plant = setup.plant();
    TrajectoryRow r;
    r.t = st.t;
    r.x = st.x;
    r.s = barrier::bf_vec(st.x, plant.limits());
    r.s_hat = st.s_hat;
    r.x_hat = barrier::bf_inv_vec(st.s_hat, plant.limits());
    r.u = policy_hat(st.s_hat, st.learner.W_a, plant, setup.cost, setup.basis);
    r.be = bellman_error_at(st.s_hat, st.learner.W_c, st.learner.W_a, plant, setup.cost, setup.basis);
    r.W_c = st.learner.W_c;
    r.W_a = st.learner.W_a;
    r.w_gap = (st.learner.W_a - st.learner.W_c).norm();
    r.pe = pe_metric(extrapolation_terms(cache, st.learner.W_c, st.learner.W_a, setup.cost, setup.gains.gamma));
    const Matrix& G = st.learner.Gamma;
    r.gamma_asymmetry = (G - G.transpose()).cwiseAbs().maxCoeff();
    r.gamma_min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (G + G.transpose()), Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
    r.safety_margin = plant.limits().margin(st.x);
    return r;
}

/// Integrates plant, observer and learner together with RK4. Stops at the first
/// fault and reports it as an event; the log holds every row recorded before it.
template <ValueBasis Basis>
[[nodiscard]] SimResult simulate_closed_loop(const ClosedLoopSetup<Basis>& setup, const LearnerState& learner0,
                                             const SimConfig& sim, const Vector& x0, const Vector& x_hat0) {
    const auto& plant = setup.plant();
    sim.validate();
    setup.gains.validate();
    setup.cost.check_against(plant);
    learner0.validate();
    plant.check_state(x0);
    plant.check_state(x_hat0);
    if (setup.basis.input_size() != plant.states() || setup.basis.size() != learner0.size()) {
        throw DimensionError("closed loop: basis dimensions disagree with plant or weights");
    }
    setup.extrapolation.validate(plant.states(), sim.operating_radius);
    (void)barrier::bf_vec(x0, plant.limits());
    const auto cache = setup.point_cache();

    const auto n = plant.states();
    const auto l = learner0.size();

    SimResult result;
    result.log.n = n;
    result.log.m = plant.inputs();
    result.log.l = l;

    ClosedLoopState st{x0, barrier::bf_vec(x_hat0, plant.limits()), learner0, 0.0};
    Vector y = st.pack();
    const auto rhs = [&](double t, const Vector& v) {
        return closed_loop_rhs(setup, cache, sim, ClosedLoopState::unpack(v, n, l, t));
    };

    const long steps = sim.steps();
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * sim.dt;
        st = ClosedLoopState::unpack(y, n, l, t);
        try {
            if (!y.allFinite()) {
                throw SimulationFault(EventKind::NonFiniteState, "non-finite closed-loop state");
            }
            detail::checked_transform(st.x, plant.limits());
            detail::check_estimate(st.s_hat, sim.operating_radius);
            if (st.learner.W_c.norm() > sim.weight_guard || st.learner.W_a.norm() > sim.weight_guard ||
                st.learner.Gamma.norm() > sim.weight_guard) {
                throw SimulationFault(EventKind::Divergence, "learner weights exceeded guard");
            }
            if (k % sim.log_stride == 0) {
                result.log.rows.push_back(make_row(setup, cache, st));
            }
            if (k == steps) {
                break;
            }
            y = rk4_step(rhs, y, t, sim.dt);
        } catch (const SimulationFault& e) {
            result.event = SimEvent{e.kind(), t, e.stage(), e.what()};
            break;
        } catch (const DomainError& e) {
            const int stage = [&] {
                if (const auto* se = dynamic_cast<const StageError*>(&e)) {
                    return se->stage();
                }
                return -1;
            }();
            result.event = SimEvent{EventKind::Divergence, t, stage, e.what()};
            break;
        }
    }
    return result;
}

// ============================================================================
// Dual-coordinate harnesses
// ============================================================================

/// Feedback policy acting on transformed coordinates.
using TransformedFeedback = std::function<Vector(const Vector&)>;

template <ValueBasis Basis>
[[nodiscard]] TransformedFeedback fixed_weight_feedback(const LinearPlant& plant, const CostSpec& cost,
                                                        const Basis& basis, Vector W_a) {
    return [plant, cost, basis, W = std::move(W_a)](const Vector& s) {
        return policy_hat(s, W, plant, cost, basis);
    };
}

struct DualRun {
    std::vector<double> t;
    std::vector<Vector> original;     ///< trajectory integrated in original coordinates
    std::vector<Vector> transformed;  ///< trajectory integrated in transformed coordinates
    double max_deviation = 0.0;       ///< sup_t || b(original) - transformed ||
};

namespace detail {

template <class OrigRhs, class TransRhs, class Extract>
DualRun dual_integrate(OrigRhs&& orig_rhs, TransRhs&& trans_rhs, Vector y_orig, Vector y_trans,
                       const SimConfig& sim, Extract&& deviation) {
    sim.validate();
    DualRun run;
    const long steps = sim.steps();
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * sim.dt;
        const double dev = deviation(y_orig, y_trans);
        if (!std::isfinite(dev)) {
            throw SimulationFault(EventKind::NonFiniteState, "non-finite deviation in dual integration");
        }
        run.max_deviation = std::max(run.max_deviation, dev);
        if (k % sim.log_stride == 0) {
            run.t.push_back(t);
            run.original.push_back(y_orig);
            run.transformed.push_back(y_trans);
        }
        if (k == steps) {
            break;
        }
        y_orig = rk4_step(orig_rhs, y_orig, t, sim.dt);
        y_trans = rk4_step(trans_rhs, y_trans, t, sim.dt);
    }
    return run;
}

}  // namespace detail

/// Integrates xdot = A x + B zeta(b(x)) and sdot = F(s) + G(s) zeta(s) from
/// s(0) = b(x0) and reports sup_t ||b(x(t)) - s(t)||.
[[nodiscard]] inline DualRun simulate_lemma1_pair(const LinearPlant& plant, const TransformedFeedback& feedback,
                                                  const Vector& x0, const SimConfig& sim) {
    plant.check_state(x0);
    const auto& limits = plant.limits();
    const auto orig = [&](double, const Vector& x) {
        const Vector s = detail::checked_transform(x, limits);
        return plant_rhs(x, feedback(s), plant);
    };
    const auto trans = [&](double, const Vector& s) {
        detail::check_estimate(s, barrier::kOverflowGuard);
        return Vector(transformed_F(s, plant) + transformed_G(s, plant) * feedback(s));
    };
    const auto dev = [&](const Vector& x, const Vector& s) {
        return (detail::checked_transform(x, limits) - s).norm();
    };
    return detail::dual_integrate(orig, trans, x0, barrier::bf_vec(x0, limits), sim, dev);
}

/// Runs the estimator in original coordinates and in transformed coordinates
/// against the same plant trajectory, driven by u = zeta(b(x)). Both augmented
/// states carry an identical copy of x. Reports sup_t ||b(xhat(t)) - shat(t)||.
[[nodiscard]] inline DualRun simulate_lemma2_pair(const ObserverConfig& observer, const TransformedFeedback& feedback,
                                                  const Vector& x0, const Vector& x_hat0, const SimConfig& sim) {
    const auto& plant = observer.plant();
    plant.check_state(x0);
    plant.check_state(x_hat0);
    const auto& limits = plant.limits();
    const auto n = plant.states();

    const auto plant_part = [&](const Vector& x, Vector& u, Vector& y_m) {
        u = feedback(detail::checked_transform(x, limits));
        y_m = transform_output(plant_output(x, plant), plant);
        return plant_rhs(x, u, plant);
    };
    const auto orig = [&](double, const Vector& z) {
        Vector u, y_m;
        Vector d(2 * n);
        d.head(n) = plant_part(z.head(n), u, y_m);
        d.tail(n) = observer_rhs_original(z.tail(n), u, y_m, observer);
        return d;
    };
    const auto trans = [&](double, const Vector& z) {
        Vector u, y_m;
        Vector d(2 * n);
        d.head(n) = plant_part(z.head(n), u, y_m);
        detail::check_estimate(z.tail(n), barrier::kOverflowGuard);
        d.tail(n) = observer_rhs_transformed(z.tail(n), u, y_m, observer);
        return d;
    };
    const auto dev = [&](const Vector& zo, const Vector& zt) {
        return (barrier::bf_vec(zo.tail(n), limits) - zt.tail(n)).norm();
    };

    Vector zo(2 * n), zt(2 * n);
    zo << x0, x_hat0;
    zt << x0, barrier::bf_vec(x_hat0, limits);
    return detail::dual_integrate(orig, trans, zo, zt, sim, dev);
}

/// Observed order of convergence between successive step halvings.
[[nodiscard]] inline double convergence_order(double coarse_error, double fine_error) {
    return std::log2(coarse_error / fine_error);
}

}  // namespace barrier_mbrl
