#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "barrier_mbrl/scenario.hpp"

namespace barrier_mbrl::f16 {

/// Longitudinal F-16 model: states are angle of attack [rad], pitch rate
/// [rad/s] and elevator deflection [rad]; only the angle of attack is measured.
[[nodiscard]] inline Scenario scenario() {
    Scenario sc;
    sc.A.resize(3, 3);
    sc.A << -1.01887, 0.90506, -0.00215,
             0.82225, -1.07741, -0.17555,
             0.0, 0.0, -1.0;
    sc.B.resize(3, 1);
    sc.B << 0.0, 0.0, 1.0;
    sc.C.resize(1, 3);
    sc.C << 1.0, 0.0, 0.0;
    sc.lower = Vector::Constant(3, -0.1);
    sc.upper = Vector::Constant(3, 0.1);
    sc.Q = 10.0 * Matrix::Identity(3, 3);
    sc.R = Matrix::Identity(1, 1);
    sc.L = Matrix::Ones(3, 1);
    sc.zeta = Matrix::Identity(3, 3);
    sc.basis = "quadratic";
    sc.gains = LearnerGains{100.0, 100.0, 1.0, 0.1, 1.0};
    sc.W_c0 = Vector::Ones(6);
    sc.W_a0 = Vector::Ones(6);
    sc.Gamma0 = Matrix::Identity(6, 6);
    sc.extrapolation.grid_center = Vector::Zero(3);
    sc.extrapolation.grid_side = 0.08;
    sc.extrapolation.grid_per_axis = 5;
    sc.sim = SimConfig{1e-4, 10.0, 100, 50.0, 1e6};
    sc.x0 = (Vector(3) << 0.045, 0.0, 0.0393).finished();
    sc.x_hat0 = Vector::Constant(3, 0.05);
    return sc;
}

// Pass/fail thresholds for the benchmark's qualitative claims.
inline constexpr double kEstimationErrorGate = 1e-2;
inline constexpr double kWeightGapGate = 0.1;

struct Overrides {
    std::optional<double> dt;
    std::optional<double> duration;
    std::optional<int> log_stride;
    std::optional<Vector> x0;
    std::optional<Vector> x_hat0;
    std::optional<Vector> W_c0;
    std::optional<Vector> W_a0;

    /// Applies the overrides and returns "key=value" notes for the report.
    std::vector<std::string> apply(Scenario& sc) const {
        std::vector<std::string> notes;
        const auto vec_text = [](const Vector& v) {
            std::string s;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                s += (i ? " " : "") + scenario_io::format_number(v[i]);
            }
            return s;
        };
        if (dt) {
            sc.sim.dt = *dt;
            notes.push_back("dt=" + scenario_io::format_number(*dt));
        }
        if (duration) {
            sc.sim.duration = *duration;
            notes.push_back("duration=" + scenario_io::format_number(*duration));
        }
        if (log_stride) {
            sc.sim.log_stride = *log_stride;
            notes.push_back("log_stride=" + std::to_string(*log_stride));
        }
        if (x0) {
            sc.x0 = *x0;
            notes.push_back("x0=" + vec_text(*x0));
        }
        if (x_hat0) {
            sc.x_hat0 = *x_hat0;
            notes.push_back("xhat0=" + vec_text(*x_hat0));
        }
        if (W_c0) {
            sc.W_c0 = *W_c0;
            notes.push_back("W_c0=" + vec_text(*W_c0));
        }
        if (W_a0) {
            sc.W_a0 = *W_a0;
            notes.push_back("W_a0=" + vec_text(*W_a0));
        }
        return notes;
    }
};

struct Gate {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct BenchmarkReport {
    Scenario scenario;
    std::vector<std::string> overrides;
    SimResult result;

    bool in_box = false;               ///< every logged |x_i| strictly inside the box
    double min_safety_margin = 0.0;
    double est_err_final = 0.0;        ///< ||x(T) - xhat(T)||
    double weight_gap_final = 0.0;     ///< ||W_a(T) - W_c(T)||
    double pe_min = 0.0;               ///< min_t pe_metric
    double gamma_min_eig = 0.0;        ///< min_t lambda_min(Gamma)
    double gamma_max_asymmetry = 0.0;
    double state_final = 0.0;          ///< ||x(T)||

    [[nodiscard]] bool completed() const noexcept { return result.completed(); }

    [[nodiscard]] std::vector<Gate> gates() const {
        const auto num = scenario_io::format_number;
        std::vector<Gate> g;
        g.push_back({"completed", completed(),
                     completed() ? "no simulation event"
                                 : std::string(to_string(result.event->kind)) + " at t=" + num(result.event->t)});
        g.push_back({"in_box", completed() && in_box && min_safety_margin > 0.0,
                     "min safety margin " + num(min_safety_margin)});
        g.push_back({"estimation_error", completed() && est_err_final <= kEstimationErrorGate,
                     "||x-xhat||(T) = " + num(est_err_final) + " (gate <= " + num(kEstimationErrorGate) + ")"});
        g.push_back({"weight_agreement", completed() && weight_gap_final < kWeightGapGate,
                     "||W_a-W_c||(T) = " + num(weight_gap_final) + " (gate < " + num(kWeightGapGate) + ")"});
        g.push_back({"pe_condition", completed() && pe_min > 0.0, "min pe metric " + num(pe_min)});
        g.push_back({"gamma_pd", completed() && gamma_min_eig > 0.0, "min eig Gamma " + num(gamma_min_eig)});
        return g;
    }

    [[nodiscard]] bool passed() const {
        const auto g = gates();
        return std::all_of(g.begin(), g.end(), [](const Gate& x) { return x.passed; });
    }

    [[nodiscard]] std::string summary() const {
        const auto num = scenario_io::format_number;
        std::ostringstream os;
        os << "F-16 longitudinal safety benchmark\n";
        os << "scenario checksum (fnv1a64): " << fnv1a_hex(to_canonical_text(scenario)) << '\n';
        os << "overrides: ";
        if (overrides.empty()) {
            os << "none";
        }
        for (std::size_t i = 0; i < overrides.size(); ++i) {
            os << (i ? ", " : "") << overrides[i];
        }
        os << "\nobserver zeta: " << (scenario.zeta.isIdentity(0.0) ? "identity (default)" : "user supplied") << '\n';
        os << "logged rows: " << result.log.rows.size() << '\n';
        if (result.event) {
            os << "event: " << to_string(result.event->kind) << " at t=" << num(result.event->t)
               << " stage=" << result.event->stage << ": " << result.event->message << '\n';
        }
        os << "metrics:\n"
           << "  in_box            " << (in_box ? "true" : "false") << '\n'
           << "  min_safety_margin " << num(min_safety_margin) << '\n'
           << "  est_err_final     " << num(est_err_final) << '\n'
           << "  weight_gap_final  " << num(weight_gap_final) << '\n'
           << "  pe_min            " << num(pe_min) << '\n'
           << "  gamma_min_eig     " << num(gamma_min_eig) << '\n'
           << "  state_final       " << num(state_final) << '\n';
        os << "gates:\n";
        for (const auto& g : gates()) {
            os << "  [" << (g.passed ? "PASS" : "FAIL") << "] " << g.name << ": " << g.detail << '\n';
        }
        return os.str();
    }
};

[[nodiscard]] inline BenchmarkReport summarize(Scenario sc, std::vector<std::string> notes, SimResult result) {
    BenchmarkReport rep;
    rep.scenario = std::move(sc);
    rep.overrides = std::move(notes);
    rep.result = std::move(result);
    const auto& rows = rep.result.log.rows;
    if (rows.empty()) {
        return rep;
    }
    rep.in_box = true;
    rep.min_safety_margin = rows.front().safety_margin;
    rep.pe_min = rows.front().pe;
    rep.gamma_min_eig = rows.front().gamma_min_eig;
    for (const auto& r : rows) {
        rep.in_box = rep.in_box && (r.x.array() < rep.scenario.upper.array()).all() &&
                     (r.x.array() > rep.scenario.lower.array()).all();
        rep.min_safety_margin = std::min(rep.min_safety_margin, r.safety_margin);
        rep.pe_min = std::min(rep.pe_min, r.pe);
        rep.gamma_min_eig = std::min(rep.gamma_min_eig, r.gamma_min_eig);
        rep.gamma_max_asymmetry = std::max(rep.gamma_max_asymmetry, r.gamma_asymmetry);
    }
    const auto& last = rows.back();
    rep.est_err_final = (last.x - last.x_hat).norm();
    rep.weight_gap_final = last.w_gap;
    rep.state_final = last.x.norm();
    return rep;
}

[[nodiscard]] inline BenchmarkReport run_benchmark(const Overrides& overrides = {}) {
    Scenario sc = scenario();
    auto notes = overrides.apply(sc);
    auto result = sc.run();
    return summarize(std::move(sc), std::move(notes), std::move(result));
}

}  // namespace barrier_mbrl::f16
