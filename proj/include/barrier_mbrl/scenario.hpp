#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "barrier_mbrl/simulator.hpp"

namespace barrier_mbrl {

/// Extrapolation points given either as a uniform grid or as an explicit list.
struct ExtrapolationSpec {
    std::optional<Vector> grid_center;
    double grid_side = 0.0;
    int grid_per_axis = 0;
    std::vector<Vector> points;

    [[nodiscard]] bool is_grid() const noexcept { return grid_center.has_value(); }

    [[nodiscard]] ExtrapolationSet realize() const {
        if (is_grid()) {
            return grid_extrapolation_points(*grid_center, grid_side, grid_per_axis);
        }
        return ExtrapolationSet{points};
    }
};

/// Everything needed for one closed-loop run. Mirrors the scenario file layout.
struct Scenario {
    Matrix A, B, C;
    Vector lower, upper;
    Matrix Q, R;
    Matrix L;
    Matrix zeta;  ///< Lyapunov right-hand side for the observer certificate
    std::string basis = "quadratic";
    LearnerGains gains;
    Vector W_c0, W_a0;
    Matrix Gamma0;
    ExtrapolationSpec extrapolation;
    SimConfig sim;
    Vector x0, x_hat0;

    [[nodiscard]] LinearPlant plant() const { return {A, B, C, BarrierLimits(lower, upper)}; }

    [[nodiscard]] ClosedLoopSetup<QuadraticBasis> setup() const {
        return {ObserverConfig(plant(), L), CostSpec(Q, R), QuadraticBasis(A.rows()), gains,
                extrapolation.realize()};
    }

    [[nodiscard]] LearnerState learner0() const { return {W_c0, Gamma0, W_a0}; }

    [[nodiscard]] SimResult run() const { return simulate_closed_loop(setup(), learner0(), sim, x0, x_hat0); }
};

namespace scenario_io {

namespace pt = boost::property_tree;

/// Shortest decimal that round-trips to the same double.
[[nodiscard]] inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

[[nodiscard]] inline std::vector<double> parse_numbers(const std::string& section, const std::string& key,
                                                       const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        double v = 0.0;
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (*first == '+') {
            ++first;
        }
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
            throw ConfigError(section + "." + key, "not a finite number: '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

class SectionReader {
public:
    SectionReader(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return tree_ != nullptr && tree_->find(key) != tree_->not_found();
    }

    [[nodiscard]] std::string raw(const std::string& key) {
        if (!has(key)) {
            throw ConfigError(name_ + "." + key, "missing required key");
        }
        return tree_->get<std::string>(key);
    }

    [[nodiscard]] std::vector<double> numbers(const std::string& key) { return parse_numbers(name_, key, raw(key)); }

    [[nodiscard]] double scalar(const std::string& key) {
        const auto v = numbers(key);
        if (v.size() != 1) {
            throw ConfigError(name_ + "." + key, "expected a single number");
        }
        return v.front();
    }

    [[nodiscard]] long integer(const std::string& key) {
        const double v = scalar(key);
        if (v != std::floor(v) || std::abs(v) > 1e9) {
            throw ConfigError(name_ + "." + key, "expected an integer");
        }
        return static_cast<long>(v);
    }

    [[nodiscard]] Vector vector(const std::string& key, Eigen::Index len) {
        const auto v = numbers(key);
        if (static_cast<Eigen::Index>(v.size()) != len) {
            throw ConfigError(name_ + "." + key, "expected " + std::to_string(len) + " numbers, got " +
                                                     std::to_string(v.size()));
        }
        return Eigen::Map<const Vector>(v.data(), len);
    }

    /// Row-major list of rows*cols numbers, or `eye <scale>` for square matrices.
    [[nodiscard]] Matrix matrix(const std::string& key, Eigen::Index rows, Eigen::Index cols) {
        const std::string text = raw(key);
        std::istringstream is(text);
        std::string head;
        is >> head;
        if (head == "eye") {
            std::string rest((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
            const auto scale = parse_numbers(name_, key, rest);
            if (rows != cols || scale.size() != 1) {
                throw ConfigError(name_ + "." + key, "'eye <scale>' needs a square matrix and one number");
            }
            return scale.front() * Matrix::Identity(rows, cols);
        }
        const auto v = parse_numbers(name_, key, text);
        if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
            throw ConfigError(name_ + "." + key, "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                                                     " = " + std::to_string(rows * cols) + " numbers, got " +
                                                     std::to_string(v.size()));
        }
        Matrix M(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                M(r, c) = v[static_cast<std::size_t>(r * cols + c)];
            }
        }
        return M;
    }

    void reject_unknown() const {
        if (tree_ == nullptr) {
            return;
        }
        for (const auto& [key, child] : *tree_) {
            if (!seen_.contains(key)) {
                throw ConfigError(name_ + "." + key, "unknown key");
            }
        }
    }

    [[nodiscard]] const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
    const pt::ptree* tree_;
    std::set<std::string> seen_;
};

/// Runs `fn`, turning library invariant failures into ConfigErrors naming `section`.
template <class Fn>
void in_section(const std::string& section, Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(section, e.what());
    }
}

}  // namespace scenario_io

/// Parses and fully validates a scenario. Every failure is a ConfigError whose
/// key names the offending section (and key, when there is one).
[[nodiscard]] inline Scenario parse_scenario(std::istream& in) {
    using namespace scenario_io;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("syntax", e.message() + " at line " + std::to_string(e.line()));
    }

    static const std::set<std::string> known{"plant", "limits", "cost", "observer", "learner", "extrapolation", "sim"};
    for (const auto& [name, child] : tree) {
        if (!known.contains(name)) {
            throw ConfigError(name, "unknown section");
        }
        if (!child.data().empty()) {
            throw ConfigError(name, "key outside of any section");
        }
    }
    const auto section = [&tree](const std::string& name) {
        const auto it = tree.find(name);
        if (it == tree.not_found()) {
            throw ConfigError(name, "missing section");
        }
        return SectionReader(name, &it->second);
    };

    Scenario sc;

    auto plant = section("plant");
    const long n = plant.integer("n");
    const long m = plant.integer("m");
    const long q = plant.integer("q");
    if (n < 1 || m < 1 || q < 1 || n > 64 || m > 64 || q > n) {
        throw ConfigError("plant", "need 1 <= n, m <= 64 and 1 <= q <= n");
    }
    sc.A = plant.matrix("A", n, n);
    sc.B = plant.matrix("B", n, m);
    sc.C = plant.matrix("C", q, n);
    plant.reject_unknown();
    in_section("plant", [&] {
        if (!validate_selection_matrix(sc.C)) {
            throw InvalidArgument("C: every row must be a distinct standard basis vector");
        }
    });

    auto limits = section("limits");
    sc.lower = limits.vector("lower", n);
    sc.upper = limits.vector("upper", n);
    limits.reject_unknown();
    in_section("limits", [&] { (void)BarrierLimits(sc.lower, sc.upper); });

    auto cost = section("cost");
    sc.Q = cost.matrix("Q", n, n);
    sc.R = cost.matrix("R", m, m);
    cost.reject_unknown();
    in_section("cost", [&] { (void)CostSpec(sc.Q, sc.R); });

    auto observer = section("observer");
    sc.L = observer.matrix("L", n, q);
    sc.zeta = observer.has("zeta") ? observer.matrix("zeta", n, n) : Matrix::Identity(n, n);
    observer.reject_unknown();
    in_section("observer", [&] {
        (void)ObserverConfig(sc.plant(), sc.L);
        if (!control_math::is_positive_definite(sc.zeta)) {
            throw InvalidArgument("zeta must be symmetric positive definite");
        }
    });

    auto learner = section("learner");
    sc.basis = learner.has("basis") ? learner.raw("basis") : "quadratic";
    if (sc.basis != "quadratic") {
        throw ConfigError("learner.basis", "unknown basis '" + sc.basis + "' (supported: quadratic)");
    }
    const auto l = QuadraticBasis(n).size();
    sc.gains.k_c = learner.scalar("k_c");
    sc.gains.k_a1 = learner.scalar("k_a1");
    sc.gains.k_a2 = learner.scalar("k_a2");
    sc.gains.beta = learner.scalar("beta");
    sc.gains.gamma = learner.scalar("gamma");
    sc.W_c0 = learner.vector("W_c0", l);
    sc.W_a0 = learner.vector("W_a0", l);
    sc.Gamma0 = learner.matrix("Gamma0", l, l);
    learner.reject_unknown();
    in_section("learner", [&] {
        sc.gains.validate();
        sc.learner0().validate();
    });

    auto sim = section("sim");
    sc.sim.dt = sim.scalar("dt");
    sc.sim.duration = sim.scalar("duration");
    sc.sim.log_stride = static_cast<int>(sim.integer("log_stride"));
    if (sim.has("operating_radius")) {
        sc.sim.operating_radius = sim.scalar("operating_radius");
    }
    if (sim.has("weight_guard")) {
        sc.sim.weight_guard = sim.scalar("weight_guard");
    }
    sc.x0 = sim.vector("x0", n);
    sc.x_hat0 = sim.vector("xhat0", n);
    sim.reject_unknown();
    in_section("sim", [&] {
        sc.sim.validate();
        const BarrierLimits box(sc.lower, sc.upper);
        (void)barrier::bf_vec(sc.x0, box);
        (void)barrier::bf_vec(sc.x_hat0, box);
    });

    auto extrap = section("extrapolation");
    const bool grid = extrap.has("center") || extrap.has("side") || extrap.has("per_axis");
    const bool explicit_points = extrap.has("points");
    if (grid == explicit_points) {
        throw ConfigError("extrapolation", "give either center/side/per_axis or points");
    }
    if (grid) {
        sc.extrapolation.grid_center = extrap.vector("center", n);
        sc.extrapolation.grid_side = extrap.scalar("side");
        sc.extrapolation.grid_per_axis = static_cast<int>(extrap.integer("per_axis"));
    } else {
        std::istringstream is(extrap.raw("points"));
        std::string chunk;
        while (std::getline(is, chunk, ';')) {
            const auto v = parse_numbers("extrapolation", "points", chunk);
            if (v.empty()) {
                continue;
            }
            if (static_cast<long>(v.size()) != n) {
                throw ConfigError("extrapolation.points", "each point needs " + std::to_string(n) + " numbers");
            }
            sc.extrapolation.points.emplace_back(Eigen::Map<const Vector>(v.data(), n));
        }
    }
    extrap.reject_unknown();
    in_section("extrapolation", [&] { sc.extrapolation.realize().validate(n, sc.sim.operating_radius); });

    return sc;
}

[[nodiscard]] inline Scenario parse_scenario(const std::string& text) {
    std::istringstream is(text);
    return parse_scenario(is);
}

[[nodiscard]] inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("file", "cannot open '" + path + "'");
    }
    return parse_scenario(in);
}

/// Canonical scenario text: fixed key order, shortest round-trip numbers, full
/// matrices. Parsing it back yields the same scenario.
[[nodiscard]] inline std::string to_canonical_text(const Scenario& sc) {
    using scenario_io::format_number;
    std::ostringstream os;
    const auto vec = [](const Vector& v) {
        std::string s;
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            s += (i ? " " : "") + format_number(v[i]);
        }
        return s;
    };
    const auto mat = [](const Matrix& M) {
        std::string s;
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c) {
                s += (r || c ? " " : "") + format_number(M(r, c));
            }
        }
        return s;
    };

    os << "[plant]\n"
       << "n = " << sc.A.rows() << "\nm = " << sc.B.cols() << "\nq = " << sc.C.rows() << '\n'
       << "A = " << mat(sc.A) << "\nB = " << mat(sc.B) << "\nC = " << mat(sc.C) << "\n\n";
    os << "[limits]\nlower = " << vec(sc.lower) << "\nupper = " << vec(sc.upper) << "\n\n";
    os << "[cost]\nQ = " << mat(sc.Q) << "\nR = " << mat(sc.R) << "\n\n";
    os << "[observer]\nL = " << mat(sc.L) << "\nzeta = " << mat(sc.zeta) << "\n\n";
    os << "[learner]\nbasis = " << sc.basis << "\nk_c = " << format_number(sc.gains.k_c)
       << "\nk_a1 = " << format_number(sc.gains.k_a1) << "\nk_a2 = " << format_number(sc.gains.k_a2)
       << "\nbeta = " << format_number(sc.gains.beta) << "\ngamma = " << format_number(sc.gains.gamma)
       << "\nW_c0 = " << vec(sc.W_c0) << "\nW_a0 = " << vec(sc.W_a0) << "\nGamma0 = " << mat(sc.Gamma0) << "\n\n";
    os << "[extrapolation]\n";
    if (sc.extrapolation.is_grid()) {
        os << "center = " << vec(*sc.extrapolation.grid_center) << "\nside = "
           << format_number(sc.extrapolation.grid_side) << "\nper_axis = " << sc.extrapolation.grid_per_axis << '\n';
    } else {
        os << "points =";
        for (std::size_t k = 0; k < sc.extrapolation.points.size(); ++k) {
            os << (k ? " ; " : " ") << vec(sc.extrapolation.points[k]);
        }
        os << '\n';
    }
    os << "\n[sim]\ndt = " << format_number(sc.sim.dt) << "\nduration = " << format_number(sc.sim.duration)
       << "\nlog_stride = " << sc.sim.log_stride << "\noperating_radius = " << format_number(sc.sim.operating_radius)
       << "\nweight_guard = " << format_number(sc.sim.weight_guard) << "\nx0 = " << vec(sc.x0)
       << "\nxhat0 = " << vec(sc.x_hat0) << '\n';
    return os.str();
}

/// 64-bit FNV-1a, printed as 16 hex digits.
[[nodiscard]] inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace barrier_mbrl
