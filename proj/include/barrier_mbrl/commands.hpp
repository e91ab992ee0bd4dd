#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>

#include "barrier_mbrl/f16.hpp"
#include "barrier_mbrl/verify.hpp"

namespace barrier_mbrl::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSafety = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitVerifyFailed = 4;
inline constexpr int kExitGateFailed = 5;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Minimal leveled logger. Results go to `out`; diagnostics go to `err`.
class Logger {
public:
    Logger(LogLevel level, std::ostream& out, std::ostream& err) : level_(level), out_(&out), err_(&err) {}

    /// Reads BARRIER_MBRL_LOG (error, info or debug). Unset means info.
    static Logger from_env(std::ostream& out = std::cout, std::ostream& err = std::cerr) {
        const char* raw = std::getenv("BARRIER_MBRL_LOG");
        Logger log(LogLevel::Info, out, err);
        if (raw == nullptr || *raw == '\0') {
            return log;
        }
        const auto level = parse_level(raw);
        if (!level) {
            log.error(std::string("ignoring unknown BARRIER_MBRL_LOG value '") + raw + "'");
            return log;
        }
        log.level_ = *level;
        return log;
    }

    static std::optional<LogLevel> parse_level(std::string_view text) {
        if (text == "error") return LogLevel::Error;
        if (text == "info") return LogLevel::Info;
        if (text == "debug") return LogLevel::Debug;
        return std::nullopt;
    }

    [[nodiscard]] LogLevel level() const noexcept { return level_; }

    void error(const std::string& msg) const { *err_ << "error: " << msg << '\n'; }
    void info(const std::string& msg) const {
        if (level_ >= LogLevel::Info) *out_ << msg << '\n';
    }
    void debug(const std::string& msg) const {
        if (level_ >= LogLevel::Debug) *err_ << "debug: " << msg << '\n';
    }

private:
    LogLevel level_;
    std::ostream* out_;
    std::ostream* err_;
};

[[nodiscard]] inline int exit_code_for(const std::optional<SimEvent>& event) {
    if (!event) {
        return kExitOk;
    }
    return event->kind == EventKind::SafetyViolation ? kExitSafety : kExitDivergence;
}

[[nodiscard]] inline std::string describe(const SimEvent& e) {
    return std::string(to_string(e.kind)) + " at t=" + scenario_io::format_number(e.t) +
           (e.stage >= 0 ? " (rk4 stage " + std::to_string(e.stage) + ")" : std::string()) + ": " + e.message;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw ConfigError("output", "cannot write '" + path.string() + "'");
    }
    os << text;
    if (!os) {
        throw ConfigError("output", "write failed for '" + path.string() + "'");
    }
}

inline void write_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
    std::ostringstream os;
    log.write_csv(os);
    write_file(path, os.str());
}

inline std::string final_metrics(const SimResult& r) {
    if (r.log.rows.empty()) {
        return "no rows logged";
    }
    const auto& last = r.log.rows.back();
    const auto num = scenario_io::format_number;
    return "t=" + num(last.t) + " |x|=" + num(last.x.norm()) + " |x-xhat|=" + num((last.x - last.x_hat).norm()) +
           " |W_a-W_c|=" + num(last.w_gap) + " pe=" + num(last.pe) + " min eig Gamma=" + num(last.gamma_min_eig) +
           " safety margin=" + num(last.safety_margin);
}

}  // namespace detail

/// Simulates the closed loop described by a config file and writes the CSV log.
/// The partial log is written even when the run stops on an event.
inline int cmd_run(const std::string& config_path, const std::string& csv_path, const Logger& log) {
    try {
        const Scenario sc = load_scenario(config_path);
        log.debug("scenario checksum " + fnv1a_hex(to_canonical_text(sc)));
        log.debug("steps " + std::to_string(sc.sim.steps()) + ", log stride " + std::to_string(sc.sim.log_stride));
        const SimResult result = sc.run();
        detail::write_csv(csv_path, result.log);
        log.info("rows: " + std::to_string(result.log.rows.size()) + " written to " + csv_path);
        log.info("final: " + detail::final_metrics(result));
        if (result.event) {
            log.error(describe(*result.event));
        } else {
            log.info("completed without events");
        }
        return exit_code_for(result.event);
    } catch (const ConfigError& e) {
        log.error(std::string("config ") + e.what());
        return kExitConfig;
    } catch (const Error& e) {
        log.error(e.what());
        return kExitConfig;
    }
}

inline constexpr std::string_view kSuites[] = {"lemma1", "lemma2", "barrier", "lyapunov", "all"};

[[nodiscard]] inline bool is_suite(std::string_view name) {
    for (const auto s : kSuites) {
        if (s == name) return true;
    }
    return false;
}

/// Checks for one suite name against a loaded scenario.
[[nodiscard]] inline std::vector<verify::Check> run_suite(std::string_view suite, const Scenario& sc) {
    std::vector<verify::Check> checks;
    const auto append = [&checks](std::vector<verify::Check> more) {
        checks.insert(checks.end(), more.begin(), more.end());
    };
    const bool all = suite == "all";
    const LinearPlant plant = sc.plant();
    if (all || suite == "barrier") {
        append(verify::barrier_suite(plant.limits()));
    }
    if (all || suite == "lyapunov") {
        append(verify::lyapunov_suite(ObserverConfig(plant, sc.L), sc.zeta));
    }
    if (all || suite == "lemma1" || suite == "lemma2") {
        const CostSpec cost(sc.Q, sc.R);
        const auto feedback = fixed_weight_feedback(plant, cost, QuadraticBasis(plant.states()), sc.W_a0);
        const auto guarded = [&append](auto&& suite_fn, const std::string& label) {
            try {
                append(suite_fn());
            } catch (const Error& e) {
                append({{label + ": " + e.what(), NAN, 0.0, false}});
            }
        };
        if (all || suite == "lemma1") {
            guarded([&] { return verify::lemma1_suite(plant, feedback, sc.x0); }, "lemma1");
        }
        if (all || suite == "lemma2") {
            guarded([&] { return verify::lemma2_suite(ObserverConfig(plant, sc.L), feedback, sc.x0, sc.x_hat0); },
                    "lemma2");
        }
    }
    return checks;
}

inline int cmd_verify(const std::string& suite, const std::string& config_path, const Logger& log) {
    if (!is_suite(suite)) {
        log.error("unknown suite '" + suite + "' (expected lemma1, lemma2, barrier, lyapunov or all)");
        return kExitConfig;
    }
    try {
        const Scenario sc = load_scenario(config_path);
        const auto checks = run_suite(suite, sc);
        const auto num = scenario_io::format_number;
        for (const auto& c : checks) {
            log.info(std::string(c.passed ? "PASS " : "FAIL ") + c.name + ": measured " + num(c.measured) +
                     ", tolerance " + num(c.tolerance));
        }
        if (!verify::all_passed(checks)) {
            log.error("verification failed");
            return kExitVerifyFailed;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log.error(std::string("config ") + e.what());
        return kExitConfig;
    } catch (const Error& e) {
        log.error(e.what());
        return kExitConfig;
    }
}

/// Runs the F-16 benchmark and writes report.txt, trajectory.csv and
/// scenario.lock into `out_dir`.
inline int cmd_bench(const std::string& out_dir, const f16::Overrides& overrides, const Logger& log) {
    namespace fs = std::filesystem;
    try {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) {
            throw ConfigError("output", "cannot create '" + out_dir + "': " + ec.message());
        }
        const auto report = f16::run_benchmark(overrides);
        const fs::path dir(out_dir);
        detail::write_file(dir / "report.txt", report.summary());
        detail::write_csv(dir / "trajectory.csv", report.result.log);
        detail::write_file(dir / "scenario.lock", to_canonical_text(report.scenario));
        log.info(report.summary());
        if (!report.passed()) {
            std::string failed;
            for (const auto& g : report.gates()) {
                if (!g.passed) {
                    failed += (failed.empty() ? "" : ", ") + g.name;
                }
            }
            log.error("benchmark gate failure: " + failed);
            return kExitGateFailed;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        log.error(std::string("config ") + e.what());
        return kExitConfig;
    } catch (const Error& e) {
        log.error(e.what());
        return kExitConfig;
    }
}

}  // namespace barrier_mbrl::cli
