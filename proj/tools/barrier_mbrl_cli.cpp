#include <CLI11.hpp>

#include "barrier_mbrl/commands.hpp"

namespace cli = barrier_mbrl::cli;

int main(int argc, char** argv) {
    CLI::App app{"Safe output-feedback model-based RL: simulation, verification and the F-16 benchmark"};
    app.require_subcommand(1);

    std::string cfg;
    std::string csv;
    auto* run = app.add_subcommand("run", "simulate a scenario config and write the trajectory CSV");
    run->add_option("config", cfg, "scenario config file")->required();
    run->add_option("output", csv, "output CSV path")->required();

    std::string suite;
    std::string verify_cfg;
    auto* verify = app.add_subcommand("verify", "run a verification suite against a scenario config");
    verify->add_option("suite", suite, "lemma1, lemma2, barrier, lyapunov or all")->required();
    verify->add_option("config", verify_cfg, "scenario config file")->required();

    std::string out_dir;
    barrier_mbrl::f16::Overrides overrides;
    double dt = 0.0;
    double duration = 0.0;
    int log_stride = 0;
    auto* bench = app.add_subcommand("bench", "run the F-16 benchmark and check its gates");
    bench->add_option("outdir", out_dir, "output directory")->required();
    auto* dt_opt = bench->add_option("--dt", dt, "integration step [s]");
    auto* duration_opt = bench->add_option("--duration", duration, "simulated time [s]");
    auto* stride_opt = bench->add_option("--log-stride", log_stride, "log every k-th step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfig;
    }

    const auto log = cli::Logger::from_env();
    if (*run) {
        return cli::cmd_run(cfg, csv, log);
    }
    if (*verify) {
        return cli::cmd_verify(suite, verify_cfg, log);
    }
    if (dt_opt->count() > 0) overrides.dt = dt;
    if (duration_opt->count() > 0) overrides.duration = duration;
    if (stride_opt->count() > 0) overrides.log_stride = log_stride;
    return cli::cmd_bench(out_dir, overrides, log);
}
