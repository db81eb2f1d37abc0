#include <iostream>

#include <CLI11.hpp>

#include "nqn/commands.hpp"
#include "nqn/errors.hpp"

namespace {

void add_common(CLI::App* cmd, nqn::CommandOptions& o) {
    cmd->add_option("--config", o.config, "Config JSON");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--restarts", o.restarts, "Optimizer restarts");
    cmd->add_option("--tau-us", o.tau_us, "Ramp duration (us)");
    cmd->add_option("--segments", o.segments, "Number of linear segments");
    cmd->add_option("--tol", o.tol, "Propagation tolerance");
    cmd->add_option("--sample-us", o.sample_us, "Trace sample interval (us)")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NQN state preparation for Rydberg chains"};
    app.set_version_flag("--version", std::string(nqn::kToolVersion));
    app.require_subcommand(1);
    nqn::CommandOptions o;

    auto* optimize = app.add_subcommand("optimize", "Search NQN ramps; writes report.json, best_schedule.json, trace.csv");
    add_common(optimize, o);
    optimize->add_option("--init", o.init, "Restart distribution")->check(CLI::IsMember({"uniform", "nqn"}));

    auto* evolve = app.add_subcommand("evolve", "Propagate a schedule; writes trace.csv");
    add_common(evolve, o);
    evolve->add_option("--schedule", o.schedule, "Schedule JSON")->required();

    auto* spectrum = app.add_subcommand("spectrum", "Eigenvalue flow and Gamma along a schedule");
    add_common(spectrum, o);
    spectrum->add_option("--schedule", o.schedule, "Schedule JSON (default: linear ramp from the config)");

    auto* scan = app.add_subcommand("scan", "Ground-state phase map; writes phase_map.csv");
    add_common(scan, o);
    scan->add_option("--grid", o.grid, "dmin:dmax:steps,rmin:rmax:steps");

    auto* exporter = app.add_subcommand("export", "Write a schedule and its breakpoint waveform");
    add_common(exporter, o);
    exporter->add_option("--schedule", o.schedule, "Schedule JSON (default: seeded random NQN ramp)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? nqn::kExitOk : nqn::kExitConfig;
    }

    try {
        nlohmann::json manifest;
        if (*optimize) manifest = nqn::cmd_optimize(o);
        else if (*evolve) manifest = nqn::cmd_evolve(o);
        else if (*spectrum) manifest = nqn::cmd_spectrum(o);
        else if (*scan) manifest = nqn::cmd_scan(o);
        else manifest = nqn::cmd_export(o);
        std::cout << manifest.dump(2) << '\n';
        return nqn::kExitOk;
    } catch (const nqn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return nqn::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return nqn::kExitRuntime;
    }
}
