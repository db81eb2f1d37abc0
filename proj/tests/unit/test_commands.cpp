#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "nqn/commands.hpp"
#include "nqn/errors.hpp"
#include "nqn/hamiltonian.hpp"

using namespace nqn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

fs::path write_config(const fs::path& dir, const nlohmann::json& doc) {
    const fs::path p = dir / "config.json";
    write_json(p, doc);
    return p;
}

CommandOptions small_run(const fs::path& dir) {
    CommandOptions o;
    o.config = write_config(dir, {{"n_atoms", 3}});
    o.restarts = 1;
    o.seed = 7;
    o.sample_us = 0.05;
    return o;
}

int run_cli(const std::string& args) {
#ifdef NQN_CLI_PATH
    const std::string cmd = std::string(NQN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
    (void)args;
    return -1;
#endif
}

}  // namespace

TEST_SUITE("commands") {

TEST_CASE("optimize is reproducible and lists its outputs") {
    const fs::path dir = testing::scratch_dir("optimize");
    CommandOptions o = small_run(dir);
    o.out = dir / "a";
    const nlohmann::json m = cmd_optimize(o);
    o.out = dir / "b";
    cmd_optimize(o);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "best_schedule.json") == slurp(dir / "b" / "best_schedule.json"));
    CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));
    for (const auto& f : m["outputs"]) CHECK(fs::exists(dir / "a" / f.get<std::string>()));
    CHECK(m["command"] == "optimize");
    CHECK(m["seed"] == 7);
    CHECK(m["config"]["n_atoms"] == 3);
    const auto trace = read_csv(dir / "a" / "trace.csv");
    CHECK(trace[0][0] == "t_us");
    CHECK(trace[0][1] == "delta_mhz");

    // Re-running from the manifest's resolved config reproduces the report.
    CommandOptions again;
    again.config = write_config(dir, m["config"]);
    again.out = dir / "c";
    again.sample_us = 0.05;
    cmd_optimize(again);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "c" / "report.json"));
}

TEST_CASE("evolve reproduces the reported fidelity, with and without idles") {
    const fs::path dir = testing::scratch_dir("evolve");
    CommandOptions o = small_run(dir);
    o.out = dir / "opt";
    cmd_optimize(o);
    const double reported = read_json(dir / "opt" / "report.json")["best_fidelity"];

    o.schedule = dir / "opt" / "best_schedule.json";
    o.out = dir / "ev";
    const nlohmann::json m = cmd_evolve(o);
    CHECK(std::abs(m["final_fidelity"].get<double>() - reported) < 1e-6);

    const PulseSchedule padded = load_schedule(*o.schedule).with_idles(0.15, 0.15);
    write_json(dir / "padded.json", to_json(padded));
    o.schedule = dir / "padded.json";
    o.out = dir / "ev_idle";
    const nlohmann::json mi = cmd_evolve(o);
    CHECK(std::abs(mi["final_fidelity"].get<double>() - reported) < 1e-6);
    const auto rows = read_csv(dir / "ev_idle" / "trace.csv");
    CHECK(std::stod(rows.back()[0]) == doctest::Approx(padded.total_duration()));

    o.schedule.reset();
    CHECK_THROWS_AS(cmd_evolve(o), ConfigError);
}

TEST_CASE("spectrum marks the N = 3 bare crossings") {
    const fs::path dir = testing::scratch_dir("spectrum");
    CommandOptions o = small_run(dir);
    o.out = dir;
    cmd_spectrum(o);
    const ChainConfig c = resolve_config(o).chain;
    const double v = pair_interaction(1, 2, c);
    const auto x = read_csv(dir / "crossings.csv");
    REQUIRE(x.size() == 4);
    CHECK(std::stod(x[1][0]) == doctest::Approx(0.0));
    CHECK(std::stod(x[2][0]) == doctest::Approx(v / 128.0));
    CHECK(std::stod(x[3][0]) == doctest::Approx(v / 64.0));
    const auto flow = read_csv(dir / "eigenflow.csv");
    CHECK(flow[0].back() == "crossing_delta_mhz");
    int markers = 0;
    for (std::size_t r = 1; r < flow.size(); ++r)
        if (flow[r].size() == flow[0].size() && !flow[r].back().empty()) ++markers;
    CHECK(markers == 3);
}

TEST_CASE("constant schedule gives constant energies") {
    const fs::path dir = testing::scratch_dir("spectrum_const");
    CommandOptions o = small_run(dir);
    write_json(dir / "flat.json", to_json(linear_ramp(1.0, 2.0, 2.0, 1.0)));
    o.schedule = dir / "flat.json";
    o.out = dir;
    cmd_spectrum(o);
    const auto flow = read_csv(dir / "eigenflow.csv");
    REQUIRE(flow.size() > 3);
    for (std::size_t r = 2; r < flow.size(); ++r)
        for (std::size_t k = 3; k + 1 < flow[0].size(); ++k)
            CHECK(std::stod(flow[r][k]) == doctest::Approx(std::stod(flow[1][k])).epsilon(1e-12));
}

TEST_CASE("scan and export") {
    const fs::path dir = testing::scratch_dir("scan");
    CommandOptions o = small_run(dir);
    o.grid = "4:4:1,1.4:1.4:1";
    o.out = dir / "a";
    cmd_scan(o);
    const auto rows = read_csv(dir / "a" / "phase_map.csv");
    CHECK(rows.size() == 2);
    o.grid = "-2:6:5,0.6:2.6:3";
    cmd_scan(o);
    o.out = dir / "b";
    cmd_scan(o);
    CHECK(slurp(dir / "a" / "phase_map.csv") == slurp(dir / "b" / "phase_map.csv"));
    o.grid = "1:0:3,1:2:2";
    CHECK_THROWS_AS(cmd_scan(o), ConfigError);

    o.grid.reset();
    o.out = dir / "export";
    const nlohmann::json m = cmd_export(o);
    const PulseSchedule s = load_schedule(dir / "export" / "schedule.json");
    CHECK(s.knot_deltas().front() == -12.0);
    CHECK(s.knot_deltas().back() == 12.0);
    CHECK(read_csv(dir / "export" / "waveform.csv").size() == s.breakpoints().size() + 1);
    CHECK(m["outputs"].size() == 3);
}

TEST_CASE("exit codes") {
#ifdef NQN_CLI_PATH
    const fs::path dir = testing::scratch_dir("exit");
    const std::string out = " --out " + (dir / "o").string();
    write_config(dir, {{"n_atoms", 3}});
    const std::string cfg = " --config " + (dir / "config.json").string();
    CHECK(run_cli("export" + cfg + out) == kExitOk);
    CHECK(run_cli("scan --grid 4:4:1,1.4:1.4:1" + cfg + out) == kExitOk);
    CHECK(run_cli("optimize --restarts 1 --tau-us 0.3" + cfg + out) == kExitConfig);
    CHECK(run_cli("evolve" + cfg + out) == kExitConfig);
    CHECK(run_cli("bogus") == kExitConfig);
    CHECK(run_cli("scan --grid nonsense" + cfg + out) == kExitConfig);
    write_json(dir / "bad.json", {{"n_atom", 3}});
    CHECK(run_cli("export --config " + (dir / "bad.json").string() + out) == kExitConfig);
    write_json(dir / "big.json", {{"n_atoms", 15}});
    CHECK(run_cli("scan --grid 4:4:1,1.4:1.4:1 --config " + (dir / "big.json").string() + out) == kExitRuntime);
#else
    MESSAGE("command-line tool not built");
#endif
}

}  // TEST_SUITE
