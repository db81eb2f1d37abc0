#include "nqn/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nqn/diagnostics.hpp"
#include "nqn/errors.hpp"
#include "nqn/propagator.hpp"
#include "nqn/scanner.hpp"
#include "nqn/spectrum.hpp"

namespace nqn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void prepare_out(const CommandOptions& options) {
    std::error_code ec;
    fs::create_directories(options.out, ec);
    if (ec || !fs::is_directory(options.out)) throw ConfigError("out", "cannot create " + options.out.string());
}

json options_json(const CommandOptions& o) {
    json j{{"sample_us", o.sample_us}, {"threads", o.threads}};
    j["schedule"] = o.schedule ? json(o.schedule->string()) : json(nullptr);
    j["tol"] = o.tol ? json(*o.tol) : json(nullptr);
    j["grid"] = o.grid ? json(*o.grid) : json(nullptr);
    j["init"] = o.init ? json(*o.init) : json(nullptr);
    return j;
}

// Writes manifest.json listing `files` (relative to options.out).
json finish(const std::string& command, const CommandOptions& options, const RunConfig& config,
            std::vector<std::string> files, Clock::time_point started, json extra = json::object()) {
    files.push_back("manifest.json");
    json manifest{{"command", command},
                  {"tool_version", kToolVersion},
                  {"config", to_json(config)},
                  {"seed", config.seed},
                  {"options", options_json(options)},
                  {"outputs", files},
                  {"duration_s", std::chrono::duration<double>(Clock::now() - started).count()}};
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    write_json(options.out / "manifest.json", manifest);
    return manifest;
}

// Trace with control columns prepended to the observables.
void write_trace(const fs::path& path, const TimeSeries& series, const PulseSchedule& schedule) {
    std::ofstream out = open_output(path);
    out << "t_us,delta_mhz,omega_mhz";
    for (const std::string& c : series.columns) out << ',' << c;
    out << '\n' << std::setprecision(15);
    for (std::size_t r = 0; r < series.rows.size(); ++r) {
        const ControlPoint c = schedule.evaluate(series.times[r]);
        out << series.times[r] << ',' << c.delta << ',' << c.omega;
        for (double v : series.rows[r]) out << ',' << v;
        out << '\n';
    }
}

double sample_step(const CommandOptions& options) {
    if (!(options.sample_us > 0.0) || !std::isfinite(options.sample_us))
        throw ConfigError("sample-us", "must be positive");
    return options.sample_us;
}

PropagationOptions trace_options(const CommandOptions& options) {
    PropagationOptions p;
    p.tol = options.tol.value_or(1e-8);
    if (!(p.tol > 0.0)) throw ConfigError("tol", "must be positive");
    return p;
}

std::vector<std::string> trace_observables(const ChainConfig& chain) {
    std::vector<std::string> names{"F", "Lambda_I", "DeltaS", "n_tot", "Gamma_max", "Gamma_argmax"};
    if (chain.n_atoms % chain.order != 1 % chain.order) names.erase(names.begin());
    return names;
}

PulseSchedule schedule_for(const RunConfig& config, const CommandOptions& options) {
    if (options.schedule) {
        PulseSchedule s = load_schedule(*options.schedule);
        if (std::abs(s.envelope().value - config.chain.omega) > 1e-12 * config.chain.omega)
            throw ConfigError("schedule", "omega value_mhz differs from the config's omega_mhz");
        return s;
    }
    return linear_ramp(config.chain.omega, config.ramp.delta_start_over_omega * config.chain.omega,
                       config.ramp.delta_end_over_omega * config.chain.omega, config.ramp.tau_us, config.ramp.idle_us);
}

}  // namespace

RunConfig resolve_config(const CommandOptions& options) {
    json doc = options.config ? read_json(*options.config) : json::object();
    if (!doc.is_object()) throw ConfigError("config", "config document must be a JSON object");
    if (options.seed) doc["seed"] = *options.seed;
    if (options.restarts) doc["restarts"] = *options.restarts;
    if (options.tau_us) doc["tau_us"] = *options.tau_us;
    if (options.segments) doc["n_segments"] = *options.segments;
    return run_config_from_json(doc);
}

OptimizationProblem make_problem(const RunConfig& config, const CommandOptions& options) {
    OptimizationProblem p;
    p.config = config.chain;
    p.ramp = config.ramp;
    p.restarts = config.restarts;
    p.seed = config.seed;
    p.threads = options.threads;
    if (options.tol) p.tol = *options.tol;
    if (config.init) p.init = init_mode_from_string(*config.init);
    if (options.init) p.init = init_mode_from_string(*options.init);
    p.validate();
    return p;
}

json cmd_optimize(const CommandOptions& options) {
    const auto started = Clock::now();
    const RunConfig config = resolve_config(options);
    config.chain.validate_for_target();
    const OptimizationProblem problem = make_problem(config, options);
    const double dt = sample_step(options);
    prepare_out(options);

    const OptimizationReport report = optimize(problem);
    const PulseSchedule best = make_nqn_schedule(config.chain, config.ramp, report.best_interior);
    write_json(options.out / "best_schedule.json", to_json(best));

    json restarts = json::array();
    for (const RestartRecord& r : report.restarts)
        restarts.push_back({{"seed", r.seed},
                            {"initial_over_omega", r.initial},
                            {"final_over_omega", r.final},
                            {"loss", r.loss},
                            {"iterations", r.iterations},
                            {"loss_evaluations", r.loss_evaluations},
                            {"gradient_evaluations", r.gradient_evaluations},
                            {"stop", to_string(r.stop)}});
    const NqnClassification& c = report.nqn;
    json out{{"best_fidelity", report.best_fidelity},
             {"best_search_loss", report.best_search_loss},
             {"best_restart", report.best_restart},
             {"best_interior_over_omega", report.best_interior},
             {"best_knots_mhz", report.best_knots},
             {"target", target_state(config.chain).to_string()},
             {"classification",
              {{"label", c.label()},
               {"n1_us", {c.n1_start, c.n1_end}},
               {"q_us", {c.q_start, c.q_end}},
               {"n2_us", {c.n2_start, c.n2_end}},
               {"delta_n1_end_over_omega", c.delta_n1_end},
               {"delta_q_end_over_omega", c.delta_q_end}}},
             {"loss_evaluations", report.loss_evaluations},
             {"gradient_evaluations", report.gradient_evaluations},
             {"all_line_searches_failed", report.all_line_searches_failed},
             {"search_step_us", report.search_step_us},
             {"search_dimension", report.search_dimension},
             {"init", to_string(problem.init)},
             {"restarts", std::move(restarts)}};
    if (config.chain.n_atoms % 2 == 1) out["measured_fidelity"] = measured_fidelity(report.best_fidelity, config.chain.n_atoms);
    write_json(options.out / "report.json", out);

    const TimeSeries series = propagate_with_observables(
        config.chain, disordered_state(config.chain.n_atoms).as_vector(), best,
        sample_grid(best.total_duration(), dt), trace_observables(config.chain), trace_options(options));
    write_trace(options.out / "trace.csv", series, best);

    return finish("optimize", options, config, {"report.json", "best_schedule.json", "trace.csv"}, started,
                  {{"best_fidelity", report.best_fidelity}});
}

json cmd_evolve(const CommandOptions& options) {
    const auto started = Clock::now();
    const RunConfig config = resolve_config(options);
    if (!options.schedule) throw ConfigError("schedule", "evolve needs --schedule");
    const PulseSchedule schedule = schedule_for(config, options);
    const double dt = sample_step(options);
    prepare_out(options);

    StateVector final_state;
    const TimeSeries series = propagate_with_observables(
        config.chain, disordered_state(config.chain.n_atoms).as_vector(), schedule,
        sample_grid(schedule.total_duration(), dt), trace_observables(config.chain), trace_options(options),
        FrameBasis::Blockade, &final_state);
    write_trace(options.out / "trace.csv", series, schedule);

    json extra = json::object();
    if (config.chain.n_atoms % config.chain.order == 1 % config.chain.order)
        extra["final_fidelity"] = fidelity(final_state, target_state(config.chain));
    return finish("evolve", options, config, {"trace.csv"}, started, extra);
}

json cmd_spectrum(const CommandOptions& options) {
    const auto started = Clock::now();
    const RunConfig config = resolve_config(options);
    const PulseSchedule schedule = schedule_for(config, options);
    const double dt = sample_step(options);
    prepare_out(options);
    const ChainConfig& chain = config.chain;
    const double omega = chain.omega;

    const std::vector<double> times = sample_grid(schedule.total_duration(), dt);
    AdiabaticTracker tracker(chain, schedule);
    const int n_levels = static_cast<int>(tracker.basis().size());
    const std::vector<double> crossings = bare_crossings(chain);
    {
        std::ofstream out = open_output(options.out / "eigenflow.csv");
        out << "t_us,delta_mhz,omega_mhz";
        for (int m = 1; m <= n_levels; ++m) out << ",E_" << m << "_mhz";
        out << ",crossing_delta_mhz\n" << std::setprecision(15);
        auto row = [&](double t, const std::string& marker) {
            const EigenFrame& frame = tracker.frame_at(t);
            const ControlPoint c = schedule.evaluate(t);
            out << t << ',' << c.delta << ',' << c.omega;
            for (int m = 1; m <= n_levels; ++m) out << ',' << from_angular(frame.values[frame.column_of_label(m)]);
            out << ',' << marker << '\n';
        };
        auto marker_text = [](double x) {
            std::ostringstream s;
            s << std::setprecision(15) << x;
            return s.str();
        };
        // Every bare crossing passed between two samples gets its own row,
        // located by bisection, so close crossings are not merged.
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double t = times[i];
            const double delta = schedule.evaluate(t).delta;
            if (i > 0) {
                const double t0 = times[i - 1];
                const double d0 = schedule.evaluate(t0).delta;
                std::vector<std::pair<double, double>> hits;
                for (double x : crossings) {
                    if (!((d0 - x) * (delta - x) < 0.0)) continue;
                    double lo = t0, hi = t;
                    for (int k = 0; k < 60; ++k) {
                        const double mid = 0.5 * (lo + hi);
                        ((schedule.evaluate(mid).delta - x) * (d0 - x) > 0.0 ? lo : hi) = mid;
                    }
                    hits.emplace_back(0.5 * (lo + hi), x);
                }
                std::sort(hits.begin(), hits.end());
                for (const auto& [th, x] : hits) row(th, marker_text(x));
            }
            std::string marker;
            for (double x : crossings)
                if (delta == x) marker = marker_text(x);
            row(t, marker);
        }
    }
    {
        std::ofstream out = open_output(options.out / "crossings.csv");
        out << "delta_mhz,delta_over_omega\n" << std::setprecision(15);
        for (double x : crossings) out << x << ',' << x / omega << '\n';
    }

    std::vector<std::string> names;
    for (int m = 1; m <= n_levels; ++m) names.push_back("Gamma_" + std::to_string(m));
    names.push_back("Gamma_argmax");
    const TimeSeries series = propagate_with_observables(chain, disordered_state(chain.n_atoms).as_vector(), schedule,
                                                         times, names, trace_options(options));
    {
        std::ofstream out = open_output(options.out / "gamma.csv");
        series.write_csv(out);
    }
    return finish("spectrum", options, config, {"eigenflow.csv", "crossings.csv", "gamma.csv"}, started,
                  {{"levels", n_levels}, {"bare_crossings_mhz", crossings}});
}

json cmd_scan(const CommandOptions& options) {
    const auto started = Clock::now();
    const RunConfig config = resolve_config(options);
    const ScanGrid grid = options.grid ? ScanGrid::parse(*options.grid) : ScanGrid{};
    prepare_out(options);
    const std::vector<PhasePoint> points = scan(grid, config.chain, options.threads);
    {
        std::ofstream out = open_output(options.out / "phase_map.csv");
        write_phase_map(out, points);
    }
    return finish("scan", options, config, {"phase_map.csv"}, started, {{"grid", grid.to_string()}});
}

json cmd_export(const CommandOptions& options) {
    const auto started = Clock::now();
    const RunConfig config = resolve_config(options);
    PulseSchedule schedule = [&] {
        if (options.schedule) return schedule_for(config, options);
        std::mt19937_64 rng(config.seed);
        return default_nqn_seed(config.chain, config.ramp, rng);
    }();
    prepare_out(options);
    write_json(options.out / "schedule.json", to_json(schedule));
    {
        std::ofstream out = open_output(options.out / "waveform.csv");
        out << "t_us,delta_mhz,omega_mhz\n" << std::setprecision(15);
        for (double t : schedule.breakpoints()) {
            const ControlPoint c = schedule.evaluate(t);
            out << t << ',' << c.delta << ',' << c.omega << '\n';
        }
    }
    return finish("export", options, config, {"schedule.json", "waveform.csv"}, started);
}

}  // namespace nqn
