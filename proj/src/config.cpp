#include "nqn/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "nqn/errors.hpp"

namespace nqn {

using nlohmann::json;

namespace {

double number_field(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key, "must be finite");
    return x;
}

long long integer_field(const json& doc, const char* key, long long fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double x = v.get<double>();
        if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) return static_cast<long long>(x);
    }
    throw ConfigError(key, "expected an integer");
}

void reject_unknown(const json& doc, const std::set<std::string>& known, const std::string& prefix = "") {
    for (const auto& [key, value] : doc.items())
        if (!known.contains(key)) throw ConfigError(prefix + key, "unknown field");
}

}  // namespace

double default_spacing_ratio(int order) {
    switch (order) {
        case 3: return kDefaultZ3SpacingRatio;
        case 4: return kDefaultZ4SpacingRatio;
        default: return kDefaultZ2SpacingRatio;
    }
}

void RunConfig::validate() const {
    chain.validate_for_target();
    check_segment_resolution(ramp.tau_us, ramp.n_segments, ramp.resolution_us);
    if (ramp.n_segments < 2) throw ConfigError("n_segments", "need at least 2 segments");
    if (!(ramp.idle_us >= 0.0)) throw ConfigError("idle_us", "must be non-negative");
    if (restarts < 1) throw ConfigError("restarts", "must be at least 1");
}

RunConfig run_config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("", "config document must be a JSON object");
    reject_unknown(doc, {"n_atoms", "order", "omega_mhz", "spacing_um", "c6_mhz_um6", "tau_us", "n_segments",
                         "delta_start_over_omega", "delta_end_over_omega", "idle_us", "seed", "restarts", "init"});
    RunConfig config;
    ChainConfig& chain = config.chain;
    const long long n = integer_field(doc, "n_atoms", chain.n_atoms);
    if (n < 1 || n > kMaxAtoms) throw ConfigError("n_atoms", "must be in [1, " + std::to_string(kMaxAtoms) + "]");
    chain.n_atoms = static_cast<int>(n);
    const long long k = integer_field(doc, "order", chain.order);
    if (k < 2 || k > 4) throw ConfigError("order", "must be 2, 3 or 4");
    chain.order = static_cast<int>(k);
    chain.omega = number_field(doc, "omega_mhz", chain.omega);
    chain.c6 = number_field(doc, "c6_mhz_um6", chain.c6);
    if (!(chain.omega > 0.0)) throw ConfigError("omega_mhz", "must be positive");
    if (!(chain.c6 > 0.0)) throw ConfigError("c6_mhz_um6", "must be positive");
    chain.spacing_um = number_field(doc, "spacing_um", default_spacing_ratio(chain.order) * chain.blockade_radius());

    RampSpec& ramp = config.ramp;
    ramp.tau_us = number_field(doc, "tau_us", ramp.tau_us);
    const long long segments = integer_field(doc, "n_segments", ramp.n_segments);
    if (segments < 2 || segments > 1000) throw ConfigError("n_segments", "must be in [2, 1000]");
    ramp.n_segments = static_cast<int>(segments);
    ramp.delta_start_over_omega = number_field(doc, "delta_start_over_omega", ramp.delta_start_over_omega);
    ramp.delta_end_over_omega = number_field(doc, "delta_end_over_omega", ramp.delta_end_over_omega);
    ramp.idle_us = number_field(doc, "idle_us", ramp.idle_us);

    const long long seed = integer_field(doc, "seed", static_cast<long long>(config.seed));
    if (seed < 0) throw ConfigError("seed", "must be non-negative");
    config.seed = static_cast<std::uint64_t>(seed);
    const long long restarts = integer_field(doc, "restarts", config.restarts);
    if (restarts < 1 || restarts > 100000) throw ConfigError("restarts", "must be in [1, 100000]");
    config.restarts = static_cast<int>(restarts);
    if (doc.contains("init")) {
        if (!doc.at("init").is_string()) throw ConfigError("init", "expected a string");
        config.init = doc.at("init").get<std::string>();
        if (*config.init != "uniform" && *config.init != "nqn") throw ConfigError("init", "must be \"uniform\" or \"nqn\"");
    }

    config.validate();
    return config;
}

json to_json(const RunConfig& config) {
    json doc{{"n_atoms", config.chain.n_atoms},
                {"order", config.chain.order},
                {"omega_mhz", config.chain.omega},
                {"spacing_um", config.chain.spacing_um},
                {"c6_mhz_um6", config.chain.c6},
                {"tau_us", config.ramp.tau_us},
                {"n_segments", config.ramp.n_segments},
                {"delta_start_over_omega", config.ramp.delta_start_over_omega},
                {"delta_end_over_omega", config.ramp.delta_end_over_omega},
                {"idle_us", config.ramp.idle_us},
                {"seed", config.seed},
                {"restarts", config.restarts}};
    if (config.init) doc["init"] = *config.init;
    return doc;
}

RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from_json(read_json(path)); }

json to_json(const PulseSchedule& schedule) {
    json knots = json::array();
    for (std::size_t i = 0; i < schedule.knot_times().size(); ++i)
        knots.push_back({{"t_us", schedule.knot_times()[i]}, {"delta_mhz", schedule.knot_deltas()[i]}});
    const OmegaEnvelope& env = schedule.envelope();
    return json{{"tau_us", schedule.tau()},
                {"knots", std::move(knots)},
                {"omega",
                 {{"value_mhz", env.value},
                  {"rise_us", env.rise_us},
                  {"fall_us", env.fall_us},
                  {"idle_lead_us", schedule.idle_lead()},
                  {"idle_tail_us", schedule.idle_tail()}}}};
}

PulseSchedule schedule_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("", "schedule document must be a JSON object");
    reject_unknown(doc, {"tau_us", "knots", "omega"});
    if (!doc.contains("knots") || !doc.at("knots").is_array()) throw ConfigError("knots", "expected an array");
    std::vector<double> times, deltas;
    for (const json& knot : doc.at("knots")) {
        if (!knot.is_object()) throw ConfigError("knots", "each knot must be an object");
        reject_unknown(knot, {"t_us", "delta_mhz"}, "knots.");
        if (!knot.contains("t_us") || !knot.contains("delta_mhz"))
            throw ConfigError("knots", "each knot needs t_us and delta_mhz");
        times.push_back(number_field(knot, "t_us", 0.0));
        deltas.push_back(number_field(knot, "delta_mhz", 0.0));
    }
    if (times.empty()) throw ConfigError("knots", "no knots");
    if (doc.contains("tau_us") && number_field(doc, "tau_us", 0.0) != times.back())
        throw ConfigError("tau_us", "does not match the last knot time");

    OmegaEnvelope env;
    double idle_lead = 0.0, idle_tail = 0.0;
    if (doc.contains("omega")) {
        const json& om = doc.at("omega");
        if (!om.is_object()) throw ConfigError("omega", "expected an object");
        reject_unknown(om, {"value_mhz", "rise_us", "fall_us", "idle_lead_us", "idle_tail_us"}, "omega.");
        env.value = number_field(om, "value_mhz", env.value);
        env.rise_us = number_field(om, "rise_us", 0.0);
        env.fall_us = number_field(om, "fall_us", 0.0);
        idle_lead = number_field(om, "idle_lead_us", 0.0);
        idle_tail = number_field(om, "idle_tail_us", 0.0);
    }
    return PulseSchedule(std::move(times), std::move(deltas), env, idle_lead, idle_tail);
}

PulseSchedule load_schedule(const std::filesystem::path& path) { return schedule_from_json(read_json(path)); }

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
}

}  // namespace nqn
