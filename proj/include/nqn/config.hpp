#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nqn/model.hpp"
#include "nqn/schedule.hpp"

namespace nqn {

/// Default lattice constant in units of R_b for Z2 runs (inside a < R_b < 2a).
inline constexpr double kDefaultZ2SpacingRatio = 0.7;
inline constexpr double kDefaultZ3SpacingRatio = 0.36;
inline constexpr double kDefaultZ4SpacingRatio = 0.29;

/// Default a / R_b for a Z_k target.
double default_spacing_ratio(int order);

/// Everything a run needs; mirrors the JSON config document.
struct RunConfig {
    ChainConfig chain;
    RampSpec ramp;
    std::uint64_t seed = 1;
    int restarts = 50;
    std::optional<std::string> init;  ///< restart distribution, "uniform" or "nqn"

    void validate() const;
};

/// Parses a config document. Missing fields take defaults (spacing_um
/// defaults to default_spacing_ratio(order) R_b); unknown or mistyped fields throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Fully materialised config document.
nlohmann::json to_json(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);

/// {"tau_us": ..., "knots": [{"t_us", "delta_mhz"}], "omega": {...}}
nlohmann::json to_json(const PulseSchedule& schedule);
PulseSchedule schedule_from_json(const nlohmann::json& doc);
PulseSchedule load_schedule(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace nqn
