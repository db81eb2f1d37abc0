#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nqn/config.hpp"
#include "nqn/optimizer.hpp"

namespace nqn {

inline constexpr const char* kToolVersion = "1.0.0";

/// Flags shared by the command-line subcommands. Unset optionals fall back to
/// the config document (or its defaults when no config is given).
struct CommandOptions {
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> schedule;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> restarts;
    std::optional<double> tau_us;
    std::optional<int> segments;
    std::optional<double> tol;
    double sample_us = 0.01;
    std::optional<std::string> grid;
    std::optional<std::string> init;
    int threads = 1;
};

/// Config file (if any) with the CLI overrides applied and validated.
RunConfig resolve_config(const CommandOptions& options);

/// Optimizer problem for a resolved config. The search tolerance is `tol`
/// when given, otherwise the optimizer default.
OptimizationProblem make_problem(const RunConfig& config, const CommandOptions& options);

/// Each command writes its files plus manifest.json into options.out and
/// returns the manifest. Config problems throw ConfigError; numerical
/// failures throw ConvergenceError or std::runtime_error.
nlohmann::json cmd_optimize(const CommandOptions& options);
nlohmann::json cmd_evolve(const CommandOptions& options);
nlohmann::json cmd_spectrum(const CommandOptions& options);
nlohmann::json cmd_scan(const CommandOptions& options);
nlohmann::json cmd_export(const CommandOptions& options);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

}  // namespace nqn
