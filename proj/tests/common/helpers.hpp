#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "nqn/model.hpp"
#include "nqn/schedule.hpp"

namespace testing {

inline nqn::StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    nqn::StateVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = {g(rng), g(rng)};
    return v / v.norm();
}

/// Random uniform-knot ramp with detunings in [-lim, lim] (2pi) MHz.
inline nqn::PulseSchedule random_schedule(std::mt19937_64& rng, double tau, int segments, double lim,
                                          double omega = 1.0) {
    std::uniform_real_distribution<double> u(-lim, lim);
    std::vector<double> d(static_cast<std::size_t>(segments) + 1);
    for (double& x : d) x = u(rng);
    return {nqn::uniform_knot_times(tau, segments), d, nqn::OmegaEnvelope{omega, 0.0, 0.0}};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("nqn_unit_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
