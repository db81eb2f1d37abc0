#pragma once

#include <random>
#include <span>
#include <vector>

#include "nqn/model.hpp"

namespace nqn {

/// Shortest segment the control hardware can resolve, us.
inline constexpr double kResolutionFloorUs = 0.05;

/// Trapezoidal Rabi envelope inside the ramp window [0, tau].
struct OmegaEnvelope {
    double value = 1.0;   ///< hold value, (2pi) MHz
    double rise_us = 0.0;
    double fall_us = 0.0;

    friend bool operator==(const OmegaEnvelope&, const OmegaEnvelope&) = default;
};

/// Instantaneous controls in (2pi) MHz.
struct ControlPoint {
    double omega = 0.0;
    double delta = 0.0;
};

/// Piecewise-linear detuning ramp with a trapezoidal Rabi envelope, padded by
/// idle windows in which the laser is off.
///
/// Two clocks are in play. Knot times live on the ramp clock, which runs over
/// [0, tau]. evaluate() and breakpoints() use the absolute clock, which runs
/// over [0, idle_lead + tau + idle_tail]; ramp time u maps to absolute time
/// idle_lead + u. During the idles Omega = 0 and Delta holds its boundary value.
class PulseSchedule {
public:
    PulseSchedule(std::vector<double> knot_times, std::vector<double> knot_deltas, OmegaEnvelope envelope,
                  double idle_lead_us = 0.0, double idle_tail_us = 0.0,
                  double resolution_us = kResolutionFloorUs);

    double tau() const { return knot_times_.back(); }
    double idle_lead() const { return idle_lead_; }
    double idle_tail() const { return idle_tail_; }
    double total_duration() const { return idle_lead_ + tau() + idle_tail_; }
    double ramp_start() const { return idle_lead_; }
    double ramp_end() const { return idle_lead_ + tau(); }

    const std::vector<double>& knot_times() const { return knot_times_; }
    const std::vector<double>& knot_deltas() const { return knot_deltas_; }
    const OmegaEnvelope& envelope() const { return envelope_; }
    std::size_t segment_count() const { return knot_times_.size() - 1; }

    /// Controls at absolute time t; throws std::out_of_range outside the domain.
    ControlPoint evaluate(double t) const;

    /// Detuning at ramp time u in [0, tau]; exact at knots.
    double delta_at_ramp_time(double u) const;
    double omega_at_ramp_time(double u) const;

    /// Sorted absolute times where the controls have kinks or jumps.
    std::vector<double> breakpoints() const;

    /// Same timing and envelope, new knot detunings.
    PulseSchedule with_deltas(std::vector<double> knot_deltas) const;

    /// Same ramp with different idle padding.
    PulseSchedule with_idles(double idle_lead_us, double idle_tail_us) const;

    /// Time-reversed schedule: Delta'(t) = Delta(T - t), Omega'(t) = Omega(T - t).
    PulseSchedule reversed() const;

    friend bool operator==(const PulseSchedule&, const PulseSchedule&) = default;

private:
    std::vector<double> knot_times_;
    std::vector<double> knot_deltas_;
    OmegaEnvelope envelope_;
    double idle_lead_ = 0.0;
    double idle_tail_ = 0.0;
    double resolution_ = kResolutionFloorUs;
};

/// Uniform knot times 0, tau/n, ..., tau.
std::vector<double> uniform_knot_times(double tau, int n_segments);

/// Throws ConfigError("tau_us") when uniform segments would be shorter than
/// the resolution floor.
void check_segment_resolution(double tau, int n_segments, double resolution_us = kResolutionFloorUs);

/// Boundary conditions and padding shared by all NQN ramps of one run.
struct RampSpec {
    double tau_us = 1.8;
    int n_segments = 8;
    double delta_start_over_omega = -12.0;
    double delta_end_over_omega = 12.0;
    double idle_us = 0.0;
    double resolution_us = kResolutionFloorUs;
};

/// Uniform ramp with fixed endpoints and the given interior detunings, all in
/// units of Omega. interior.size() must be n_segments - 1.
PulseSchedule make_nqn_schedule(const ChainConfig& config, const RampSpec& spec, std::span<const double> interior);

/// Seed ramp whose interior knots are drawn uniformly from
/// [delta_start, delta_end] (in units of Omega) using `rng`.
PulseSchedule default_nqn_seed(const ChainConfig& config, const RampSpec& spec, std::mt19937_64& rng);

/// Single-segment linear detuning ramp (e.g. the adiabatic baseline).
PulseSchedule linear_ramp(double omega, double delta_from, double delta_to, double duration_us,
                          double idle_us = 0.0);

}  // namespace nqn
