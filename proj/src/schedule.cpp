#include "nqn/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nqn/errors.hpp"

namespace nqn {

namespace {

constexpr double kTimeSlack = 1e-9;

}  // namespace

PulseSchedule::PulseSchedule(std::vector<double> knot_times, std::vector<double> knot_deltas, OmegaEnvelope envelope,
                             double idle_lead_us, double idle_tail_us, double resolution_us)
    : knot_times_(std::move(knot_times)),
      knot_deltas_(std::move(knot_deltas)),
      envelope_(envelope),
      idle_lead_(idle_lead_us),
      idle_tail_(idle_tail_us),
      resolution_(resolution_us) {
    if (knot_times_.size() < 2) throw ConfigError("knots", "need at least two knots");
    if (knot_times_.size() != knot_deltas_.size()) throw ConfigError("knots", "time and detuning counts differ");
    if (knot_times_.front() != 0.0) throw ConfigError("knots", "first knot must be at t = 0");
    for (std::size_t i = 0; i + 1 < knot_times_.size(); ++i) {
        const double len = knot_times_[i + 1] - knot_times_[i];
        if (!(len > 0.0)) throw ConfigError("knots", "knot times must be strictly increasing");
        if (len < resolution_ * (1.0 - kTimeSlack))
            throw ConfigError("knots", "segment " + std::to_string(i) + " is shorter than the " +
                                           std::to_string(resolution_) + " us resolution floor");
    }
    for (double d : knot_deltas_)
        if (!std::isfinite(d)) throw ConfigError("knots", "detunings must be finite");
    if (!(envelope_.value > 0.0) || !std::isfinite(envelope_.value))
        throw ConfigError("omega", "hold value must be positive");
    if (envelope_.rise_us < 0.0 || envelope_.fall_us < 0.0 || envelope_.rise_us + envelope_.fall_us > tau())
        throw ConfigError("omega", "rise and fall must be non-negative and fit inside tau");
    if (idle_lead_ < 0.0 || idle_tail_ < 0.0 || !std::isfinite(idle_lead_) || !std::isfinite(idle_tail_))
        throw ConfigError("idle_us", "idle windows must be non-negative");
}

double PulseSchedule::delta_at_ramp_time(double u) const {
    if (u <= 0.0) return knot_deltas_.front();
    if (u >= tau()) return knot_deltas_.back();
    const auto it = std::upper_bound(knot_times_.begin(), knot_times_.end(), u);
    const auto i = static_cast<std::size_t>(it - knot_times_.begin()) - 1;
    const double t0 = knot_times_[i], t1 = knot_times_[i + 1];
    const double d0 = knot_deltas_[i], d1 = knot_deltas_[i + 1];
    return d0 + (d1 - d0) * ((u - t0) / (t1 - t0));
}

double PulseSchedule::omega_at_ramp_time(double u) const {
    if (u < 0.0 || u > tau()) return 0.0;
    if (envelope_.rise_us > 0.0 && u < envelope_.rise_us) return envelope_.value * (u / envelope_.rise_us);
    const double fall_start = tau() - envelope_.fall_us;
    if (envelope_.fall_us > 0.0 && u > fall_start) return envelope_.value * ((tau() - u) / envelope_.fall_us);
    return envelope_.value;
}

ControlPoint PulseSchedule::evaluate(double t) const {
    const double end = total_duration();
    if (!(t >= -kTimeSlack * std::max(1.0, end)) || !(t <= end * (1.0 + kTimeSlack) + kTimeSlack))
        throw std::out_of_range("schedule evaluated at t = " + std::to_string(t) + " outside [0, " +
                                std::to_string(end) + "]");
    const double u = t - idle_lead_;
    return ControlPoint{omega_at_ramp_time(u), delta_at_ramp_time(u)};
}

std::vector<double> PulseSchedule::breakpoints() const {
    std::vector<double> points;
    points.reserve(knot_times_.size() + 6);
    points.push_back(0.0);
    for (double u : knot_times_) points.push_back(idle_lead_ + u);
    if (envelope_.rise_us > 0.0) points.push_back(idle_lead_ + envelope_.rise_us);
    if (envelope_.fall_us > 0.0) points.push_back(idle_lead_ + tau() - envelope_.fall_us);
    points.push_back(total_duration());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

PulseSchedule PulseSchedule::with_deltas(std::vector<double> knot_deltas) const {
    return PulseSchedule(knot_times_, std::move(knot_deltas), envelope_, idle_lead_, idle_tail_, resolution_);
}

PulseSchedule PulseSchedule::with_idles(double idle_lead_us, double idle_tail_us) const {
    return PulseSchedule(knot_times_, knot_deltas_, envelope_, idle_lead_us, idle_tail_us, resolution_);
}

PulseSchedule PulseSchedule::reversed() const {
    const std::size_t n = knot_times_.size();
    std::vector<double> times(n), deltas(n);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = tau() - knot_times_[n - 1 - i];
        deltas[i] = knot_deltas_[n - 1 - i];
    }
    times.front() = 0.0;
    times.back() = tau();
    OmegaEnvelope env{envelope_.value, envelope_.fall_us, envelope_.rise_us};
    return PulseSchedule(std::move(times), std::move(deltas), env, idle_tail_, idle_lead_, resolution_);
}

std::vector<double> uniform_knot_times(double tau, int n_segments) {
    if (n_segments < 1) throw ConfigError("n_segments", "must be at least 1");
    std::vector<double> times(static_cast<std::size_t>(n_segments) + 1);
    for (int i = 0; i <= n_segments; ++i) times[static_cast<std::size_t>(i)] = tau * i / n_segments;
    times.back() = tau;
    return times;
}

void check_segment_resolution(double tau, int n_segments, double resolution_us) {
    if (n_segments < 1) throw ConfigError("n_segments", "must be at least 1");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("tau_us", "must be positive");
    if (tau / n_segments < resolution_us * (1.0 - kTimeSlack))
        throw ConfigError("tau_us", "tau / n_segments = " + std::to_string(tau / n_segments) +
                                        " us is below the " + std::to_string(resolution_us) +
                                        " us resolution floor");
}

PulseSchedule make_nqn_schedule(const ChainConfig& config, const RampSpec& spec, std::span<const double> interior) {
    check_segment_resolution(spec.tau_us, spec.n_segments, spec.resolution_us);
    if (interior.size() != static_cast<std::size_t>(spec.n_segments - 1))
        throw std::invalid_argument("make_nqn_schedule: expected " + std::to_string(spec.n_segments - 1) +
                                    " interior knots, got " + std::to_string(interior.size()));
    std::vector<double> deltas;
    deltas.reserve(interior.size() + 2);
    deltas.push_back(spec.delta_start_over_omega * config.omega);
    for (double x : interior) deltas.push_back(x * config.omega);
    deltas.push_back(spec.delta_end_over_omega * config.omega);
    return PulseSchedule(uniform_knot_times(spec.tau_us, spec.n_segments), std::move(deltas),
                         OmegaEnvelope{config.omega, 0.0, 0.0}, spec.idle_us, spec.idle_us, spec.resolution_us);
}

PulseSchedule default_nqn_seed(const ChainConfig& config, const RampSpec& spec, std::mt19937_64& rng) {
    check_segment_resolution(spec.tau_us, spec.n_segments, spec.resolution_us);
    const double lo = std::min(spec.delta_start_over_omega, spec.delta_end_over_omega);
    const double hi = std::max(spec.delta_start_over_omega, spec.delta_end_over_omega);
    std::uniform_real_distribution<double> draw(lo, hi);
    std::vector<double> interior(static_cast<std::size_t>(spec.n_segments - 1));
    for (double& x : interior) x = draw(rng);
    return make_nqn_schedule(config, spec, interior);
}

PulseSchedule linear_ramp(double omega, double delta_from, double delta_to, double duration_us, double idle_us) {
    return PulseSchedule({0.0, duration_us}, {delta_from, delta_to}, OmegaEnvelope{omega, 0.0, 0.0}, idle_us,
                         idle_us, std::min(kResolutionFloorUs, duration_us));
}

}  // namespace nqn
