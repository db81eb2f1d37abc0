#include "nqn/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "nqn/errors.hpp"

namespace nqn {

namespace {

using cd = std::complex<double>;

// Commutator-free fourth-order Magnus: Gauss nodes and stage weights.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kWeightA = (3.0 - 2.0 * kSqrt3) / 12.0;
const double kWeightB = (3.0 + 2.0 * kSqrt3) / 12.0;

void check_normalised(const StateVector& psi, Eigen::Index dim) {
    if (psi.size() != dim) throw std::invalid_argument("state dimension does not match the chain");
    if (std::abs(psi.norm() - 1.0) > 1e-9) throw std::invalid_argument("state is not normalised");
}

}  // namespace

Propagator::Propagator(const ChainConfig& config) : op_(config) {}

Propagator::Propagator(const ChainConfig& config, std::vector<BareIndex> subspace) : op_(config, std::move(subspace)) {}

void Propagator::exponentiate(StateVector& psi, double omega_rad, double delta_rad, double dt, double tol,
                              const PropagationOptions& options, double y_rad) {
    if (options.dense_exponential && y_rad == 0.0) {
        psi = expm_dense(op_.dense(omega_rad, delta_rad), dt, psi);
        return;
    }
    matvecs_ += krylov_.apply(op_, omega_rad, delta_rad, dt, psi, tol, y_rad);
}

long Propagator::advance(StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end,
                         double step_us, const PropagationOptions& options, double tol_window) {
    return sweep(psi, schedule, t_start, t_end, step_us, options, tol_window, false);
}

long Propagator::advance_adjoint(StateVector& chi, const PulseSchedule& schedule, double t_start, double t_end,
                                 double step_us, const PropagationOptions& options, double tol_window) {
    return sweep(chi, schedule, t_start, t_end, step_us, options, tol_window, true);
}

long Propagator::sweep(StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end, double step_us,
                       const PropagationOptions& options, double tol_window, bool adjoint) {
    if (!(step_us > 0.0)) throw std::invalid_argument("advance: step must be positive");
    if (t_end <= t_start) return 0;
    std::vector<double> cuts{t_start};
    for (double b : schedule.breakpoints())
        if (b > t_start && b < t_end) cuts.push_back(b);
    cuts.push_back(t_end);

    const double window = tol_window > 0.0 ? tol_window : t_end - t_start;
    // The adjoint walks pieces, substeps and stages in reverse with negative dt.
    const double sign = adjoint ? -1.0 : 1.0;
    const std::size_t pieces = cuts.size() - 1;
    long substeps = 0;
    for (std::size_t q = 0; q < pieces; ++q) {
        const std::size_t p = adjoint ? pieces - 1 - q : q;
        const double a = cuts[p], b = cuts[p + 1];
        const double len = b - a;
        const ControlPoint inner1 = schedule.evaluate(a + 0.25 * len);
        const ControlPoint inner2 = schedule.evaluate(b - 0.25 * len);
        if (inner1.omega == 0.0 && inner2.omega == 0.0) {
            // Omega vanishes on the whole piece: H is diagonal, integrate exactly.
            const double integral = to_angular(0.5 * len * (schedule.evaluate(a).delta + schedule.evaluate(b).delta));
            const Eigen::VectorXd& w = op_.interaction_diagonal();
            const Eigen::VectorXd& n = op_.excitations();
            for (Eigen::Index s = 0; s < psi.size(); ++s)
                psi[s] *= std::exp(cd(0.0, -sign * (w[s] * len - n[s] * integral)));
            ++substeps;
            continue;
        }
        const long count = std::max(1L, static_cast<long>(std::ceil(len / step_us - 1e-9)));
        const double h = len / static_cast<double>(count);
        const double tol = std::max(1e-13, 1e-2 * options.tol * h / window);
        for (long j = 0; j < count; ++j) {
            const long k = adjoint ? count - 1 - j : j;
            const double t0 = a + len * static_cast<double>(k) / static_cast<double>(count);
            if (options.scheme == Scheme::Midpoint) {
                const ControlPoint c = schedule.evaluate(t0 + 0.5 * h);
                exponentiate(psi, to_angular(c.omega), to_angular(c.delta), sign * h, tol, options);
            } else {
                const ControlPoint c1 = schedule.evaluate(t0 + kNode1 * h);
                const ControlPoint c2 = schedule.evaluate(t0 + kNode2 * h);
                if (options.scheme == Scheme::Magnus4 && c1.omega == c2.omega && !options.dense_exponential) {
                    // With Omega fixed, [H1, H2] = (i/2) Omega (Delta1 - Delta2) sum sigma^y.
                    const double y = -kSqrt3 / 24.0 * h * to_angular(c1.omega) * to_angular(c1.delta - c2.delta);
                    exponentiate(psi, to_angular(c1.omega), to_angular(0.5 * (c1.delta + c2.delta)), sign * h, tol,
                                 options, y);
                    continue;
                }
                const double o1 = to_angular(2.0 * (kWeightB * c1.omega + kWeightA * c2.omega));
                const double d1 = to_angular(2.0 * (kWeightB * c1.delta + kWeightA * c2.delta));
                const double o2 = to_angular(2.0 * (kWeightA * c1.omega + kWeightB * c2.omega));
                const double d2 = to_angular(2.0 * (kWeightA * c1.delta + kWeightB * c2.delta));
                if (adjoint) {
                    exponentiate(psi, o2, d2, -0.5 * h, tol, options);
                    exponentiate(psi, o1, d1, -0.5 * h, tol, options);
                } else {
                    exponentiate(psi, o1, d1, 0.5 * h, tol, options);
                    exponentiate(psi, o2, d2, 0.5 * h, tol, options);
                }
            }
        }
        substeps += count;
    }
    return substeps;
}

PropagationResult Propagator::propagate(const StateVector& psi, const PulseSchedule& schedule, double t_start,
                                        double t_end, const PropagationOptions& options) {
    check_normalised(psi, op_.dimension());
    if (!(options.tol > 0.0)) throw std::invalid_argument("propagate: tol must be positive");
    if (!(t_start < t_end)) throw std::invalid_argument("propagate: need t_start < t_end");
    schedule.evaluate(t_start);
    schedule.evaluate(t_end);

    const long matvecs_before = matvecs_;
    PropagationResult result;
    if (options.fixed_step_us > 0.0) {
        result.final_state = psi;
        result.substeps_used = advance(result.final_state, schedule, t_start, t_end, options.fixed_step_us, options);
        result.step_us = options.fixed_step_us;
    } else {
        double h = std::min(options.initial_step_us, t_end - t_start);
        StateVector coarse = psi;
        advance(coarse, schedule, t_start, t_end, h, options);
        bool converged = false;
        for (int r = 0; r < options.max_refinements; ++r) {
            h *= 0.5;
            StateVector fine = psi;
            const long steps = advance(fine, schedule, t_start, t_end, h, options);
            result.error_estimate = (fine - coarse).norm();
            result.substeps_used = steps;
            result.step_us = h;
            coarse = std::move(fine);
            if (result.error_estimate < options.tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw ConvergenceError("propagate: no convergence to tol " + std::to_string(options.tol) + " after " +
                                   std::to_string(options.max_refinements) + " refinements (last difference " +
                                   std::to_string(result.error_estimate) + ")");
        result.final_state = std::move(coarse);
    }
    result.matvecs = matvecs_ - matvecs_before;
    result.trace.push_back({t_start, psi});
    result.trace.push_back({t_end, result.final_state});
    return result;
}

double Propagator::calibrate_step(const StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end,
                                  const PropagationOptions& options) {
    PropagationOptions adaptive = options;
    adaptive.fixed_step_us = 0.0;
    return propagate(psi, schedule, t_start, t_end, adaptive).step_us;
}

PropagationResult propagate(const ChainConfig& config, const StateVector& psi, const PulseSchedule& schedule,
                            double t_start, double t_end, const PropagationOptions& options) {
    Propagator propagator(config);
    return propagator.propagate(psi, schedule, t_start, t_end, options);
}

void TimeSeries::write_csv(std::ostream& out) const {
    out << "t_us";
    for (const std::string& c : columns) out << ',' << c;
    out << '\n';
    out << std::setprecision(15);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << times[r];
        for (double v : rows[r]) out << ',' << v;
        out << '\n';
    }
}

std::size_t TimeSeries::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

TimeSeries propagate_with_observables(const ChainConfig& config, const StateVector& psi, const PulseSchedule& schedule,
                                      const std::vector<double>& sample_times,
                                      const std::vector<std::string>& observables, const PropagationOptions& options,
                                      FrameBasis frame_basis, StateVector* final_state) {
    if (sample_times.empty()) throw std::invalid_argument("propagate_with_observables: no sample times");
    if (!std::is_sorted(sample_times.begin(), sample_times.end()))
        throw std::invalid_argument("propagate_with_observables: sample times must be sorted");
    if (sample_times.front() < 0.0) throw std::out_of_range("propagate_with_observables: negative sample time");
    schedule.evaluate(sample_times.back());

    ObservableEvaluator evaluator(config, schedule, observables, frame_basis);
    Propagator propagator(config);
    check_normalised(psi, propagator.op().dimension());

    TimeSeries series;
    series.columns = evaluator.columns();
    StateVector state = psi;
    double step = options.fixed_step_us;
    if (step <= 0.0 && sample_times.back() > 0.0)
        step = propagator.calibrate_step(psi, schedule, 0.0, sample_times.back(), options);
    double t = 0.0;
    for (double ts : sample_times) {
        if (ts > t) {
            propagator.advance(state, schedule, t, ts, step, options);
            t = ts;
        }
        series.times.push_back(ts);
        series.rows.push_back(evaluator.evaluate(ts, state));
    }
    if (final_state) *final_state = state;
    return series;
}

std::vector<double> sample_grid(double end, double dt) {
    if (!(dt > 0.0) || !(end >= 0.0)) throw std::invalid_argument("sample_grid: need dt > 0 and end >= 0");
    std::vector<double> times;
    const long n = static_cast<long>(std::ceil(end / dt - 1e-9));
    for (long k = 0; k < n; ++k) times.push_back(static_cast<double>(k) * dt);
    times.push_back(end);
    return times;
}

}  // namespace nqn
