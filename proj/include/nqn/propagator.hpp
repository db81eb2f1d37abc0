#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nqn/diagnostics.hpp"
#include "nqn/expm.hpp"
#include "nqn/hamiltonian.hpp"
#include "nqn/schedule.hpp"

namespace nqn {

/// How each substep freezes the time-dependent Hamiltonian.
enum class Scheme {
    Midpoint,  ///< one exponential of H at the substep midpoint (2nd order)
    /// 4th order. Where Omega is constant over a substep this is one
    /// exponential of the Gauss-node average plus the exact commutator term
    /// (a sigma^y field); elsewhere two commutator-free exponentials.
    Magnus4,
    Magnus4CommutatorFree,  ///< always the two-exponential form
};

struct PropagationOptions {
    double tol = 1e-8;               ///< target L2 error of the final state
    Scheme scheme = Scheme::Magnus4;
    double initial_step_us = 0.02;   ///< first substep length tried by the refinement loop
    int max_refinements = 14;
    double fixed_step_us = 0.0;      ///< > 0 disables refinement and uses this substep
    bool dense_exponential = false;  ///< exponentiate by full diagonalisation (small N only)
};

struct TracePoint {
    double t = 0.0;
    StateVector state;
};

struct PropagationResult {
    StateVector final_state;
    std::vector<TracePoint> trace;  ///< at least t_start and t_end
    long substeps_used = 0;         ///< in the accepted (finest) pass
    double step_us = 0.0;           ///< substep length of the accepted pass
    double error_estimate = 0.0;    ///< |psi_h - psi_{h/2}| of the last refinement
    long matvecs = 0;
};

/// Integrates i d/dt psi = H(t) psi under a PulseSchedule.
///
/// Substeps never straddle schedule breakpoints. Each substep applies the
/// exact exponential of a constant Hamiltonian (Krylov or dense), so every
/// step is unitary; stretches with Omega = 0 are integrated in closed form.
/// The substep length is halved until two successive passes agree to `tol`.
/// Holds a Krylov workspace: use one instance per thread.
class Propagator {
public:
    explicit Propagator(const ChainConfig& config);
    /// Evolution restricted to the span of `subspace` (see ChainOperator);
    /// states are then given in subspace coordinates.
    Propagator(const ChainConfig& config, std::vector<BareIndex> subspace);

    const ChainOperator& op() const { return op_; }

    /// Adaptive propagation from t_start to t_end (absolute schedule clock).
    /// Throws std::invalid_argument for non-normalised input or tol <= 0 and
    /// ConvergenceError when refinement is exhausted.
    PropagationResult propagate(const StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end,
                                const PropagationOptions& options = {});

    /// One fixed-substep pass; returns the number of substeps taken. The
    /// per-exponential Krylov tolerance is options.tol scaled by h / tol_window
    /// (default: the window itself), so passes over parts of a longer window
    /// can share the accuracy budget of the whole.
    long advance(StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end, double step_us,
                 const PropagationOptions& options, double tol_window = 0.0);

    /// Applies the adjoint of advance() with the same arguments, i.e. maps a
    /// state at t_end back to t_start. Substeps and stages are mirrored, so
    /// <chi| advance(psi)> = <advance_adjoint(chi)| psi> to Krylov accuracy.
    long advance_adjoint(StateVector& chi, const PulseSchedule& schedule, double t_start, double t_end,
                         double step_us, const PropagationOptions& options, double tol_window = 0.0);

    /// Substep length the refinement loop settles on over [t_start, t_end].
    double calibrate_step(const StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end,
                          const PropagationOptions& options = {});

    long matvecs() const { return matvecs_; }

private:
    void exponentiate(StateVector& psi, double omega_rad, double delta_rad, double dt, double tol,
                      const PropagationOptions& options, double y_rad = 0.0);
    long sweep(StateVector& psi, const PulseSchedule& schedule, double t_start, double t_end, double step_us,
               const PropagationOptions& options, double tol_window, bool adjoint);

    ChainOperator op_;
    KrylovExponential krylov_;
    long matvecs_ = 0;
};

/// Convenience wrapper constructing a Propagator.
PropagationResult propagate(const ChainConfig& config, const StateVector& psi, const PulseSchedule& schedule,
                            double t_start, double t_end, const PropagationOptions& options = {});

/// Observable time series, one row per sample time.
struct TimeSeries {
    std::vector<std::string> columns;  ///< excluding the leading t_us column
    std::vector<double> times;
    std::vector<std::vector<double>> rows;

    void write_csv(std::ostream& out) const;
    std::size_t column(const std::string& name) const;
};

/// Propagates from the start of the schedule (absolute t = 0) and records
/// the named observables (see ObservableEvaluator) at each sorted sample time.
/// One substep length, calibrated over the whole window, is used throughout.
TimeSeries propagate_with_observables(const ChainConfig& config, const StateVector& psi, const PulseSchedule& schedule,
                                      const std::vector<double>& sample_times, const std::vector<std::string>& observables,
                                      const PropagationOptions& options = {},
                                      FrameBasis frame_basis = FrameBasis::Blockade,
                                      StateVector* final_state = nullptr);

/// Sample grid 0, dt, 2 dt, ..., always ending exactly at `end`.
std::vector<double> sample_grid(double end, double dt);

}  // namespace nqn
