#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nqn/bfgs.hpp"
#include "nqn/model.hpp"
#include "nqn/propagator.hpp"
#include "nqn/schedule.hpp"

namespace nqn {

/// How restart starting points are drawn.
enum class InitMode {
    Uniform,  ///< every interior knot uniform in [delta_start, delta_end]
    Nqn,      ///< random fast-up / slow-back / fast-up shapes (see draw_initial_knots)
};

std::string to_string(InitMode mode);
InitMode init_mode_from_string(const std::string& name);

/// Multi-start search for the interior knot detunings of an NQN ramp.
/// Parameters are the n_segments - 1 interior knots in units of Omega.
struct OptimizationProblem {
    ChainConfig config;
    RampSpec ramp;
    int restarts = 50;
    std::uint64_t seed = 1;
    double bound_over_omega = 20.0;  ///< box |knot| <= bound
    double fd_step_over_omega = 1e-3;
    double tol = 1e-6;               ///< propagation tolerance inside the search
    double final_tol = 1e-8;         ///< tolerance of the reported fidelity
    /// Pairs coupled by at least this many Omega are treated as frozen out
    /// during the search (see blockade_subspace); 0 keeps the full space.
    double subspace_threshold = 100.0;
    int max_iterations = 200;
    double gradient_tol = 1e-5;
    int threads = 1;                 ///< 0 means one per hardware thread
    InitMode init = InitMode::Uniform;
    /// Restarts whose loss is within this of the lowest count as tied; ties
    /// prefer NQN-classified ramps, then lower loss, then lower seed.
    double tie_band = 1e-6;

    int parameter_count() const { return ramp.n_segments - 1; }
    void validate() const;
};

/// Per-restart outcome; restart r draws its start from `seed`.
struct RestartRecord {
    std::uint64_t seed = 0;
    std::vector<double> initial;   ///< interior knots, units of Omega
    std::vector<double> final;
    double loss = 1.0;
    int iterations = 0;
    long loss_evaluations = 0;
    long gradient_evaluations = 0;
    std::vector<double> loss_history;
    BfgsStop stop = BfgsStop::MaxIterations;
};

/// (N1, Q, N2) split of a ramp. Windows are on the ramp clock, in us, and
/// detunings at the window edges are in units of Omega.
struct NqnClassification {
    bool is_nqn = false;
    double n1_start = 0.0, n1_end = 0.0;
    double q_start = 0.0, q_end = 0.0;
    double n2_start = 0.0, n2_end = 0.0;
    double delta_n1_end = 0.0;  ///< detuning where N1 hands over to Q
    double delta_q_end = 0.0;   ///< detuning where Q hands over to N2

    std::string label() const { return is_nqn ? "NQN" : "unclassified"; }
};

struct OptimizationReport {
    std::vector<double> best_interior;  ///< units of Omega
    std::vector<double> best_knots;     ///< all knots, (2pi) MHz
    double best_fidelity = 0.0;         ///< full model, final_tol
    double best_search_loss = 1.0;      ///< loss of the winner inside the search
    std::size_t best_restart = 0;
    std::vector<RestartRecord> restarts;
    long loss_evaluations = 0;
    long gradient_evaluations = 0;
    bool all_line_searches_failed = false;
    double search_step_us = 0.0;
    std::size_t search_dimension = 0;   ///< Hilbert-space dimension used by the search
    NqnClassification nqn;
};

/// Loss and finite-difference gradient for one problem. Holds a propagator,
/// so use one instance per thread. Evaluations use one fixed substep so the
/// loss is a smooth function of the knots.
class LossEvaluator {
public:
    /// `step_us` <= 0 calibrates the substep (see calibrate_search_step).
    explicit LossEvaluator(const OptimizationProblem& problem, double step_us = 0.0);

    double step_us() const { return step_; }
    std::size_t dimension() const;

    /// 1 - |<target|psi(tau)>|^2 starting from |D>.
    double loss(const Eigen::VectorXd& interior);

    /// Central differences with step fd_step_over_omega. `loss_at_x` must be
    /// loss(interior); forward states from that call are reused so each
    /// probe only re-propagates the two segments touching its knot.
    Eigen::VectorXd gradient(const Eigen::VectorXd& interior, double loss_at_x, long* evaluations = nullptr);

    PulseSchedule schedule(const Eigen::VectorXd& interior) const;

private:
    void forward(const Eigen::VectorXd& interior);

    const OptimizationProblem& problem_;
    std::vector<BareIndex> subspace_;
    std::unique_ptr<Propagator> propagator_;
    PropagationOptions options_;
    double step_ = 0.0;
    StateVector initial_;
    Eigen::Index target_ = 0;
    Eigen::VectorXd cached_x_;
    std::vector<StateVector> knot_states_;  // forward states at each knot of cached_x_
};

/// Substep (us) reaching problem.tol on a fixed family of probe ramps.
double calibrate_search_step(const OptimizationProblem& problem);

/// Starting point of one restart, units of Omega. Nqn mode picks N1 and N2
/// lengths of 1..max(1, n/4) segments, an N1 end in [0, 6], a Q end in
/// [-6, 0], and a straight Q between them jittered by +-0.5 per knot.
std::vector<double> draw_initial_knots(const OptimizationProblem& problem, std::mt19937_64& rng);

/// Seed used by restart `index` of a run seeded with `seed`.
std::uint64_t restart_seed(std::uint64_t seed, int index);

double loss(const Eigen::VectorXd& interior, const OptimizationProblem& problem);
Eigen::VectorXd gradient(const Eigen::VectorXd& interior, const OptimizationProblem& problem);

/// Runs all restarts and re-evaluates the winner in the full model at
/// final_tol. Deterministic for a given problem, independent of `threads`.
OptimizationReport optimize(const OptimizationProblem& problem);

/// Full-model fidelity of a ramp, adaptive propagation at `tol`.
double schedule_fidelity(const ChainConfig& config, const PulseSchedule& schedule, double tol = 1e-8);

/// Sweep-rate classification: N1 is the leading run of segments faster than
/// fast_rate (Omega/us), N2 the trailing one, and Q everything between. Q must
/// be non-empty, contain no fast segment, and move the detuning by less than
/// slow_rate x its duration (backward for the default 0).
NqnClassification classify_nqn(const PulseSchedule& schedule, double fast_rate = 20.0, double slow_rate = 0.0);

}  // namespace nqn
