#include "nqn/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "nqn/diagnostics.hpp"
#include "nqn/errors.hpp"

namespace nqn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Probe ramps for step calibration come from a fixed stream so that the
// search loss does not depend on the run seed.
constexpr std::uint64_t kProbeSeed = 20240901;

std::vector<BareIndex> search_subspace(const OptimizationProblem& problem) {
    if (problem.subspace_threshold <= 0.0) return {};
    std::vector<BareIndex> sub = blockade_subspace(problem.config, problem.subspace_threshold);
    const BareIndex target = target_state(problem.config).index;
    if (std::find(sub.begin(), sub.end(), target) == sub.end()) return {};
    return sub;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string to_string(InitMode mode) { return mode == InitMode::Nqn ? "nqn" : "uniform"; }

InitMode init_mode_from_string(const std::string& name) {
    if (name == "uniform") return InitMode::Uniform;
    if (name == "nqn") return InitMode::Nqn;
    throw ConfigError("init", "expected \"uniform\" or \"nqn\", got \"" + name + "\"");
}

std::vector<double> draw_initial_knots(const OptimizationProblem& problem, std::mt19937_64& rng) {
    const int m = problem.parameter_count();
    const int n = problem.ramp.n_segments;
    const double lo = std::min(problem.ramp.delta_start_over_omega, problem.ramp.delta_end_over_omega);
    const double hi = std::max(problem.ramp.delta_start_over_omega, problem.ramp.delta_end_over_omega);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(m));
    if (problem.init == InitMode::Uniform || n < 3) {
        for (double& v : x) v = lo + (hi - lo) * unit(rng);
        return x;
    }
    const int longest = std::max(1, std::min(n / 4, (n - 1) / 2));
    const int n1 = 1 + std::min(longest - 1, static_cast<int>(unit(rng) * longest));
    const int n2 = 1 + std::min(longest - 1, static_cast<int>(unit(rng) * longest));
    const double top = 6.0 * unit(rng);
    const double bottom = -6.0 * unit(rng);
    const double start = problem.ramp.delta_start_over_omega, end = problem.ramp.delta_end_over_omega;
    for (int i = 1; i < n; ++i) {
        double v;
        if (i < n1) {
            v = start + (top - start) * i / n1;
        } else if (i > n - n2) {
            v = bottom + (end - bottom) * (i - (n - n2)) / n2;
        } else {
            v = top + (bottom - top) * (i - n1) / static_cast<double>(n - n2 - n1) + (unit(rng) - 0.5);
        }
        x[static_cast<std::size_t>(i - 1)] = v;
    }
    return x;
}

void OptimizationProblem::validate() const {
    config.validate_for_target();
    check_segment_resolution(ramp.tau_us, ramp.n_segments, ramp.resolution_us);
    if (ramp.n_segments < 2) throw ConfigError("n_segments", "need at least two segments for a free knot");
    if (restarts < 1) throw ConfigError("restarts", "must be at least 1");
    if (!(bound_over_omega > 0.0)) throw ConfigError("bound_over_omega", "must be positive");
    if (!(fd_step_over_omega > 0.0)) throw ConfigError("fd_step_over_omega", "must be positive");
    if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
    if (!(final_tol > 0.0)) throw ConfigError("final_tol", "must be positive");
    if (threads < 0) throw ConfigError("threads", "must be non-negative");
    if (!(tie_band >= 0.0)) throw ConfigError("tie_band", "must be non-negative");
}

LossEvaluator::LossEvaluator(const OptimizationProblem& problem, double step_us)
    : problem_(problem), subspace_(search_subspace(problem)) {
    problem_.validate();
    propagator_ = std::make_unique<Propagator>(problem_.config, subspace_);
    options_.tol = problem_.tol;
    step_ = step_us > 0.0 ? step_us : calibrate_search_step(problem_);
    options_.fixed_step_us = step_;
    initial_ = to_subspace(disordered_state(problem_.config.n_atoms).as_vector(), subspace_);
    const BareIndex target = target_state(problem_.config).index;
    if (subspace_.empty()) {
        target_ = static_cast<Eigen::Index>(target);
    } else {
        target_ = std::find(subspace_.begin(), subspace_.end(), target) - subspace_.begin();
    }
}

std::size_t LossEvaluator::dimension() const { return static_cast<std::size_t>(propagator_->op().dimension()); }

PulseSchedule LossEvaluator::schedule(const Eigen::VectorXd& interior) const {
    return make_nqn_schedule(problem_.config, problem_.ramp, std::span<const double>(interior.data(), interior.size()));
}

void LossEvaluator::forward(const Eigen::VectorXd& interior) {
    if (interior.size() != problem_.parameter_count())
        throw std::invalid_argument("loss: expected " + std::to_string(problem_.parameter_count()) + " interior knots");
    const PulseSchedule s = schedule(interior);
    // Idle windows only add diagonal phases to a bare initial state and do not
    // change bare-state probabilities, so the search skips them.
    const double t0 = s.ramp_start();
    const std::vector<double>& knots = s.knot_times();
    knot_states_.resize(knots.size());
    StateVector psi = initial_;
    knot_states_[0] = psi;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        propagator_->advance(psi, s, t0 + knots[i], t0 + knots[i + 1], step_, options_, s.tau());
        knot_states_[i + 1] = psi;
    }
    cached_x_ = interior;
}

double LossEvaluator::loss(const Eigen::VectorXd& interior) {
    forward(interior);
    return std::clamp(1.0 - std::norm(knot_states_.back()[target_]), 0.0, 1.0);
}

Eigen::VectorXd LossEvaluator::gradient(const Eigen::VectorXd& interior, double /*loss_at_x*/, long* evaluations) {
    if (cached_x_.size() != interior.size() || cached_x_ != interior) forward(interior);
    const PulseSchedule base = schedule(interior);
    const double t0 = base.ramp_start();
    const std::vector<double>& knots = base.knot_times();
    const std::size_t n = knots.size() - 1;

    // Backward states chi_i = U(tau, t_i)^dagger |target>.
    std::vector<StateVector> chi(n + 1);
    StateVector c = StateVector::Zero(initial_.size());
    c[target_] = 1.0;
    chi[n] = c;
    for (std::size_t i = n; i-- > 2;) {
        propagator_->advance_adjoint(c, base, t0 + knots[i], t0 + knots[i + 1], step_, options_, base.tau());
        chi[i] = c;
    }

    const double h = problem_.fd_step_over_omega;
    Eigen::VectorXd g(interior.size());
    Eigen::VectorXd probe = interior;
    for (Eigen::Index p = 0; p < interior.size(); ++p) {
        const auto j = static_cast<std::size_t>(p) + 1;  // knot index
        double side[2];
        for (int k = 0; k < 2; ++k) {
            probe[p] = interior[p] + (k == 0 ? h : -h);
            const PulseSchedule s = schedule(probe);
            StateVector psi = knot_states_[j - 1];
            propagator_->advance(psi, s, t0 + knots[j - 1], t0 + knots[j + 1], step_, options_, s.tau());
            side[k] = 1.0 - std::norm(chi[j + 1].dot(psi));
            if (evaluations) ++*evaluations;
        }
        probe[p] = interior[p];
        g[p] = (side[0] - side[1]) / (2.0 * h);
    }
    return g;
}

double calibrate_search_step(const OptimizationProblem& problem) {
    problem.validate();
    const std::vector<BareIndex> sub = search_subspace(problem);
    Propagator propagator(problem.config, sub);
    PropagationOptions options;
    options.tol = problem.tol;
    const StateVector psi = to_subspace(disordered_state(problem.config.n_atoms).as_vector(), sub);

    const int m = problem.parameter_count();
    const double lo = problem.ramp.delta_start_over_omega, hi = problem.ramp.delta_end_over_omega;
    std::vector<std::vector<double>> probes;
    std::vector<double> linear(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) linear[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 1) / (m + 1);
    probes.push_back(linear);
    std::mt19937_64 rng(kProbeSeed);
    std::uniform_real_distribution<double> draw(std::min(lo, hi), std::max(lo, hi));
    for (int r = 0; r < 2; ++r) {
        std::vector<double> x(static_cast<std::size_t>(m));
        for (double& v : x) v = draw(rng);
        probes.push_back(x);
    }
    double step = options.initial_step_us;
    for (const auto& x : probes) {
        const PulseSchedule s = make_nqn_schedule(problem.config, problem.ramp, x);
        step = std::min(step, propagator.calibrate_step(psi, s, s.ramp_start(), s.ramp_end(), options));
    }
    return step;
}

std::uint64_t restart_seed(std::uint64_t seed, int index) {
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
}

double loss(const Eigen::VectorXd& interior, const OptimizationProblem& problem) {
    LossEvaluator evaluator(problem);
    return evaluator.loss(interior);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& interior, const OptimizationProblem& problem) {
    LossEvaluator evaluator(problem);
    return evaluator.gradient(interior, evaluator.loss(interior));
}

double schedule_fidelity(const ChainConfig& config, const PulseSchedule& schedule, double tol) {
    PropagationOptions options;
    options.tol = tol;
    const StateVector psi = disordered_state(config.n_atoms).as_vector();
    const PropagationResult r = propagate(config, psi, schedule, 0.0, schedule.total_duration(), options);
    return fidelity(r.final_state, target_state(config));
}

OptimizationReport optimize(const OptimizationProblem& problem) {
    problem.validate();
    const double step = calibrate_search_step(problem);
    const int m = problem.parameter_count();

    BfgsOptions bfgs;
    bfgs.max_iterations = problem.max_iterations;
    bfgs.gradient_tol = problem.gradient_tol;
    bfgs.lower = Eigen::VectorXd::Constant(m, -problem.bound_over_omega);
    bfgs.upper = Eigen::VectorXd::Constant(m, problem.bound_over_omega);

    OptimizationReport report;
    report.restarts.resize(static_cast<std::size_t>(problem.restarts));
    report.search_step_us = step;

    auto run_restart = [&](int r) {
        RestartRecord& rec = report.restarts[static_cast<std::size_t>(r)];
        rec.seed = restart_seed(problem.seed, r);
        std::mt19937_64 rng(rec.seed);
        rec.initial = draw_initial_knots(problem, rng);
        const Eigen::VectorXd x0 = to_eigen(rec.initial);

        // A fresh evaluator per restart keeps every restart independent of
        // which worker ran it and in what order.
        LossEvaluator evaluator(problem, step);
        Objective objective;
        objective.value = [&](const Eigen::VectorXd& x) { return evaluator.loss(x); };
        objective.gradient = [&](const Eigen::VectorXd& x, double fx, long& evaluations) {
            return evaluator.gradient(x, fx, &evaluations);
        };
        const BfgsResult res = minimize_bfgs(objective, x0, bfgs);
        rec.final = to_std(res.x);
        rec.loss = res.f;
        rec.iterations = res.iterations;
        rec.loss_evaluations = res.evaluations;
        rec.gradient_evaluations = res.gradient_evaluations;
        rec.loss_history = res.history;
        rec.stop = res.stop;
    };

    int workers = problem.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : problem.threads;
    workers = std::clamp(workers, 1, problem.restarts);
    if (workers == 1) {
        for (int r = 0; r < problem.restarts; ++r) run_restart(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int r = next++; r < problem.restarts; r = next++) run_restart(r);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                    next = problem.restarts;
                }
            });
        for (std::thread& t : pool) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    bool all_failed = true;
    double lowest = 1.0;
    std::vector<bool> nqn_shaped(report.restarts.size());
    for (std::size_t r = 0; r < report.restarts.size(); ++r) {
        const RestartRecord& rec = report.restarts[r];
        report.loss_evaluations += rec.loss_evaluations;
        report.gradient_evaluations += rec.gradient_evaluations;
        if (rec.stop != BfgsStop::LineSearchFailed) all_failed = false;
        lowest = std::min(lowest, rec.loss);
        nqn_shaped[r] = classify_nqn(make_nqn_schedule(problem.config, problem.ramp, rec.final)).is_nqn;
    }
    // Deterministic reduction: tie band first, then NQN shape, loss and seed.
    std::size_t best = report.restarts.size();
    for (std::size_t r = 0; r < report.restarts.size(); ++r) {
        const RestartRecord& rec = report.restarts[r];
        if (rec.loss > lowest + problem.tie_band) continue;
        if (best == report.restarts.size()) {
            best = r;
            continue;
        }
        const RestartRecord& cur = report.restarts[best];
        if (nqn_shaped[r] != nqn_shaped[best]) {
            if (nqn_shaped[r]) best = r;
        } else if (rec.loss < cur.loss || (rec.loss == cur.loss && rec.seed < cur.seed)) {
            best = r;
        }
    }
    report.all_line_searches_failed = all_failed;
    report.best_restart = best;
    report.best_interior = report.restarts[best].final;
    report.best_search_loss = report.restarts[best].loss;
    report.search_dimension = LossEvaluator(problem, step).dimension();

    const PulseSchedule winner = make_nqn_schedule(problem.config, problem.ramp, report.best_interior);
    report.best_knots = winner.knot_deltas();
    report.best_fidelity = schedule_fidelity(problem.config, winner, problem.final_tol);
    report.nqn = classify_nqn(winner);
    return report;
}

NqnClassification classify_nqn(const PulseSchedule& schedule, double fast_rate, double slow_rate) {
    NqnClassification c;
    const std::vector<double>& t = schedule.knot_times();
    const std::vector<double>& d = schedule.knot_deltas();
    const std::size_t n = schedule.segment_count();
    if (n < 3) return c;
    const double omega = schedule.envelope().value;
    auto rate = [&](std::size_t i) { return (d[i + 1] - d[i]) / (t[i + 1] - t[i]) / omega; };

    std::size_t lead = 0;
    while (lead < n && rate(lead) > fast_rate) ++lead;
    std::size_t trail = 0;
    while (trail < n - lead && rate(n - 1 - trail) > fast_rate) ++trail;
    if (lead == 0 || trail == 0 || lead + trail >= n) return c;

    const std::size_t q0 = lead, q1 = n - trail;  // Q covers segments [q0, q1)
    for (std::size_t i = q0; i < q1; ++i)
        if (rate(i) > fast_rate) return c;
    if (!((d[q1] - d[q0]) / omega < slow_rate * (t[q1] - t[q0]))) return c;

    c.is_nqn = true;
    c.n1_start = t[0];
    c.n1_end = c.q_start = t[q0];
    c.q_end = c.n2_start = t[q1];
    c.n2_end = t[n];
    c.delta_n1_end = d[q0] / omega;
    c.delta_q_end = d[q1] / omega;
    return c;
}

}  // namespace nqn
