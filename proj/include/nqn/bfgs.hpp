#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nqn {

struct BfgsOptions {
    int max_iterations = 200;
    double gradient_tol = 1e-5;   ///< stop when the projected gradient's max-norm falls below
    double loss_tol = 1e-10;      ///< stop when an accepted step lowers f by less than this
    double target = 0.0;          ///< stop once f <= target
    double armijo = 1e-4;         ///< sufficient-decrease constant
    double shrink = 0.5;          ///< backtracking factor
    int max_backtracks = 30;
    double initial_step = 1.0;    ///< length of the first (steepest-descent) step
    Eigen::VectorXd lower;        ///< box bounds; empty means unbounded
    Eigen::VectorXd upper;
};

enum class BfgsStop { GradientTol, LossTol, Target, MaxIterations, LineSearchFailed };

std::string to_string(BfgsStop stop);

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    long evaluations = 0;           ///< objective calls, including those inside gradients
    long gradient_evaluations = 0;
    std::vector<double> history;    ///< f after each accepted iterate, starting with f(x0)
    BfgsStop stop = BfgsStop::MaxIterations;

    bool line_search_failed() const { return stop == BfgsStop::LineSearchFailed; }
};

/// Objective with an optional gradient hook. When `gradient` is empty a
/// central difference with step `fd_step` is used.
struct Objective {
    std::function<double(const Eigen::VectorXd&)> value;
    /// Called with x and f(x); must return df/dx and may add to `evaluations`.
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, double, long& evaluations)> gradient;
    double fd_step = 1e-3;
};

/// Central differences, one value call per perturbation (2n calls).
Eigen::VectorXd central_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                            const Eigen::VectorXd& x, double step);

/// Quasi-Newton minimisation with the BFGS inverse-Hessian update, an Armijo
/// backtracking line search and projection onto the box after every step.
/// Never returns a point worse than x0.
BfgsResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0, const BfgsOptions& options = {});

}  // namespace nqn
