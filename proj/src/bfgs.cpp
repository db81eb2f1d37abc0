#include "nqn/bfgs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nqn {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const BfgsOptions& o) {
    Eigen::VectorXd y = x;
    if (o.lower.size()) y = y.cwiseMax(o.lower);
    if (o.upper.size()) y = y.cwiseMin(o.upper);
    return y;
}

// Gradient with components zeroed where a bound blocks descent.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const BfgsOptions& o) {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (o.lower.size() && x[i] <= o.lower[i] && g[i] > 0.0) pg[i] = 0.0;
        if (o.upper.size() && x[i] >= o.upper[i] && g[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
}

}  // namespace

std::string to_string(BfgsStop stop) {
    switch (stop) {
        case BfgsStop::GradientTol: return "gradient_tol";
        case BfgsStop::LossTol: return "loss_tol";
        case BfgsStop::Target: return "target";
        case BfgsStop::MaxIterations: return "max_iterations";
        case BfgsStop::LineSearchFailed: return "line_search_failed";
    }
    return "unknown";
}

Eigen::VectorXd central_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                            const Eigen::VectorXd& x, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("central_difference_gradient: step must be positive");
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

BfgsResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0, const BfgsOptions& options) {
    if (!objective.value) throw std::invalid_argument("minimize_bfgs: objective has no value function");
    const Eigen::Index n = x0.size();
    if (options.lower.size() && options.lower.size() != n) throw std::invalid_argument("minimize_bfgs: lower bound size");
    if (options.upper.size() && options.upper.size() != n) throw std::invalid_argument("minimize_bfgs: upper bound size");

    BfgsResult result;
    auto value = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        return objective.value(x);
    };
    auto gradient = [&](const Eigen::VectorXd& x, double fx) {
        ++result.gradient_evaluations;
        if (objective.gradient) return objective.gradient(x, fx, result.evaluations);
        return central_difference_gradient(value, x, objective.fd_step);
    };

    Eigen::VectorXd x = project(x0, options);
    double f = value(x);
    Eigen::VectorXd g = gradient(x, f);
    result.history.push_back(f);

    auto scaled_identity = [&](const Eigen::VectorXd& grad) {
        const double norm = grad.lpNorm<Eigen::Infinity>();
        const double scale = norm > 0.0 ? options.initial_step / norm : 1.0;
        return Eigen::MatrixXd(scale * Eigen::MatrixXd::Identity(n, n));
    };
    Eigen::MatrixXd hinv = scaled_identity(g);
    bool fresh = true;  // hinv is a scaled identity

    result.stop = BfgsStop::MaxIterations;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (f <= options.target) {
            result.stop = BfgsStop::Target;
            break;
        }
        const Eigen::VectorXd pg = projected_gradient(x, g, options);
        if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
            result.stop = BfgsStop::GradientTol;
            break;
        }

        Eigen::VectorXd xt;
        double ft = 0.0;
        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Eigen::VectorXd p = -(hinv * pg);
            if (pg.dot(p) >= 0.0) {
                hinv = scaled_identity(pg);
                fresh = true;
                p = -(hinv * pg);
            }
            double alpha = 1.0;
            for (int k = 0; k <= options.max_backtracks; ++k, alpha *= options.shrink) {
                xt = project(x + alpha * p, options);
                const Eigen::VectorXd step = xt - x;
                if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
                ft = value(xt);
                if (std::isfinite(ft) && ft <= f + options.armijo * g.dot(step)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (fresh) break;
                hinv = scaled_identity(pg);
                fresh = true;
            }
        }
        if (!accepted) {
            result.stop = BfgsStop::LineSearchFailed;
            break;
        }

        const Eigen::VectorXd gt = gradient(xt, ft);
        const Eigen::VectorXd s = xt - x;
        const Eigen::VectorXd y = gt - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (fresh) hinv = (sy / y.squaredNorm()) * Eigen::MatrixXd::Identity(n, n);
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
            hinv = left * hinv * left.transpose() + rho * s * s.transpose();
            fresh = false;
        }
        const double decrease = f - ft;
        x = xt;
        f = ft;
        g = gt;
        result.history.push_back(f);
        result.iterations = iter + 1;
        if (decrease < options.loss_tol) {
            result.stop = f <= options.target ? BfgsStop::Target : BfgsStop::LossTol;
            break;
        }
    }
    result.x = std::move(x);
    result.f = f;
    return result;
}

}  // namespace nqn
