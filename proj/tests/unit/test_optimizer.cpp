#include <doctest.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "nqn/bfgs.hpp"
#include "nqn/config.hpp"
#include "nqn/optimizer.hpp"

using namespace nqn;

namespace {

OptimizationProblem small_problem(int n_atoms, int restarts = 4) {
    OptimizationProblem p;
    p.config = ChainConfig::with_spacing_ratio(n_atoms, 2, default_spacing_ratio(2));
    p.restarts = restarts;
    p.seed = 7;
    return p;
}

Eigen::VectorXd random_interior(std::mt19937_64& rng, int n, double lim = 12.0) {
    std::uniform_real_distribution<double> u(-lim, lim);
    Eigen::VectorXd x(n);
    for (double& v : x) v = u(rng);
    return x;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("BFGS finds the minimum of a quadratic") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
    const Eigen::Vector3d b(1, -2, 0.5);
    const Eigen::VectorXd exact = a.ldlt().solve(b);
    Objective obj;
    obj.value = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
    obj.gradient = [&](const Eigen::VectorXd& x, double, long&) -> Eigen::VectorXd { return a * x - b; };
    BfgsOptions o;
    o.gradient_tol = 1e-7;
    o.loss_tol = 0.0;
    o.target = -std::numeric_limits<double>::infinity();  // the minimum is negative
    const BfgsResult r = minimize_bfgs(obj, Eigen::VectorXd::Zero(3), o);
    CHECK((r.x - exact).norm() < 1e-6);
    CHECK((a * r.x - b).norm() < 1e-6);
    CHECK(r.stop == BfgsStop::GradientTol);
    CHECK(std::is_sorted(r.history.rbegin(), r.history.rend()));
    // Central differences are exact for a quadratic up to rounding.
    CHECK(central_difference_gradient(obj.value, exact, 1e-3).norm() < 1e-6);
}

TEST_CASE("BFGS respects the box") {
    Objective obj;
    obj.value = [](const Eigen::VectorXd& x) { return (x.array() - 5.0).square().sum(); };
    BfgsOptions o;
    o.lower = Eigen::VectorXd::Constant(2, -2.0);
    o.upper = Eigen::VectorXd::Constant(2, 2.0);
    o.upper[1] = 7.0;
    const BfgsResult r = minimize_bfgs(obj, Eigen::VectorXd::Zero(2), o);
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(5.0).epsilon(1e-4));
    CHECK(r.f <= obj.value(Eigen::VectorXd::Zero(2)));
}

TEST_CASE("loss is a probability") {
    OptimizationProblem p = small_problem(5);
    std::mt19937_64 rng(41);
    LossEvaluator ev(p);
    for (int draw = 0; draw < 100; ++draw) {
        const double l = ev.loss(random_interior(rng, p.parameter_count()));
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
    }
}

TEST_CASE("loss vanishes when the ramp reaches the target") {
    // A single atom driven slowly and strongly follows the dressed ground state,
    // which at Delta = 12 Omega still holds (Omega / 2 Delta)^2 of |0>.
    OptimizationProblem p = small_problem(1);
    p.config.omega = 10.0;
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(p.parameter_count(), -9.0, 9.0);
    CHECK(loss(x, p) < 2e-3);
    CHECK(loss(x, p) == doctest::Approx(1.0 - schedule_fidelity(p.config, LossEvaluator(p).schedule(x)))
                            .epsilon(1e-5));
}

TEST_CASE("finite-difference gradient matches a five-point stencil") {
    OptimizationProblem p = small_problem(3);
    p.tol = 1e-10;
    std::mt19937_64 rng(42);
    LossEvaluator ev(p);
    for (int draw = 0; draw < 3; ++draw) {
        const Eigen::VectorXd x = random_interior(rng, p.parameter_count(), 6.0);
        const Eigen::VectorXd g = ev.gradient(x, ev.loss(x));
        Eigen::VectorXd ref(x.size());
        const double h = p.fd_step_over_omega;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            auto at = [&](double s) {
                Eigen::VectorXd y = x;
                y[i] += s;
                return ev.loss(y);
            };
            ref[i] = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
        }
        CHECK((g - ref).norm() <= 1e-4 * ref.norm());
    }
}

TEST_CASE("central-difference error scales with the step squared") {
    OptimizationProblem p = small_problem(3);
    p.tol = 1e-11;
    std::mt19937_64 rng(43);
    const Eigen::VectorXd x = random_interior(rng, p.parameter_count(), 6.0);
    auto grad = [&](double h) {
        OptimizationProblem q = p;
        q.fd_step_over_omega = h;
        return gradient(x, q);
    };
    const Eigen::VectorXd g1 = grad(0.02), g2 = grad(0.04), g4 = grad(0.08);
    const double ratio = (g4 - g2).norm() / (g2 - g1).norm();
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("optimize is deterministic and thread independent") {
    OptimizationProblem p = small_problem(3, 1);
    const OptimizationReport a = optimize(p), b = optimize(p);
    CHECK(a.best_interior == b.best_interior);
    CHECK(a.best_fidelity == b.best_fidelity);
    CHECK(a.restarts[0].loss_history == b.restarts[0].loss_history);

    p.restarts = 4;
    p.threads = 1;
    const OptimizationReport serial = optimize(p);
    p.threads = 3;
    const OptimizationReport parallel = optimize(p);
    CHECK(serial.best_restart == parallel.best_restart);
    CHECK(serial.best_fidelity == parallel.best_fidelity);
    for (std::size_t r = 0; r < serial.restarts.size(); ++r) {
        CHECK(serial.restarts[r].final == parallel.restarts[r].final);
        CHECK(serial.restarts[r].seed == restart_seed(p.seed, static_cast<int>(r)));
    }
}

TEST_CASE("report invariants") {
    const OptimizationProblem p = small_problem(3, 3);
    const OptimizationReport r = optimize(p);
    CHECK(r.best_knots.front() == -12.0);
    CHECK(r.best_knots.back() == 12.0);
    CHECK(r.best_knots.size() == 9);
    double lowest = 1.0;
    for (const RestartRecord& rec : r.restarts) {
        CHECK(rec.loss <= rec.loss_history.front());
        lowest = std::min(lowest, rec.loss);
        for (double v : rec.final) CHECK(std::abs(v) <= p.bound_over_omega);
    }
    CHECK(r.best_search_loss == doctest::Approx(lowest).epsilon(1e-6));
}

TEST_CASE("N = 3 reaches the target") {
    const OptimizationReport r = optimize(small_problem(3, 50));
    CHECK(r.best_fidelity >= 0.99);
}

TEST_CASE("initial knots") {
    OptimizationProblem p = small_problem(5);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i)
        for (double v : draw_initial_knots(p, rng)) CHECK(std::abs(v) <= 12.0);
    p.init = InitMode::Nqn;
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> k = draw_initial_knots(p, rng);
        REQUIRE(k.size() == 7);
        // Peak of N1 (plus Q jitter) stays within [0, 6.5].
        CHECK(*std::max_element(k.begin(), k.end()) <= 6.5);
        CHECK(*std::min_element(k.begin(), k.end()) >= -12.0);
    }
    CHECK(init_mode_from_string("nqn") == InitMode::Nqn);
    CHECK(to_string(InitMode::Uniform) == "uniform");
    CHECK_THROWS(init_mode_from_string("other"));
}

TEST_CASE("classify_nqn") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(3, 2, 0.7);
    const RampSpec spec;
    const std::vector<double> reference{3, 2, 1, 0, -1, -2, -3};
    const NqnClassification k = classify_nqn(make_nqn_schedule(c, spec, reference));
    CHECK(k.is_nqn);
    CHECK(k.label() == "NQN");
    CHECK(k.delta_n1_end == doctest::Approx(3.0));
    CHECK(k.delta_q_end == doctest::Approx(-3.0));
    // Mirror-antisymmetric ramp: equal N1 and N2 windows.
    CHECK(k.n1_end - k.n1_start == doctest::Approx(k.n2_end - k.n2_start));
    CHECK(k.n1_end == doctest::Approx(1.8 - k.n2_start));

    const std::vector<double> monotonic{-9, -6, -3, 0, 3, 6, 9};
    CHECK(classify_nqn(make_nqn_schedule(c, spec, monotonic)).label() == "unclassified");
    const std::vector<double> no_q{6, 12, 12, 12, 12, 12, 12};
    CHECK_FALSE(classify_nqn(make_nqn_schedule(c, spec, no_q)).is_nqn);
}

}  // TEST_SUITE

TEST_SUITE("optimizer_reference") {

TEST_CASE("reference NQN ramp at N = 7") {
    OptimizationProblem p = small_problem(7);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(7, 3.0, -3.0);
    const double l = loss(x, p);
    MESSAGE("loss = " << l);
    CHECK(l <= 0.04);
}

}  // TEST_SUITE
