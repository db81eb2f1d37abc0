#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "nqn/hamiltonian.hpp"

using namespace nqn;

TEST_SUITE("hamiltonian") {

TEST_CASE("single atom") {
    ChainConfig c;
    c.n_atoms = 1;
    c.spacing_um = 5.0;
    const HamiltonianMatrix h = build_full(c, 1.0, 0.3);
    REQUIRE(h.rows() == 2);
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == doctest::Approx(0.5 * kTwoPi));
    CHECK(h(1, 0) == doctest::Approx(0.5 * kTwoPi));
    CHECK(h(1, 1) == doctest::Approx(-0.3 * kTwoPi));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_full(c, 1.0, 0.0));
    CHECK(es.eigenvalues()[0] == doctest::Approx(-0.5 * kTwoPi));
    CHECK(es.eigenvalues()[1] == doctest::Approx(0.5 * kTwoPi));
}

TEST_CASE("Hermiticity and structure over random draws") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> natoms(1, 6);
    std::uniform_real_distribution<double> u(-20.0, 20.0), sp(2.0, 12.0), om(0.1, 5.0);
    double worst = 0.0;
    for (int draw = 0; draw < 10000; ++draw) {
        ChainConfig c;
        c.n_atoms = natoms(rng);
        c.spacing_um = sp(rng);
        const double omega = om(rng), delta = u(rng);
        const HamiltonianMatrix h = build_full(c, omega, delta);
        worst = std::max(worst, (h - h.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, h.cwiseAbs().maxCoeff()));
        if (draw % 500 == 0) {
            // N 2^(N-1) off-diagonal pairs, each Omega/2, only between single flips.
            long pairs = 0;
            for (Eigen::Index r = 0; r < h.rows(); ++r)
                for (Eigen::Index s = r + 1; s < h.cols(); ++s)
                    if (h(r, s) != 0.0) {
                        ++pairs;
                        CHECK(std::popcount(static_cast<unsigned>(r ^ s)) == 1);
                        CHECK(h(r, s) == doctest::Approx(0.5 * to_angular(omega)));
                    }
            CHECK(pairs == c.n_atoms * (1L << (c.n_atoms - 1)));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("diagonal is -Delta n plus pair interactions") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(4, 2, 0.7);
    const double delta = 1.7;
    const HamiltonianMatrix h = build_full(c, 1.0, delta);
    for (BareIndex b = 0; b < 16; ++b) {
        const BareState s{b, 4};
        double expect = -to_angular(delta) * s.excitation_count();
        for (int i = 1; i <= 4; ++i)
            for (int j = i + 1; j <= 4; ++j)
                if (s.excited(i) && s.excited(j)) expect += to_angular(pair_interaction(i, j, c));
        CHECK(h(b, b) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("non-interacting limit has a binomial spectrum") {
    ChainConfig c;
    c.n_atoms = 4;
    c.spacing_um = 5.0;
    c.c6 = 1e-12;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_full(c, 1.0, 0.0));
    const Eigen::VectorXd e = es.eigenvalues() / (0.5 * kTwoPi);
    // Levels -4, -2, 0, 2, 4 with multiplicities 1, 4, 6, 4, 1.
    const int mult[] = {1, 4, 6, 4, 1};
    int k = 0;
    for (int level = 0; level < 5; ++level)
        for (int m = 0; m < mult[level]; ++m, ++k) CHECK(e[k] == doctest::Approx(-4.0 + 2.0 * level).epsilon(1e-9));
}

TEST_CASE("reduced five-state model equals the projected full matrix") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(3, 2, 0.6);
    const double v = pair_interaction(1, 2, c);
    for (double delta : {-3.0, 0.0, 2.5}) {
        const HamiltonianMatrix r = build_reduced5(1.0, delta, v);
        const HamiltonianMatrix p = ChainOperator(c).restricted(to_angular(1.0), to_angular(delta), blockade_basis(3, 2));
        CHECK((r - p).cwiseAbs().maxCoeff() == 0.0);
        CHECK(r(2, 4) == 0.0);
        CHECK(r(4, 4) == doctest::Approx(-2.0 * to_angular(delta) + to_angular(v) / 64.0));
    }
}

TEST_CASE("matrix-free apply matches the dense matrix") {
    std::mt19937_64 rng(2);
    for (int n : {1, 3, 6}) {
        const ChainConfig c = ChainConfig::with_spacing_ratio(n, 2, 0.6);
        const ChainOperator op(c);
        const StateVector x = testing::random_state(op.dimension(), rng);
        StateVector y;
        op.apply(3.0, -2.0, x, y);
        CHECK((y - op.dense(3.0, -2.0).cast<std::complex<double>>() * x).norm() < 1e-12);
        // sigma^y field: <1|s^y|0> = i on every site.
        Eigen::MatrixXcd sy = Eigen::MatrixXcd::Zero(op.dimension(), op.dimension());
        for (Eigen::Index b = 0; b < op.dimension(); ++b)
            for (int s = 0; s < n; ++s) {
                const Eigen::Index f = b ^ (Eigen::Index{1} << s);
                sy(f, b) = (b & (Eigen::Index{1} << s)) ? std::complex<double>(0, -1) : std::complex<double>(0, 1);
            }
        op.apply(3.0, -2.0, x, y, 0.7);
        const Eigen::MatrixXcd full = op.dense(3.0, -2.0).cast<std::complex<double>>() + 0.7 * sy;
        CHECK((y - full * x).norm() < 1e-12);
        CHECK((full - full.adjoint()).norm() == 0.0);
        CHECK(op.norm_bound(3.0, -2.0, 0.7) >= full.operatorNorm() - 1e-9);
    }
}

TEST_CASE("subspace operator is the projected Hamiltonian") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(7, 3, 0.36);
    const auto sub = blockade_subspace(c, 100.0);
    REQUIRE_FALSE(sub.empty());
    const ChainOperator full(c), reduced(c, sub);
    CHECK(reduced.dimension() == static_cast<Eigen::Index>(sub.size()));
    const HamiltonianMatrix p = full.restricted(5.0, 3.0, sub);
    CHECK((reduced.dense(5.0, 3.0) - p).cwiseAbs().maxCoeff() < 1e-9);
    std::mt19937_64 rng(4);
    const StateVector x = testing::random_state(reduced.dimension(), rng);
    StateVector y;
    reduced.apply(5.0, 3.0, x, y, -0.4);
    StateVector yf;
    full.apply(5.0, 3.0, from_subspace(x, sub, 7), yf, -0.4);
    CHECK((to_subspace(yf, sub) - y).norm() < 1e-9);
    CHECK((from_subspace(to_subspace(yf, sub), sub, 7) - yf).norm() <= yf.norm());
}

TEST_CASE("blockade subspace thresholds") {
    // a = 0.7 Rb: V(a) is about 8.5 Omega.
    const ChainConfig z2 = ChainConfig::with_spacing_ratio(5, 2, 0.7);
    CHECK(blockade_subspace(z2, 100.0).empty());
    CHECK(blockade_subspace(z2, 5.0).size() == 13);
    const ChainConfig z2tight = ChainConfig::with_spacing_ratio(5, 2, 0.41);
    CHECK(blockade_subspace(z2tight, 100.0).size() == 13);
}

TEST_CASE("dense cap") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(15, 2, 0.7);
    CHECK_THROWS_AS(build_full(c, 1.0, 0.0), std::length_error);
}

}  // TEST_SUITE
