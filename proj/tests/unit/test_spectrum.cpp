#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nqn/diagnostics.hpp"
#include "nqn/propagator.hpp"
#include "nqn/spectrum.hpp"

using namespace nqn;

namespace {

// Diabatic survival of a single atom swept linearly through resonance.
double simulated_survival(double omega, double rate) {
    ChainConfig c;
    c.n_atoms = 1;
    c.spacing_um = 5.0;
    c.omega = omega;
    const double span = 60.0 * omega;
    const PulseSchedule s = linear_ramp(omega, -span, span, 2.0 * span / rate);
    PropagationOptions o;
    o.tol = 1e-9;
    const StateVector psi = propagate(c, disordered_state(1).as_vector(), s, 0.0, s.total_duration(), o).final_state;
    return std::norm(psi[0]);
}

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("Landau-Zener formula matches two-level sweeps") {
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double rate = landau_zener_rate(1.0, p, LzConvention::HalfCoupling);
        CHECK(landau_zener(1.0, rate, LzConvention::HalfCoupling) == doctest::Approx(p).epsilon(1e-12));
        CHECK(std::abs(simulated_survival(1.0, rate) - p) < 0.02);
    }
}

TEST_CASE("Landau-Zener conventions and anchor") {
    // Inverting the full-coupling form at P = 0.82: rate = 2 pi Omega^2 / -ln 0.82 in angular units.
    const double rate = landau_zener_rate(1.0, 0.82, LzConvention::FullCoupling);
    CHECK(to_angular(rate) == doctest::Approx(kTwoPi * kTwoPi * kTwoPi / -std::log(0.82)));
    CHECK(landau_zener(1.0, rate, LzConvention::FullCoupling) == doctest::Approx(0.82).epsilon(1e-12));
    // Exponents differ by exactly a factor of four.
    CHECK(std::log(landau_zener(1.0, rate, LzConvention::FullCoupling)) ==
          doctest::Approx(4.0 * std::log(landau_zener(1.0, rate, LzConvention::HalfCoupling))));
}

TEST_CASE("Landau-Zener monotonicity and limits") {
    for (LzConvention conv : {LzConvention::FullCoupling, LzConvention::HalfCoupling}) {
        double prev = 0.0;
        for (double rate = 1.0; rate < 1e4; rate *= 1.5) {
            const double p = landau_zener(1.0, rate, conv);
            CHECK(p > prev);
            CHECK(p < 1.0);
            prev = p;
        }
        prev = 1.0;
        for (double omega = 0.05; omega < 5.0; omega *= 1.3) {
            const double p = landau_zener(omega, 10.0, conv);
            CHECK(p < prev);
            prev = p;
        }
        CHECK(landau_zener(1.0, 1e12, conv) == doctest::Approx(1.0));
        CHECK(landau_zener(1.0, 1e-3, conv) == 0.0);
    }
    CHECK_THROWS_AS(landau_zener(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(landau_zener_rate(1.0, 1.0), std::invalid_argument);
}

TEST_CASE("bare crossings at N = 3") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(3, 2, 0.7);
    const double v = pair_interaction(1, 2, c);
    const std::vector<double> x = bare_crossings(c);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == v / 128.0);
    CHECK(x[2] == v / 64.0);
}

TEST_CASE("eigensystem conventions") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(4, 2, 0.7);
    const HamiltonianMatrix h = build_full(c, 1.0, 2.0);
    const EigenFrame f = eigensystem(h, 0.5);
    CHECK(f.t == 0.5);
    for (Eigen::Index k = 1; k < f.size(); ++k) CHECK(f.values[k] >= f.values[k - 1]);
    CHECK((h * f.vectors - f.vectors * f.values.asDiagonal()).norm() < 1e-10 * f.scale);
    CHECK((f.vectors.transpose() * f.vectors - Eigen::MatrixXd::Identity(16, 16)).norm() < 1e-10);
    for (Eigen::Index k = 0; k < f.size(); ++k) {
        Eigen::Index first = 0;
        while (std::abs(f.vectors(first, k)) <= 1e-12) ++first;
        CHECK(f.vectors(first, k) > 0.0);
        CHECK(f.labels[static_cast<std::size_t>(k)] == k + 1);
    }
    HamiltonianMatrix bad = h;
    bad(0, 1) += 1.0;
    CHECK_THROWS_AS(eigensystem(bad), std::invalid_argument);
}

TEST_CASE("tracked labels stay a permutation and follow avoided crossings") {
    const ChainConfig c = ChainConfig::with_spacing_ratio(5, 2, 0.7);
    const PulseSchedule s = linear_ramp(1.0, -12.0, 12.0, 1.0);
    AdiabaticTracker tracker(c, s);
    std::vector<int> expect(13);
    std::iota(expect.begin(), expect.end(), 1);
    for (double t = 0.0; t <= 1.0 + 1e-12; t += 0.05) {
        const EigenFrame& f = tracker.frame_at(std::min(t, 1.0));
        std::vector<int> labels = f.labels;
        std::sort(labels.begin(), labels.end());
        CHECK(labels == expect);
        for (int m = 1; m <= 13; ++m) CHECK(f.labels[static_cast<std::size_t>(f.column_of_label(m))] == m);
    }

    // At N = 1 the levels never cross, so labels keep their energy order.
    ChainConfig one;
    one.n_atoms = 1;
    one.spacing_um = 5.0;
    AdiabaticTracker t1(one, s, FrameBasis::Full);
    CHECK(t1.frame_at(1.0).labels == std::vector<int>{1, 2});

    // Two exactly crossing levels swap energy order but keep their labels.
    const EigenFrame a = eigensystem(build_full(one, 1e-9, -1.0));
    const EigenFrame b = eigensystem(build_full(one, 1e-9, 1.0));
    CHECK(track_adiabatic_labels(a, b) == std::vector<int>{2, 1});
}

}  // TEST_SUITE
