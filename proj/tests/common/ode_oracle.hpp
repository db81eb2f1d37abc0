#pragma once

#include <algorithm>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "nqn/hamiltonian.hpp"
#include "nqn/schedule.hpp"

namespace testing {

// Reference solution of i psi' = H(t) psi with an adaptive Dormand-Prince
// integrator on the real/imaginary split, restarted at every breakpoint.
inline nqn::StateVector ode_oracle(const nqn::ChainConfig& config, const nqn::StateVector& psi0,
                                  const nqn::PulseSchedule& schedule) {
    namespace odeint = boost::numeric::odeint;
    using State = std::vector<double>;
    const nqn::ChainOperator op(config);
    const Eigen::Index dim = op.dimension();
    State x(static_cast<std::size_t>(2 * dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
        x[static_cast<std::size_t>(i)] = psi0[i].real();
        x[static_cast<std::size_t>(dim + i)] = psi0[i].imag();
    }
    nqn::StateVector in(dim), out(dim);
    auto rhs = [&](const State& s, State& ds, double t) {
        const nqn::ControlPoint c = schedule.evaluate(std::min(t, schedule.total_duration()));
        for (Eigen::Index i = 0; i < dim; ++i)
            in[i] = {s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(dim + i)]};
        op.apply(nqn::to_angular(c.omega), nqn::to_angular(c.delta), in, out);
        // d/dt psi = -i H psi
        for (Eigen::Index i = 0; i < dim; ++i) {
            ds[static_cast<std::size_t>(i)] = out[i].imag();
            ds[static_cast<std::size_t>(dim + i)] = -out[i].real();
        }
    };
    const auto bp = schedule.breakpoints();
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        if (bp[k + 1] - bp[k] <= 0.0) continue;
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
        // Evaluate strictly inside the piece so one-sided controls are used.
        const double a = bp[k], b = bp[k + 1];
        auto piece = [&](const State& s, State& ds, double t) { rhs(s, ds, std::clamp(t, a + 1e-14, b - 1e-14)); };
        odeint::integrate_adaptive(stepper, piece, x, a, b, 1e-3);
    }
    nqn::StateVector psi(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        psi[i] = {x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(dim + i)]};
    return psi;
}

}  // namespace testing
