#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nqn/hamiltonian.hpp"

namespace nqn {

/// Applies exp(-i dt H(omega, delta)) to a state by Lanczos projection onto a
/// Krylov space, growing the space until the a-posteriori error estimate drops
/// below `tol` and splitting dt when the space would exceed `max_dim`.
/// dt may be negative (backward evolution).
/// Holds the Krylov basis, so one instance per thread.
class KrylovExponential {
public:
    explicit KrylovExponential(int max_dim = 40) : max_dim_(max_dim) {}

    /// Returns the number of H applications used.
    /// `y_rad` adds y_rad sum_i sigma^y_i to the Hamiltonian.
    long apply(const ChainOperator& op, double omega_rad, double delta_rad, double dt, StateVector& psi, double tol,
               double y_rad = 0.0);

private:
    bool try_step(const ChainOperator& op, double omega_rad, double delta_rad, double y_rad, double dt,
                  StateVector& psi, double tol, long& matvecs);

    int max_dim_;
    int last_m_ = 0;
    double last_piece_ = 0.0;
    std::vector<StateVector> basis_;
    StateVector w_;
};

/// exp(-i dt H) psi by full eigendecomposition; reference for small systems.
StateVector expm_dense(const HamiltonianMatrix& h, double dt, const StateVector& psi);

}  // namespace nqn
