#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nqn/model.hpp"

namespace nqn {

/// Dense real-symmetric Hamiltonian in rad/us.
using HamiltonianMatrix = Eigen::MatrixXd;

/// Largest chain for which dense matrices are built by default.
inline constexpr int kDenseAtomCap = 14;

/// V_ij = C6 / (|i - j| a)^6 in (2pi) MHz for 1-based sites i != j.
double pair_interaction(int i, int j, const ChainConfig& config);

/// Rydberg chain Hamiltonian
///   H = sum_i (Omega/2) sigma^x_i - Delta n_i + sum_{i<j} V_ij n_i n_j
/// in the bare basis, with all pair interactions retained. Frequencies passed
/// to the member functions are angular (rad/us).
///
/// The operator may also act on the span of a subset of bare states (P H P),
/// in which case vectors are indexed by position in that subset.
class ChainOperator {
public:
    explicit ChainOperator(const ChainConfig& config);
    ChainOperator(const ChainConfig& config, std::vector<BareIndex> subspace);

    int n_atoms() const { return n_atoms_; }
    Eigen::Index dimension() const { return interaction_.size(); }
    bool is_subspace() const { return !subspace_.empty(); }
    /// Bare index of each coordinate; empty for the full space.
    const std::vector<BareIndex>& subspace() const { return subspace_; }

    /// sum_{i<j} V_ij n_i n_j per bare state, rad/us.
    const Eigen::VectorXd& interaction_diagonal() const { return interaction_; }
    /// Excitation count per bare state.
    const Eigen::VectorXd& excitations() const { return excitations_; }

    /// out = (H(omega, delta) + y_rad sum_i sigma^y_i) in. `out` must not alias
    /// `in`. The sigma^y term carries commutator corrections of Magnus steps.
    void apply(double omega_rad, double delta_rad, const StateVector& in, StateVector& out, double y_rad = 0.0) const;

    /// Diagonal of H(., delta).
    Eigen::VectorXd diagonal(double delta_rad) const;

    HamiltonianMatrix dense(double omega_rad, double delta_rad) const;

    /// P H P on the span of the listed bare states, in that order.
    /// Full-space operators only.
    HamiltonianMatrix restricted(double omega_rad, double delta_rad, std::span<const BareIndex> basis) const;

    /// Cheap upper bound on the spectral norm of H(omega, delta).
    double norm_bound(double omega_rad, double delta_rad, double y_rad = 0.0) const {
        return std::max(std::abs(max_interaction_), std::abs(min_interaction_)) + std::abs(delta_rad) * n_atoms_ +
               (0.5 * std::abs(omega_rad) + std::abs(y_rad)) * n_atoms_;
    }

    /// Half-width and centre of an interval containing the spectrum.
    std::pair<double, double> spectral_bounds(double omega_rad, double delta_rad) const;

private:
    int n_atoms_;
    std::vector<BareIndex> subspace_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> links_;  // single flips inside the subspace
    Eigen::VectorXd interaction_;
    Eigen::VectorXd excitations_;
    double max_interaction_ = 0.0;
    double min_interaction_ = 0.0;
};

/// Bare states with no excited pair closer than `min_distance` sites when some
/// pair at a shorter distance interacts with at least `threshold` x Omega;
/// these strongly blockaded pairs stay out of reach of the dynamics.
/// Returns an empty list when no pair is that strong.
std::vector<BareIndex> blockade_subspace(const ChainConfig& config, double threshold);

/// Maps a full-space vector onto subspace coordinates and back.
StateVector to_subspace(const StateVector& full, const std::vector<BareIndex>& subspace);
StateVector from_subspace(const StateVector& reduced, const std::vector<BareIndex>& subspace, int n_atoms);

/// Full 2^N x 2^N matrix for Omega, Delta in (2pi) MHz; entries in rad/us.
/// Throws std::length_error above `max_atoms`.
HamiltonianMatrix build_full(const ChainConfig& config, double omega, double delta, int max_atoms = kDenseAtomCap);

/// Five-state N = 3 model on {|000>, |100>, |010>, |001>, |101>}:
/// diagonal (0, -D, -D, -D, -2D + V/64), Omega/2 couplings for single flips.
/// Inputs in (2pi) MHz, output in rad/us.
HamiltonianMatrix build_reduced5(double omega, double delta, double v_nn);

}  // namespace nqn
