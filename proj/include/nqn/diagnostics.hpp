#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nqn/model.hpp"
#include "nqn/schedule.hpp"
#include "nqn/spectrum.hpp"

namespace nqn {

/// |<target|psi>|^2
double fidelity(const StateVector& psi, const BareState& target);

/// Lambda_b = |<b|psi>|^2 for every bare state b.
Eigen::VectorXd bare_projections(const StateVector& psi);

/// Lambda restricted to the listed bare states, in that order.
std::vector<double> bare_projections(const StateVector& psi, std::span<const BareIndex> subset);

/// Gamma_n = |<E_n|psi>|^2 keyed by adiabatic label.
///
/// Eigenvalues within 1e-9 * scale of each other form a degenerate block;
/// only block sums are gauge invariant, so members of such blocks are flagged.
struct AdiabaticProjection {
    std::vector<double> by_label;     ///< index label - 1
    std::vector<double> block_weight; ///< index label - 1; sum over the label's block
    std::vector<bool> degenerate;     ///< index label - 1
    double total = 0.0;               ///< sum of all Gamma (below 1 on a restricted frame)

    double gamma(int label) const { return by_label.at(static_cast<std::size_t>(label - 1)); }
    int dominant_label() const;
};

/// `per_frame_order` keys by ascending-energy position instead of tracked label.
AdiabaticProjection adiabatic_projections(const StateVector& psi, const EigenFrame& frame,
                                          bool per_frame_order = false);

/// <n_i> for sites 1..N (index i - 1).
std::vector<double> local_occupations(const StateVector& psi);

struct OrderParameter {
    double delta_s = 0.0;  ///< odd-site minus even-site population
    double n_tot = 0.0;
};

OrderParameter order_parameter(const StateVector& psi);

/// ideal * (1 - per_atom_error)^((N+1)/2); defined for odd N only.
double measured_fidelity(double ideal, int n_atoms, double per_atom_error = 0.08);

/// Scalar observables at one instant.
struct ObservableSet {
    double fidelity = 0.0;
    Eigen::VectorXd lambda;
    std::optional<AdiabaticProjection> gamma;
    double delta_s = 0.0;
    double n_tot = 0.0;
    std::vector<double> local_n;
};

ObservableSet observe(const StateVector& psi, const BareState& target, const EigenFrame* frame = nullptr);

/// Evaluates named observables along a trajectory, one row per call.
///
/// Names: F, Lambda_I, Lambda_<bits>, DeltaS, n_tot, n_local (expands to
/// n_1..n_N), Gamma_<m>, Gamma_max, Gamma_argmax. Gamma columns use an
/// AdiabaticTracker, so rows must be requested at non-decreasing times.
class ObservableEvaluator {
public:
    ObservableEvaluator(const ChainConfig& config, const PulseSchedule& schedule, std::vector<std::string> names,
                        FrameBasis frame_basis = FrameBasis::Blockade);

    const std::vector<std::string>& columns() const { return columns_; }
    std::vector<double> evaluate(double t, const StateVector& psi);

private:
    enum class Kind { Fidelity, Lambda, DeltaS, NTot, Site, Gamma, GammaMax, GammaArgmax };
    struct Column {
        Kind kind;
        BareIndex bare = 0;
        int index = 0;
    };

    int n_atoms_;
    std::optional<BareState> target_;
    std::vector<Column> plan_;
    std::vector<std::string> columns_;
    std::unique_ptr<AdiabaticTracker> tracker_;
};

}  // namespace nqn
