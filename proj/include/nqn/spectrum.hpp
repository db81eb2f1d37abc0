#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nqn/hamiltonian.hpp"
#include "nqn/schedule.hpp"

namespace nqn {

/// Instantaneous eigensystem of H(t), eigenvalues ascending (rad/us).
///
/// `labels[c]` is the 1-based adiabatic label carried by column c. A fresh
/// frame is labelled 1..n in energy order; track_adiabatic_labels() carries
/// labels from one frame to the next. When `basis` is non-empty the frame
/// lives on the span of those bare states (rows follow `basis`).
struct EigenFrame {
    double t = 0.0;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<int> labels;
    std::vector<BareIndex> basis;
    double scale = 0.0;  ///< max-abs entry of the diagonalised matrix

    Eigen::Index size() const { return values.size(); }
    int column_of_label(int label) const;
    bool restricted() const { return !basis.empty(); }
};

/// Full symmetric eigendecomposition. Each eigenvector's first component with
/// magnitude above 1e-12 is made positive. Throws std::invalid_argument when
/// H is not symmetric to 1e-12 relative.
EigenFrame eigensystem(const HamiltonianMatrix& h, double t = 0.0, std::vector<BareIndex> basis = {});

/// Labels for `next`'s columns inherited from `prev`: greedy maximal |overlap|
/// assignment; columns whose best remaining overlap is below 0.5 take the
/// leftover labels in energy order. Result is a permutation of prev.labels.
std::vector<int> track_adiabatic_labels(const EigenFrame& prev, const EigenFrame& next);

/// Which states the adiabatic frames are built on.
enum class FrameBasis {
    Full,      ///< all 2^N bare states
    Blockade,  ///< bare states with excitations at least `order` sites apart
};

/// Produces eigenframes of H(t) along a schedule with labels tracked through
/// avoided crossings. Frames are inserted internally so that consecutive
/// diagonalisations differ by at most `max_delta_step` (units of Omega) in
/// detuning. Queries must be made at non-decreasing times.
class AdiabaticTracker {
public:
    AdiabaticTracker(const ChainConfig& config, const PulseSchedule& schedule, FrameBasis basis = FrameBasis::Blockade,
                     double max_delta_step = 0.02);

    const EigenFrame& frame_at(double t);
    const std::vector<BareIndex>& basis() const { return basis_; }

private:
    EigenFrame diagonalise(double t) const;

    ChainOperator op_;
    PulseSchedule schedule_;
    std::vector<BareIndex> basis_;
    double omega_ref_;
    double max_delta_step_;
    EigenFrame current_;
    bool started_ = false;
};

/// Detunings ((2pi) MHz) at which two bare energies W_b - k_b Delta cross,
/// over the blockade basis of the config's order (the five-state set at N = 3).
/// Sorted, duplicates merged.
std::vector<double> bare_crossings(const ChainConfig& config);

/// Same over an explicit list of bare states.
std::vector<double> bare_crossings(const ChainConfig& config, const std::vector<BareIndex>& basis);

enum class LzConvention {
    FullCoupling,   ///< P = exp(-2 pi Omega^2 / rate)
    HalfCoupling,   ///< P = exp(-2 pi (Omega/2)^2 / rate), exact for an Omega/2 off-diagonal
};

/// Diabatic survival probability at a linear crossing. `omega` in (2pi) MHz,
/// `rate` in (2pi) MHz/us; converted to angular units before use.
double landau_zener(double omega, double rate, LzConvention convention = LzConvention::FullCoupling);

/// Sweep rate ((2pi) MHz/us) at which landau_zener() returns `probability`.
double landau_zener_rate(double omega, double probability, LzConvention convention = LzConvention::FullCoupling);

}  // namespace nqn
