#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "nqn/model.hpp"

namespace nqn {

enum class Phase { Disordered, Z2, Z3, Z4, Other };

std::string to_string(Phase phase);

/// Lowest eigenvector of the dense Hamiltonian at fixed Delta.
struct GroundState {
    StateVector state;              ///< lowest-index member of the ground block
    double energy = 0.0;            ///< rad/us
    bool degenerate = false;        ///< gap to the next level below 1e-9 ||H||
    int multiplicity = 1;
    std::vector<double> occupations;  ///< <n_i> averaged over the ground block
    double residual = 0.0;          ///< ||H v - E v|| / ||H||
};

/// Throws std::length_error above the dense cap.
GroundState ground_state(const ChainConfig& config, double delta);

/// Density-wave structure factor S(q) = |sum_j exp(i q j) <n_j>|^2 / N^2.
double structure_factor(const std::vector<double>& occupations, double q);

/// Wave vectors pi, 2pi/3, pi/2 and the phases they indicate.
inline constexpr std::array<Phase, 3> kOrderedPhases{Phase::Z2, Phase::Z3, Phase::Z4};
std::array<double, 3> ordering_wavevectors();

struct PhasePoint {
    double delta_over_omega = 0.0;
    double rb_over_a = 0.0;
    Phase label = Phase::Disordered;
    double order_strength = 0.0;     ///< max_q S(q)
    std::array<double, 3> s{};       ///< S(pi), S(2pi/3), S(pi/2)
    double filling = 0.0;            ///< n_tot / N
    bool degenerate = false;
};

/// Labels a density profile. Candidates are the q with S(q) > min_strength;
/// the one with the largest S wins, except that a candidate with a longer
/// period and at least `harmonic_ratio` of that S is preferred (a period-k
/// wave on an open chain also leaks weight into shorter periods). Profiles
/// with filling n_tot / N <= min_filling are disordered.
PhasePoint classify_phase(const std::vector<double>& occupations, double min_strength = 0.05,
                          double min_filling = 0.1, double harmonic_ratio = 0.5);

/// classify_phase of <n_i> in `state`.
PhasePoint classify_phase(const StateVector& state);

/// Rectangular grid; steps counts points per axis (1 means the minimum only).
struct ScanGrid {
    double delta_min = -4.0, delta_max = 12.0;
    int delta_steps = 33;
    double rb_min = 0.5, rb_max = 4.5;
    int rb_steps = 33;

    /// "dmin:dmax:steps,rmin:rmax:steps"; throws ConfigError("grid").
    static ScanGrid parse(const std::string& text);
    std::string to_string() const;
    double delta_at(int i) const;
    double rb_at(int j) const;
    std::size_t size() const { return static_cast<std::size_t>(delta_steps) * static_cast<std::size_t>(rb_steps); }
};

/// Classifies the ground state at every grid point. `config` supplies N, C6
/// and Omega; the spacing is set from R_b / a. Points are ordered with
/// R_b / a outer and Delta inner, independent of `threads`.
std::vector<PhasePoint> scan(const ScanGrid& grid, const ChainConfig& config, int threads = 1);

/// CSV with header delta_over_omega,rb_over_a,label,order_strength.
void write_phase_map(std::ostream& out, const std::vector<PhasePoint>& points);

}  // namespace nqn
