#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nqn {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Frequencies in configs are quoted in (2pi) MHz, i.e. 1.0 means 2pi rad/us.
constexpr double to_angular(double mhz) noexcept { return kTwoPi * mhz; }
constexpr double from_angular(double rad_per_us) noexcept { return rad_per_us / kTwoPi; }

/// C6 of the 70S_{1/2} Rydberg level of 87Rb, (2pi) MHz um^6.
inline constexpr double kRubidiumC6 = 862690.0;

/// Largest chain the dense routines accept.
inline constexpr int kMaxAtoms = 16;

using StateVector = Eigen::VectorXcd;
using BareIndex = std::uint32_t;

/// Physical instance of a 1D chain with uniform spacing.
struct ChainConfig {
    int n_atoms = 7;
    double spacing_um = 0.0;      ///< lattice constant a
    double c6 = kRubidiumC6;      ///< (2pi) MHz um^6
    int order = 2;                ///< target Z_k order, k in {2, 3, 4}
    double omega = 1.0;           ///< Rabi frequency, (2pi) MHz

    /// R_b = (C6 / Omega)^(1/6) in um.
    double blockade_radius() const;

    /// Checks the basic invariants; throws ConfigError naming the field.
    void validate() const;

    /// validate() plus the N = 1 (mod k) condition needed for a Z_k target.
    void validate_for_target() const;

    std::uint32_t dimension() const { return std::uint32_t{1} << n_atoms; }

    /// Config with spacing chosen as a fraction of the blockade radius.
    static ChainConfig with_spacing_ratio(int n_atoms, int order, double a_over_rb,
                                          double omega = 1.0, double c6 = kRubidiumC6);
};

/// Bit mask of 1-based site `i`; atom 1 is the most significant bit.
constexpr BareIndex site_mask(int n_atoms, int site) noexcept {
    return BareIndex{1} << (n_atoms - site);
}

/// A product state of ground (0) and Rydberg (1) atoms.
struct BareState {
    BareIndex index = 0;
    int n_atoms = 0;

    bool excited(int site) const noexcept { return (index & site_mask(n_atoms, site)) != 0; }
    int excitation_count() const noexcept;

    /// Occupation string, e.g. "101".
    std::string to_string() const;
    static BareState from_string(std::string_view bits);

    StateVector as_vector() const;

    friend bool operator==(const BareState&, const BareState&) = default;
};

/// The disordered state |00...0>.
BareState disordered_state(int n_atoms);

/// Z_k ordered target: atoms 1, 1+k, 1+2k, ... excited.
/// Throws ConfigError when n_atoms is not congruent to 1 mod k.
BareState target_state(const ChainConfig& config);

/// Bare states whose excitations are pairwise at least `min_distance` sites
/// apart, ordered by excitation count and then by leftmost excitation.
/// min_distance = 2 at N = 3 gives |000>, |100>, |010>, |001>, |101>.
std::vector<BareIndex> blockade_basis(int n_atoms, int min_distance);

}  // namespace nqn
