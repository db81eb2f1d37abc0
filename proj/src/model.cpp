#include "nqn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nqn/errors.hpp"

namespace nqn {

double ChainConfig::blockade_radius() const { return std::pow(c6 / omega, 1.0 / 6.0); }

void ChainConfig::validate() const {
    if (n_atoms < 1) throw ConfigError("n_atoms", "must be at least 1");
    if (n_atoms > kMaxAtoms)
        throw ConfigError("n_atoms", "exceeds the dense-model cap of " + std::to_string(kMaxAtoms));
    if (!(spacing_um > 0.0) || !std::isfinite(spacing_um)) throw ConfigError("spacing_um", "must be positive");
    if (!(c6 > 0.0) || !std::isfinite(c6)) throw ConfigError("c6_mhz_um6", "must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ConfigError("omega_mhz", "must be positive");
    if (order < 2 || order > 4) throw ConfigError("order", "must be 2, 3 or 4");
}

void ChainConfig::validate_for_target() const {
    validate();
    if ((n_atoms - 1) % order != 0)
        throw ConfigError("n_atoms", "Z" + std::to_string(order) + " target needs n_atoms = 1 (mod " +
                                         std::to_string(order) + "), got " + std::to_string(n_atoms));
}

ChainConfig ChainConfig::with_spacing_ratio(int n_atoms, int order, double a_over_rb, double omega, double c6) {
    ChainConfig config;
    config.n_atoms = n_atoms;
    config.order = order;
    config.omega = omega;
    config.c6 = c6;
    config.spacing_um = a_over_rb * config.blockade_radius();
    return config;
}

int BareState::excitation_count() const noexcept { return std::popcount(index); }

std::string BareState::to_string() const {
    std::string bits(static_cast<std::size_t>(n_atoms), '0');
    for (int site = 1; site <= n_atoms; ++site)
        if (excited(site)) bits[static_cast<std::size_t>(site - 1)] = '1';
    return bits;
}

BareState BareState::from_string(std::string_view bits) {
    if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxAtoms))
        throw std::invalid_argument("occupation string length must be in [1, " + std::to_string(kMaxAtoms) + "]");
    BareState state{0, static_cast<int>(bits.size())};
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            state.index |= site_mask(state.n_atoms, static_cast<int>(i) + 1);
        else if (bits[i] != '0')
            throw std::invalid_argument("occupation string may only contain 0 and 1");
    }
    return state;
}

StateVector BareState::as_vector() const {
    StateVector v = StateVector::Zero(Eigen::Index{1} << n_atoms);
    v[index] = 1.0;
    return v;
}

BareState disordered_state(int n_atoms) { return BareState{0, n_atoms}; }

BareState target_state(const ChainConfig& config) {
    config.validate_for_target();
    BareState state{0, config.n_atoms};
    for (int site = 1; site <= config.n_atoms; site += config.order) state.index |= site_mask(config.n_atoms, site);
    return state;
}

std::vector<BareIndex> blockade_basis(int n_atoms, int min_distance) {
    if (n_atoms < 1 || n_atoms > kMaxAtoms) throw std::invalid_argument("blockade_basis: n_atoms out of range");
    if (min_distance < 1) throw std::invalid_argument("blockade_basis: min_distance must be >= 1");
    std::vector<BareIndex> basis;
    const BareIndex dim = BareIndex{1} << n_atoms;
    for (BareIndex b = 0; b < dim; ++b) {
        int last = -min_distance;
        bool allowed = true;
        for (int site = 1; site <= n_atoms && allowed; ++site) {
            if ((b & site_mask(n_atoms, site)) == 0) continue;
            allowed = site - last >= min_distance;
            last = site;
        }
        if (allowed) basis.push_back(b);
    }
    std::stable_sort(basis.begin(), basis.end(), [](BareIndex x, BareIndex y) {
        const int px = std::popcount(x), py = std::popcount(y);
        return px != py ? px < py : x > y;
    });
    return basis;
}

}  // namespace nqn
