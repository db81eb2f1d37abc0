#include "nqn/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace nqn {

double pair_interaction(int i, int j, const ChainConfig& config) {
    if (i == j) throw std::invalid_argument("pair_interaction: sites must differ");
    if (i < 1 || j < 1 || i > config.n_atoms || j > config.n_atoms)
        throw std::out_of_range("pair_interaction: site outside the chain");
    const double r = std::abs(i - j) * config.spacing_um;
    return config.c6 / std::pow(r, 6);
}

ChainOperator::ChainOperator(const ChainConfig& config) : ChainOperator(config, {}) {}

ChainOperator::ChainOperator(const ChainConfig& config, std::vector<BareIndex> subspace)
    : n_atoms_(config.n_atoms), subspace_(std::move(subspace)) {
    config.validate();
    const bool full = subspace_.empty();
    const auto dim = static_cast<Eigen::Index>(full ? config.dimension() : subspace_.size());
    interaction_.setZero(dim);
    excitations_.setZero(dim);

    std::vector<double> by_distance(static_cast<std::size_t>(n_atoms_), 0.0);
    for (int d = 1; d < n_atoms_; ++d) by_distance[static_cast<std::size_t>(d)] = to_angular(pair_interaction(1, 1 + d, config));

    std::vector<int> sites;
    for (Eigen::Index r = 0; r < dim; ++r) {
        const BareIndex b = full ? static_cast<BareIndex>(r) : subspace_[static_cast<std::size_t>(r)];
        if (b >= config.dimension()) throw std::out_of_range("ChainOperator: bare index outside the chain");
        sites.clear();
        for (int s = 1; s <= n_atoms_; ++s)
            if (b & site_mask(n_atoms_, s)) sites.push_back(s);
        double v = 0.0;
        for (std::size_t x = 0; x < sites.size(); ++x)
            for (std::size_t y = x + 1; y < sites.size(); ++y) v += by_distance[static_cast<std::size_t>(sites[y] - sites[x])];
        interaction_[r] = v;
        excitations_[r] = static_cast<double>(sites.size());
    }
    if (!full) {
        std::vector<Eigen::Index> position(config.dimension(), -1);
        for (Eigen::Index r = 0; r < dim; ++r) {
            const BareIndex b = subspace_[static_cast<std::size_t>(r)];
            if (position[b] >= 0) throw std::invalid_argument("ChainOperator: repeated bare index in subspace");
            position[b] = r;
        }
        for (Eigen::Index r = 0; r < dim; ++r)
            for (int s = 0; s < n_atoms_; ++s) {
                const BareIndex b = subspace_[static_cast<std::size_t>(r)];
                const Eigen::Index c = position[b ^ (BareIndex{1} << s)];
                if (c >= 0 && !(b & (BareIndex{1} << s))) links_.emplace_back(r, c);
            }
    }
    max_interaction_ = interaction_.maxCoeff();
    min_interaction_ = interaction_.minCoeff();
}

void ChainOperator::apply(double omega_rad, double delta_rad, const StateVector& in, StateVector& out,
                          double y_rad) const {
    using cd = std::complex<double>;
    const Eigen::Index dim = dimension();
    out.resize(dim);
    const cd* x = in.data();
    cd* y = out.data();
    const double* w = interaction_.data();
    const double* n = excitations_.data();
    for (Eigen::Index b = 0; b < dim; ++b) y[b] = (w[b] - delta_rad * n[b]) * x[b];
    if (omega_rad == 0.0 && y_rad == 0.0) return;
    // Per flipped site: <1|h|0> = omega/2 + i y, <0|h|1> = omega/2 - i y.
    const cd up(0.5 * omega_rad, y_rad), down(0.5 * omega_rad, -y_rad);
    if (is_subspace()) {
        for (const auto& [r, c] : links_) {
            // links_ are stored with r the less excited end.
            y[c] += up * x[r];
            y[r] += down * x[c];
        }
        return;
    }
    for (Eigen::Index stride = 1; stride < dim; stride <<= 1) {
        for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
            cd* lo = y + base;
            cd* hi = y + base + stride;
            const cd* xlo = x + base;
            const cd* xhi = x + base + stride;
            for (Eigen::Index k = 0; k < stride; ++k) {
                lo[k] += down * xhi[k];
                hi[k] += up * xlo[k];
            }
        }
    }
}

Eigen::VectorXd ChainOperator::diagonal(double delta_rad) const { return interaction_ - delta_rad * excitations_; }

HamiltonianMatrix ChainOperator::dense(double omega_rad, double delta_rad) const {
    const Eigen::Index dim = dimension();
    HamiltonianMatrix h = HamiltonianMatrix::Zero(dim, dim);
    h.diagonal() = diagonal(delta_rad);
    const double half = 0.5 * omega_rad;
    if (is_subspace()) {
        for (const auto& [r, c] : links_) h(r, c) = h(c, r) = half;
        return h;
    }
    for (Eigen::Index b = 0; b < dim; ++b)
        for (int s = 0; s < n_atoms_; ++s) h(b, b ^ (Eigen::Index{1} << s)) = half;
    return h;
}

HamiltonianMatrix ChainOperator::restricted(double omega_rad, double delta_rad, std::span<const BareIndex> basis) const {
    if (is_subspace()) throw std::logic_error("restricted: operator already acts on a subspace");
    const auto m = static_cast<Eigen::Index>(basis.size());
    HamiltonianMatrix h = HamiltonianMatrix::Zero(m, m);
    const double half = 0.5 * omega_rad;
    for (Eigen::Index r = 0; r < m; ++r) {
        const BareIndex b = basis[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(b) >= dimension()) throw std::out_of_range("restricted: bare index outside the chain");
        h(r, r) = interaction_[b] - delta_rad * excitations_[b];
        for (Eigen::Index c = r + 1; c < m; ++c)
            if (std::popcount(b ^ basis[static_cast<std::size_t>(c)]) == 1) h(r, c) = h(c, r) = half;
    }
    return h;
}

std::pair<double, double> ChainOperator::spectral_bounds(double omega_rad, double delta_rad) const {
    const Eigen::VectorXd d = diagonal(delta_rad);
    const double radius = 0.5 * std::abs(omega_rad) * n_atoms_;
    const double lo = d.minCoeff() - radius, hi = d.maxCoeff() + radius;
    return {0.5 * (hi - lo), 0.5 * (hi + lo)};
}

std::vector<BareIndex> blockade_subspace(const ChainConfig& config, double threshold) {
    config.validate();
    int min_distance = 1;
    for (int d = 1; d < config.n_atoms; ++d)
        if (pair_interaction(1, 1 + d, config) >= threshold * config.omega) min_distance = d + 1;
    if (min_distance == 1) return {};
    return blockade_basis(config.n_atoms, min_distance);
}

StateVector to_subspace(const StateVector& full, const std::vector<BareIndex>& subspace) {
    if (subspace.empty()) return full;
    StateVector out(static_cast<Eigen::Index>(subspace.size()));
    for (std::size_t r = 0; r < subspace.size(); ++r) out[static_cast<Eigen::Index>(r)] = full[subspace[r]];
    return out;
}

StateVector from_subspace(const StateVector& reduced, const std::vector<BareIndex>& subspace, int n_atoms) {
    if (subspace.empty()) return reduced;
    StateVector out = StateVector::Zero(Eigen::Index{1} << n_atoms);
    for (std::size_t r = 0; r < subspace.size(); ++r) out[subspace[r]] = reduced[static_cast<Eigen::Index>(r)];
    return out;
}

HamiltonianMatrix build_full(const ChainConfig& config, double omega, double delta, int max_atoms) {
    if (config.n_atoms > max_atoms)
        throw std::length_error("build_full: N = " + std::to_string(config.n_atoms) + " exceeds the dense cap of " +
                                std::to_string(max_atoms));
    return ChainOperator(config).dense(to_angular(omega), to_angular(delta));
}

HamiltonianMatrix build_reduced5(double omega, double delta, double v_nn) {
    const double half = 0.5 * to_angular(omega);
    const double d = to_angular(delta);
    HamiltonianMatrix h = HamiltonianMatrix::Zero(5, 5);
    h.diagonal() << 0.0, -d, -d, -d, -2.0 * d + to_angular(v_nn) / 64.0;
    for (int s = 1; s <= 3; ++s) h(0, s) = h(s, 0) = half;
    h(1, 4) = h(4, 1) = half;
    h(3, 4) = h(4, 3) = half;
    return h;
}

}  // namespace nqn
