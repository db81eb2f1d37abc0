#include "nqn/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace nqn {

int EigenFrame::column_of_label(int label) const {
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) throw std::out_of_range("no column carries label " + std::to_string(label));
    return static_cast<int>(it - labels.begin());
}

EigenFrame eigensystem(const HamiltonianMatrix& h, double t, std::vector<BareIndex> basis) {
    if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("eigensystem: matrix must be square");
    if (!basis.empty() && static_cast<Eigen::Index>(basis.size()) != h.rows())
        throw std::invalid_argument("eigensystem: basis size does not match the matrix");
    const double scale = h.cwiseAbs().maxCoeff();
    const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, scale)) throw std::invalid_argument("eigensystem: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensystem: diagonalisation failed");
    EigenFrame frame;
    frame.t = t;
    frame.values = solver.eigenvalues();
    frame.vectors = solver.eigenvectors();
    frame.scale = scale;
    frame.basis = std::move(basis);
    for (Eigen::Index c = 0; c < frame.vectors.cols(); ++c) {
        for (Eigen::Index r = 0; r < frame.vectors.rows(); ++r) {
            const double x = frame.vectors(r, c);
            if (std::abs(x) > 1e-12) {
                if (x < 0.0) frame.vectors.col(c) *= -1.0;
                break;
            }
        }
    }
    frame.labels.resize(static_cast<std::size_t>(frame.size()));
    std::iota(frame.labels.begin(), frame.labels.end(), 1);
    return frame;
}

std::vector<int> track_adiabatic_labels(const EigenFrame& prev, const EigenFrame& next) {
    if (prev.size() != next.size() || prev.vectors.rows() != next.vectors.rows() || prev.basis != next.basis)
        throw std::invalid_argument("track_adiabatic_labels: frames have different dimensions");
    const Eigen::Index n = next.size();
    const Eigen::MatrixXd overlap = (prev.vectors.transpose() * next.vectors).cwiseAbs();

    // At most three entries per row can exceed 0.5 in magnitude.
    std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> candidates;
    for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index c = 0; c < n; ++c)
            if (overlap(p, c) >= 0.5) candidates.emplace_back(overlap(p, c), p, c);
    std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::tie(std::get<1>(x), std::get<2>(x)) < std::tie(std::get<1>(y), std::get<2>(y));
    });

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    std::vector<bool> prev_used(static_cast<std::size_t>(n), false);
    for (const auto& [value, p, c] : candidates) {
        const auto pi = static_cast<std::size_t>(p), ci = static_cast<std::size_t>(c);
        if (prev_used[pi] || labels[ci] != 0) continue;
        prev_used[pi] = true;
        labels[ci] = prev.labels[pi];
    }
    // Ambiguous leftovers follow energy order.
    std::size_t p = 0;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        if (labels[c] != 0) continue;
        while (prev_used[p]) ++p;
        prev_used[p] = true;
        labels[c] = prev.labels[p];
    }
    return labels;
}

AdiabaticTracker::AdiabaticTracker(const ChainConfig& config, const PulseSchedule& schedule, FrameBasis basis,
                                   double max_delta_step)
    : op_(config), schedule_(schedule), omega_ref_(schedule.envelope().value), max_delta_step_(max_delta_step) {
    if (!(max_delta_step > 0.0)) throw std::invalid_argument("AdiabaticTracker: step must be positive");
    if (basis == FrameBasis::Blockade) basis_ = blockade_basis(config.n_atoms, config.order);
}

EigenFrame AdiabaticTracker::diagonalise(double t) const {
    const ControlPoint c = schedule_.evaluate(t);
    const double omega = to_angular(c.omega), delta = to_angular(c.delta);
    if (basis_.empty()) return eigensystem(op_.dense(omega, delta), t);
    return eigensystem(op_.restricted(omega, delta, basis_), t, basis_);
}

const EigenFrame& AdiabaticTracker::frame_at(double t) {
    if (!started_) {
        current_ = diagonalise(t);
        started_ = true;
        return current_;
    }
    if (t < current_.t) throw std::invalid_argument("AdiabaticTracker: times must be non-decreasing");
    if (t == current_.t) return current_;

    std::vector<double> stops;
    for (double b : schedule_.breakpoints())
        if (b > current_.t && b < t) stops.push_back(b);
    stops.push_back(t);

    double from = current_.t;
    const double step = max_delta_step_ * omega_ref_;
    for (double to : stops) {
        const ControlPoint a = schedule_.evaluate(from), b = schedule_.evaluate(to);
        // Omega may jump at an idle boundary; only the continuous part sets the count.
        const ControlPoint a_in = schedule_.evaluate(std::min(to, from + 1e-12));
        const double change = std::max(std::abs(b.delta - a.delta), std::abs(b.omega - a_in.omega));
        const int pieces = std::max(1, static_cast<int>(std::ceil(change / step)));
        for (int k = 1; k <= pieces; ++k) {
            const double tk = k == pieces ? to : from + (to - from) * k / pieces;
            EigenFrame next = diagonalise(tk);
            next.labels = track_adiabatic_labels(current_, next);
            current_ = std::move(next);
        }
        from = to;
    }
    return current_;
}

std::vector<double> bare_crossings(const ChainConfig& config) {
    return bare_crossings(config, blockade_basis(config.n_atoms, config.order));
}

std::vector<double> bare_crossings(const ChainConfig& config, const std::vector<BareIndex>& basis) {
    const ChainOperator op(config);
    std::vector<double> crossings;
    for (std::size_t x = 0; x < basis.size(); ++x) {
        for (std::size_t y = x + 1; y < basis.size(); ++y) {
            const double kx = op.excitations()[basis[x]], ky = op.excitations()[basis[y]];
            if (kx == ky) continue;
            const double wx = from_angular(op.interaction_diagonal()[basis[x]]);
            const double wy = from_angular(op.interaction_diagonal()[basis[y]]);
            crossings.push_back((wx - wy) / (kx - ky));
        }
    }
    std::sort(crossings.begin(), crossings.end());
    std::vector<double> merged;
    for (double d : crossings) {
        if (!merged.empty() && std::abs(d - merged.back()) <= 1e-9 * std::max(1.0, std::abs(d))) continue;
        merged.push_back(d == 0.0 ? 0.0 : d);
    }
    return merged;
}

namespace {

double lz_exponent_factor(LzConvention convention) {
    return convention == LzConvention::FullCoupling ? 1.0 : 0.25;
}

}  // namespace

double landau_zener(double omega, double rate, LzConvention convention) {
    if (!(rate > 0.0)) throw std::invalid_argument("landau_zener: sweep rate must be positive");
    const double w = to_angular(omega);
    const double r = to_angular(rate);
    return std::exp(-kTwoPi * lz_exponent_factor(convention) * w * w / r);
}

double landau_zener_rate(double omega, double probability, LzConvention convention) {
    if (!(probability > 0.0 && probability < 1.0)) throw std::invalid_argument("landau_zener_rate: need 0 < P < 1");
    const double w = to_angular(omega);
    return from_angular(kTwoPi * lz_exponent_factor(convention) * w * w / -std::log(probability));
}

}  // namespace nqn
