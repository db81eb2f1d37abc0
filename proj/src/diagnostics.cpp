#include "nqn/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace nqn {

namespace {

int atoms_of(const StateVector& psi) {
    const auto size = static_cast<std::uint64_t>(psi.size());
    if (size == 0 || !std::has_single_bit(size)) throw std::invalid_argument("state size is not a power of two");
    return std::countr_zero(size);
}

}  // namespace

double fidelity(const StateVector& psi, const BareState& target) {
    if (psi.size() != (Eigen::Index{1} << target.n_atoms)) throw std::invalid_argument("fidelity: dimension mismatch");
    return std::norm(psi[target.index]);
}

Eigen::VectorXd bare_projections(const StateVector& psi) { return psi.cwiseAbs2(); }

std::vector<double> bare_projections(const StateVector& psi, std::span<const BareIndex> subset) {
    std::vector<double> out;
    out.reserve(subset.size());
    for (BareIndex b : subset) {
        if (static_cast<Eigen::Index>(b) >= psi.size()) throw std::out_of_range("bare_projections: index outside state");
        out.push_back(std::norm(psi[b]));
    }
    return out;
}

int AdiabaticProjection::dominant_label() const {
    const auto it = std::max_element(by_label.begin(), by_label.end());
    return static_cast<int>(it - by_label.begin()) + 1;
}

AdiabaticProjection adiabatic_projections(const StateVector& psi, const EigenFrame& frame, bool per_frame_order) {
    const Eigen::Index n = frame.size();
    StateVector local;
    if (frame.restricted()) {
        local.resize(static_cast<Eigen::Index>(frame.basis.size()));
        for (std::size_t r = 0; r < frame.basis.size(); ++r) {
            if (static_cast<Eigen::Index>(frame.basis[r]) >= psi.size())
                throw std::invalid_argument("adiabatic_projections: dimension mismatch");
            local[static_cast<Eigen::Index>(r)] = psi[frame.basis[r]];
        }
    } else {
        if (frame.vectors.rows() != psi.size()) throw std::invalid_argument("adiabatic_projections: dimension mismatch");
        local = psi;
    }
    const Eigen::VectorXd weights = (frame.vectors.transpose().cast<std::complex<double>>() * local).cwiseAbs2();

    AdiabaticProjection out;
    out.by_label.assign(static_cast<std::size_t>(n), 0.0);
    out.block_weight.assign(static_cast<std::size_t>(n), 0.0);
    out.degenerate.assign(static_cast<std::size_t>(n), false);

    const double scale = std::max(frame.scale, frame.values.cwiseAbs().maxCoeff());
    const double gap_tol = 1e-9 * std::max(scale, 1e-300);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && frame.values[end] - frame.values[end - 1] <= gap_tol) ++end;
        double block = 0.0;
        for (Eigen::Index c = start; c < end; ++c) block += weights[c];
        for (Eigen::Index c = start; c < end; ++c) {
            const int label = per_frame_order ? static_cast<int>(c) + 1 : frame.labels[static_cast<std::size_t>(c)];
            const auto li = static_cast<std::size_t>(label - 1);
            out.by_label[li] = weights[c];
            out.block_weight[li] = block;
            out.degenerate[li] = end - start > 1;
        }
        out.total += block;
        start = end;
    }
    return out;
}

std::vector<double> local_occupations(const StateVector& psi) {
    const int n = atoms_of(psi);
    std::vector<double> occ(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index b = 0; b < psi.size(); ++b) {
        const double p = std::norm(psi[b]);
        if (p == 0.0) continue;
        for (int site = 1; site <= n; ++site)
            if (static_cast<BareIndex>(b) & site_mask(n, site)) occ[static_cast<std::size_t>(site - 1)] += p;
    }
    return occ;
}

OrderParameter order_parameter(const StateVector& psi) {
    const std::vector<double> occ = local_occupations(psi);
    OrderParameter out;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        out.n_tot += occ[i];
        // site i + 1 is odd when i is even
        out.delta_s += (i % 2 == 0) ? occ[i] : -occ[i];
    }
    return out;
}

double measured_fidelity(double ideal, int n_atoms, double per_atom_error) {
    if (n_atoms < 1 || n_atoms % 2 == 0) throw std::invalid_argument("measured_fidelity: N must be odd");
    if (per_atom_error < 0.0 || per_atom_error > 1.0) throw std::invalid_argument("measured_fidelity: error rate outside [0, 1]");
    return ideal * std::pow(1.0 - per_atom_error, (n_atoms + 1) / 2);
}

ObservableSet observe(const StateVector& psi, const BareState& target, const EigenFrame* frame) {
    ObservableSet out;
    out.fidelity = fidelity(psi, target);
    out.lambda = bare_projections(psi);
    if (frame) out.gamma = adiabatic_projections(psi, *frame);
    out.local_n = local_occupations(psi);
    const OrderParameter op = order_parameter(psi);
    out.delta_s = op.delta_s;
    out.n_tot = op.n_tot;
    return out;
}

ObservableEvaluator::ObservableEvaluator(const ChainConfig& config, const PulseSchedule& schedule,
                                         std::vector<std::string> names, FrameBasis frame_basis)
    : n_atoms_(config.n_atoms) {
    if ((config.n_atoms - 1) % config.order == 0) target_ = target_state(config);
    bool wants_gamma = false;
    for (const std::string& name : names) {
        if (name == "F") {
            if (!target_) throw std::invalid_argument("observable F needs n_atoms = 1 (mod order)");
            plan_.push_back({Kind::Fidelity});
            columns_.push_back(name);
        } else if (name == "Lambda_I") {
            plan_.push_back({Kind::Lambda, 0});
            columns_.push_back(name);
        } else if (name.starts_with("Lambda_")) {
            const BareState b = BareState::from_string(name.substr(7));
            if (b.n_atoms != n_atoms_) throw std::invalid_argument("observable " + name + " has the wrong length");
            plan_.push_back({Kind::Lambda, b.index});
            columns_.push_back(name);
        } else if (name == "DeltaS") {
            plan_.push_back({Kind::DeltaS});
            columns_.push_back(name);
        } else if (name == "n_tot") {
            plan_.push_back({Kind::NTot});
            columns_.push_back(name);
        } else if (name == "n_local") {
            for (int i = 1; i <= n_atoms_; ++i) {
                plan_.push_back({Kind::Site, 0, i});
                columns_.push_back("n_" + std::to_string(i));
            }
        } else if (name == "Gamma_max" || name == "Gamma_argmax") {
            plan_.push_back({name == "Gamma_max" ? Kind::GammaMax : Kind::GammaArgmax});
            columns_.push_back(name);
            wants_gamma = true;
        } else if (name.starts_with("Gamma_")) {
            std::size_t used = 0;
            int label = 0;
            try {
                label = std::stoi(name.substr(6), &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != name.size() - 6 || label < 1)
                throw std::invalid_argument("unknown observable: " + name);
            plan_.push_back({Kind::Gamma, 0, label});
            columns_.push_back(name);
            wants_gamma = true;
        } else {
            throw std::invalid_argument("unknown observable: " + name);
        }
    }
    if (wants_gamma) tracker_ = std::make_unique<AdiabaticTracker>(config, schedule, frame_basis);
}

std::vector<double> ObservableEvaluator::evaluate(double t, const StateVector& psi) {
    std::vector<double> row;
    row.reserve(plan_.size());
    std::vector<double> occ;
    std::optional<AdiabaticProjection> gamma;
    for (const Column& col : plan_) {
        if ((col.kind == Kind::DeltaS || col.kind == Kind::NTot || col.kind == Kind::Site) && occ.empty())
            occ = local_occupations(psi);
        if ((col.kind == Kind::Gamma || col.kind == Kind::GammaMax || col.kind == Kind::GammaArgmax) && !gamma)
            gamma = adiabatic_projections(psi, tracker_->frame_at(t));
        switch (col.kind) {
            case Kind::Fidelity: row.push_back(fidelity(psi, *target_)); break;
            case Kind::Lambda: row.push_back(std::norm(psi[col.bare])); break;
            case Kind::DeltaS: {
                double s = 0.0;
                for (std::size_t i = 0; i < occ.size(); ++i) s += (i % 2 == 0) ? occ[i] : -occ[i];
                row.push_back(s);
                break;
            }
            case Kind::NTot: {
                double s = 0.0;
                for (double x : occ) s += x;
                row.push_back(s);
                break;
            }
            case Kind::Site: row.push_back(occ[static_cast<std::size_t>(col.index - 1)]); break;
            case Kind::Gamma:
                row.push_back(col.index <= static_cast<int>(gamma->by_label.size()) ? gamma->gamma(col.index) : 0.0);
                break;
            case Kind::GammaMax:
                row.push_back(*std::max_element(gamma->by_label.begin(), gamma->by_label.end()));
                break;
            case Kind::GammaArgmax: row.push_back(gamma->dominant_label()); break;
        }
    }
    return row;
}

}  // namespace nqn
