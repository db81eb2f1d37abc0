#include "nqn/scanner.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

#include "nqn/diagnostics.hpp"
#include "nqn/errors.hpp"
#include "nqn/hamiltonian.hpp"

namespace nqn {

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::Disordered: return "disordered";
        case Phase::Z2: return "Z2";
        case Phase::Z3: return "Z3";
        case Phase::Z4: return "Z4";
        case Phase::Other: return "other";
    }
    return "other";
}

GroundState ground_state(const ChainConfig& config, double delta) {
    const HamiltonianMatrix h = build_full(config, config.omega, delta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw ConvergenceError("ground_state: eigensolver failed");
    const Eigen::VectorXd& e = solver.eigenvalues();
    const double norm = std::max(std::abs(e[0]), std::abs(e[e.size() - 1]));

    GroundState g;
    g.energy = e[0];
    while (g.multiplicity < e.size() && e[g.multiplicity] - e[0] < 1e-9 * norm) ++g.multiplicity;
    g.degenerate = g.multiplicity > 1;
    g.state = solver.eigenvectors().col(0).cast<std::complex<double>>();

    g.occupations.assign(static_cast<std::size_t>(config.n_atoms), 0.0);
    for (int k = 0; k < g.multiplicity; ++k) {
        const std::vector<double> occ = local_occupations(solver.eigenvectors().col(k).cast<std::complex<double>>());
        for (std::size_t i = 0; i < occ.size(); ++i) g.occupations[i] += occ[i] / g.multiplicity;
    }
    const Eigen::VectorXd v = solver.eigenvectors().col(0);
    g.residual = (h * v - e[0] * v).norm() / std::max(norm, 1e-300);
    return g;
}

double structure_factor(const std::vector<double>& occupations, double q) {
    std::complex<double> sum = 0.0;
    for (std::size_t j = 0; j < occupations.size(); ++j)
        sum += std::polar(occupations[j], q * static_cast<double>(j + 1));
    const auto n = static_cast<double>(occupations.size());
    return std::norm(sum) / (n * n);
}

std::array<double, 3> ordering_wavevectors() {
    constexpr double pi = std::numbers::pi;
    return {pi, 2.0 * pi / 3.0, pi / 2.0};
}

PhasePoint classify_phase(const std::vector<double>& occupations, double min_strength, double min_filling,
                          double harmonic_ratio) {
    PhasePoint p;
    if (occupations.empty()) return p;
    const std::array<double, 3> qs = ordering_wavevectors();
    double n_tot = 0.0;
    for (double n : occupations) n_tot += n;
    p.filling = n_tot / static_cast<double>(occupations.size());
    int strongest = 0;
    for (int k = 0; k < 3; ++k) {
        p.s[static_cast<std::size_t>(k)] = structure_factor(occupations, qs[static_cast<std::size_t>(k)]);
        if (p.s[static_cast<std::size_t>(k)] > p.s[static_cast<std::size_t>(strongest)]) strongest = k;
    }
    p.order_strength = p.s[static_cast<std::size_t>(strongest)];
    if (p.filling <= min_filling || p.order_strength <= min_strength) {
        p.label = Phase::Disordered;
        return p;
    }
    int chosen = strongest;
    // Longer periods come later in the list.
    for (int k = 2; k > strongest; --k) {
        const double s = p.s[static_cast<std::size_t>(k)];
        if (s > min_strength && s >= harmonic_ratio * p.order_strength) {
            chosen = k;
            break;
        }
    }
    p.label = kOrderedPhases[static_cast<std::size_t>(chosen)];
    return p;
}

PhasePoint classify_phase(const StateVector& state) { return classify_phase(local_occupations(state)); }

ScanGrid ScanGrid::parse(const std::string& text) {
    ScanGrid g;
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw ConfigError("grid", "expected \"dmin:dmax:steps,rmin:rmax:steps\"");
    auto axis = [](const std::string& part, double& lo, double& hi, int& steps) {
        std::istringstream in(part);
        char c1 = 0, c2 = 0;
        double steps_value = 0.0;
        if (!(in >> lo >> c1 >> hi >> c2 >> steps_value) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
            throw ConfigError("grid", "cannot parse axis \"" + part + "\"");
        if (steps_value < 1.0 || steps_value != std::floor(steps_value) || steps_value > 1e6)
            throw ConfigError("grid", "steps must be a positive integer in \"" + part + "\"");
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
            throw ConfigError("grid", "need min <= max in \"" + part + "\"");
        steps = static_cast<int>(steps_value);
    };
    axis(text.substr(0, comma), g.delta_min, g.delta_max, g.delta_steps);
    axis(text.substr(comma + 1), g.rb_min, g.rb_max, g.rb_steps);
    if (!(g.rb_min > 0.0)) throw ConfigError("grid", "R_b / a must be positive");
    return g;
}

std::string ScanGrid::to_string() const {
    std::ostringstream out;
    out << std::setprecision(17) << delta_min << ':' << delta_max << ':' << delta_steps << ',' << rb_min << ':'
        << rb_max << ':' << rb_steps;
    return out.str();
}

double ScanGrid::delta_at(int i) const {
    return delta_steps == 1 ? delta_min : delta_min + (delta_max - delta_min) * i / (delta_steps - 1);
}

double ScanGrid::rb_at(int j) const {
    return rb_steps == 1 ? rb_min : rb_min + (rb_max - rb_min) * j / (rb_steps - 1);
}

std::vector<PhasePoint> scan(const ScanGrid& grid, const ChainConfig& config, int threads) {
    if (grid.delta_steps < 1 || grid.rb_steps < 1) throw ConfigError("grid", "grid is empty");
    if (!(grid.rb_min > 0.0)) throw ConfigError("grid", "R_b / a must be positive");
    config.validate();
    std::vector<PhasePoint> points(grid.size());
    const double rb = config.blockade_radius();

    auto run = [&](std::size_t k) {
        const int j = static_cast<int>(k / static_cast<std::size_t>(grid.delta_steps));
        const int i = static_cast<int>(k % static_cast<std::size_t>(grid.delta_steps));
        ChainConfig c = config;
        c.spacing_um = rb / grid.rb_at(j);
        const double delta = grid.delta_at(i) * config.omega;
        const GroundState g = ground_state(c, delta);
        PhasePoint p = classify_phase(g.occupations);
        p.delta_over_omega = grid.delta_at(i);
        p.rb_over_a = grid.rb_at(j);
        p.degenerate = g.degenerate;
        points[k] = p;
    };

    const int workers = std::max(1, std::min<int>(threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads,
                                                  static_cast<int>(points.size())));
    if (workers == 1) {
        for (std::size_t k = 0; k < points.size(); ++k) run(k);
        return points;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t k = next++; k < points.size(); k = next++) run(k);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
                next = points.size();
            }
        });
    for (std::thread& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return points;
}

void write_phase_map(std::ostream& out, const std::vector<PhasePoint>& points) {
    out << "delta_over_omega,rb_over_a,label,order_strength\n";
    out << std::setprecision(12);
    for (const PhasePoint& p : points)
        out << p.delta_over_omega << ',' << p.rb_over_a << ',' << to_string(p.label) << ',' << p.order_strength
            << '\n';
}

}  // namespace nqn
