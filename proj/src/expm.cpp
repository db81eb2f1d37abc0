#include "nqn/expm.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "nqn/errors.hpp"

namespace nqn {

using cd = std::complex<double>;

long KrylovExponential::apply(const ChainOperator& op, double omega_rad, double delta_rad, double dt, StateVector& psi,
                              double tol, double y_rad) {
    long matvecs = 0;
    if (dt == 0.0) return 0;
    const double sign = dt < 0.0 ? -1.0 : 1.0;
    const double total = std::abs(dt);
    const double norm = op.norm_bound(omega_rad, delta_rad, y_rad);
    // H is constant, so splitting dt into pieces composes exactly; the piece
    // length that worked last time is the first guess.
    // Only pieces that were not clipped by the remaining time are remembered,
    // so a sliver between breakpoints cannot shrink the guess for later calls.
    double piece = last_piece_ > 0.0 ? 2.0 * last_piece_ : total;
    double remaining = total;
    while (remaining > 0.0) {
        const double s = std::min(piece, remaining);
        // Lanczos cannot resolve errors below the rounding floor of |s| * |H|.
        const double piece_tol = std::max(tol * s / total, 2e-13 * (1.0 + s * norm));
        if (try_step(op, omega_rad, delta_rad, y_rad, sign * s, psi, piece_tol, matvecs)) {
            remaining -= s;
            if (remaining <= 1e-15 * total) remaining = 0.0;
            if (s == piece) last_piece_ = piece;
        } else {
            piece = 0.5 * s;
            if (piece < 1e-9 * total) throw ConvergenceError("Krylov exponential did not converge");
        }
    }
    return matvecs;
}

bool KrylovExponential::try_step(const ChainOperator& op, double omega_rad, double delta_rad, double y_rad, double dt,
                                 StateVector& psi, double tol, long& matvecs) {
    const Eigen::Index dim = op.dimension();
    const double beta0 = psi.norm();
    if (beta0 == 0.0) return true;
    const int max_m = static_cast<int>(std::min<Eigen::Index>(max_dim_, dim));
    if (static_cast<int>(basis_.size()) < max_m + 1) basis_.resize(static_cast<std::size_t>(max_m) + 1);

    std::vector<double> alpha, beta;
    alpha.reserve(static_cast<std::size_t>(max_m));
    beta.reserve(static_cast<std::size_t>(max_m));
    basis_[0] = psi / beta0;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    Eigen::VectorXcd coeffs;
    for (int j = 0; j < max_m; ++j) {
        op.apply(omega_rad, delta_rad, basis_[static_cast<std::size_t>(j)], w_, y_rad);
        ++matvecs;
        const double a = basis_[static_cast<std::size_t>(j)].dot(w_).real();
        w_ -= a * basis_[static_cast<std::size_t>(j)];
        if (j > 0) w_ -= beta.back() * basis_[static_cast<std::size_t>(j) - 1];
        alpha.push_back(a);
        const double b = w_.norm();

        const int m = j + 1;
        const bool breakdown = b <= 1e-13 * (std::abs(a) + 1.0);
        // Converged spaces rarely shrink between neighbouring substeps, so skip
        // the small eigenproblem until close to the last successful size.
        if (!breakdown && m < max_m && m < last_m_ - 1) {
            beta.push_back(b);
            basis_[static_cast<std::size_t>(j) + 1] = w_ / b;
            continue;
        }
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                    : Eigen::VectorXd();
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const Eigen::MatrixXd& q = tri.eigenvectors();
        const Eigen::VectorXd& theta = tri.eigenvalues();
        Eigen::VectorXcd phased(m);
        for (int k = 0; k < m; ++k) phased[k] = std::exp(cd(0.0, -dt * theta[k])) * q(0, k);
        coeffs = q.cast<cd>() * phased;

        const double estimate = beta0 * b * std::abs(coeffs[m - 1]);
        if (breakdown || estimate < tol) {
            psi.setZero(dim);
            for (int k = 0; k < m; ++k) psi += (beta0 * coeffs[k]) * basis_[static_cast<std::size_t>(k)];
            last_m_ = m;
            return true;
        }
        if (m == max_m) return false;
        beta.push_back(b);
        basis_[static_cast<std::size_t>(j) + 1] = w_ / b;
    }
    return false;
}

StateVector expm_dense(const HamiltonianMatrix& h, double dt, const StateVector& psi) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    const Eigen::MatrixXd& v = solver.eigenvectors();
    Eigen::VectorXcd amps = v.transpose().cast<cd>() * psi;
    for (Eigen::Index k = 0; k < amps.size(); ++k) amps[k] *= std::exp(cd(0.0, -dt * solver.eigenvalues()[k]));
    return v.cast<cd>() * amps;
}

}  // namespace nqn
