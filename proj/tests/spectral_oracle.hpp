#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include "kads/angular.hpp"

namespace kads::testing {

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const double p = boost::math::legendre_p(n, z), dp = boost::math::legendre_p_prime(n, z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = z;
        const double dp = boost::math::legendre_p_prime(n, z);
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

/// Rayleigh–Ritz eigenvalues of the angular operator in the pole-adapted basis
/// (sin θ/2)^{|m+2|}(cos θ/2)^{|m−2|} Pₙ(cos θ), n < n_basis. The potential is the
/// factorized form, so this shares no code with the finite-volume solver.
inline std::vector<double> spectral_angular(const Geometry& g, int m, int n_basis = 24, int n_quad = 240) {
    std::vector<double> xs, ws;
    gauss_legendre(n_quad, xs, ws);
    const double al = std::abs(m + 2), be = std::abs(m - 2);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_basis, n_basis), B = A;
    std::vector<double> phi(n_basis), dphi(n_basis);
    for (int q = 0; q < n_quad; ++q) {
        const double x = xs[q], th = std::acos(x), st = std::sin(th);
        const double sh = std::sin(0.5 * th), ch = std::cos(0.5 * th);
        const double env = std::pow(sh, al) * std::pow(ch, be);
        const double denv = env * (0.5 * al * ch / sh - 0.5 * be * sh / ch);
        for (int n = 0; n < n_basis; ++n) {
            const double P = boost::math::legendre_p(n, x), dP = boost::math::legendre_p_prime(n, x);
            phi[n] = env * P;
            dphi[n] = denv * P - env * dP * st;
        }
        const double D = delta_theta(g.params, th), G = angular_potential_factorized(g, m, th);
        for (int i = 0; i < n_basis; ++i)
            for (int j = 0; j <= i; ++j) {
                A(i, j) += ws[q] * (D * dphi[i] * dphi[j] + G * phi[i] * phi[j]);
                B(i, j) += ws[q] * phi[i] * phi[j];
            }
    }
    A = A.selfadjointView<Eigen::Lower>();
    B = B.selfadjointView<Eigen::Lower>();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    const auto& ev = es.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

} // namespace kads::testing
