#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/poly.hpp"
#include "kads/tridiagonal.hpp"

namespace kads {

struct AngularPotentialParts {
    double H = 0;
    double G = 0;
    double G_tilde = 0;
};

namespace detail {
inline void check_angle(double theta) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) throw DomainError("angular potential evaluated at a pole");
}
} // namespace detail

/// G_m(θ) of the Sturm–Liouville form  −λS = (1/sinθ)(Δ_θ sinθ S′)′ − G_m S.
/// The H and cot terms are grouped as Ξ²(H − 2cotθ)²/Δ_θ, with m + 2cosθ written
/// as (m − 2) + 4cos²(θ/2) so nothing cancels at the poles.
inline double angular_potential(const Geometry& g, int m, double theta) {
    detail::check_angle(theta);
    const double a = g.params.a, k = g.params.k, Xi = g.Xi, w = g.omega_plus;
    const double a2k2 = a * a * k * k;
    const double s = std::sin(theta), c = std::cos(theta);
    const double ch = std::cos(0.5 * theta);
    const double dt = 1.0 - a2k2 * c * c;
    const double mc = (double(m) - 2.0) + 4.0 * ch * ch;
    const double hm = double(m) * a * w * s - mc / s;
    return Xi * Xi * hm * hm / dt + 2.0 * dt + 2.0 * a2k2 + 8.0 * Xi * m * c * (a2k2 + Xi * a * w) / dt;
}

inline AngularPotentialParts angular_parts(const Geometry& g, int m, double theta) {
    detail::check_angle(theta);
    const double s = std::sin(theta);
    const double dt = delta_theta(g.params, theta);
    AngularPotentialParts out;
    out.H = double(m) * (g.params.a * g.omega_plus * s - 1.0 / s);
    out.G = angular_potential(g, m, theta);
    const double m2 = double(m) * m;
    out.G_tilde = dt * s * s / (g.Xi * g.Xi) * (out.G / m2 - g.Xi * g.Xi * out.H * out.H / (dt * m2));
    return out;
}

/// G_m recovered from the factorized operator √Δ_θ 𝓛†₋₁ √Δ_θ 𝓛₂ + (−6aΞω₊m cosθ + 6a²k²cos²θ)
/// by collecting its zero-order coefficient with jets.
inline double angular_potential_factorized(const Geometry& g, int m, double theta) {
    detail::check_angle(theta);
    using J = Jet<double>;
    const double a = g.params.a, k = g.params.k, Xi = g.Xi, w = g.omega_plus;
    const J th = J::variable(theta);
    const J s = sin(th), c = cos(th);
    const J dt = 1.0 - (a * a * k * k) * c * c;
    const J H = double(m) * ((a * w) * s - 1.0 / s);
    const J L = log(sqrt(dt) * s);
    const J xh = Xi * H / dt;
    // α = −ΞH/Δθ + 2L′,  β = ΞH/Δθ − L′
    const double alpha = -xh.v + 2.0 * L.d;
    const double alpha_d = -xh.d + 2.0 * L.dd;
    const double beta = xh.v - L.d;
    const J sq = sqrt(dt);
    const double zero_order = sq.v * sq.d * alpha + dt.v * alpha_d + dt.v * alpha * beta;
    const double extra = -6.0 * a * Xi * w * m * c.v + 6.0 * a * a * k * k * c.v * c.v;
    return -zero_order - extra;
}

inline double limit_target(const Geometry& g) {
    const double t = g.Xi * (1.0 - g.params.a * g.omega_plus);
    return t * t;
}

/// Ξ²(ω₊/k)² + Ξ²(kr₊²−a)(kr₊²+a)/(k²(r₊²+a²)²): the split form of the same target.
inline double limit_target_split(const Geometry& g) {
    const double a = g.params.a, k = g.params.k, rp2 = g.r_plus * g.r_plus;
    const double X2 = g.Xi * g.Xi;
    const double q = k * (rp2 + a * a);
    return X2 * (g.omega_plus / k) * (g.omega_plus / k) + X2 * (k * rp2 - a) * (k * rp2 + a) / (q * q);
}

inline double lambda_tilde(const Geometry& g, int m, double lambda) {
    const double a = g.params.a, k = g.params.k;
    const double t = g.Xi * g.omega_plus * m / k;
    return lambda - 2.0 - a * a * k * k - t * t;
}

struct AngularOptions {
    int resolution = 1024;          // coarse grid; the fine grid doubles it
    double max_rel_error = 1e-3;    // Richardson error estimate must stay below this
    int window_threshold = 500;     // |m| above which the grid is confined around θ = π/2
    double window_width = 30.0;     // half-width in units of |m|^{-1/2}
};

struct AngularEigenpair {
    int m = 0;
    int ell = 0;
    double lambda = 0;        // Richardson-extrapolated eigenvalue
    double lambda_grid = 0;   // eigenvalue of the fine-grid operator
    double error_estimate = 0;
    std::vector<double> theta;
    std::vector<double> S;
    std::vector<double> weights;   // sinθ h: ∫ f sinθ dθ ≈ Σ f_i w_i
};

/// Cell-centred finite-volume discretization of the angular operator on [θa, θb].
/// Faces carry p = Δ_θ sinθ; at a pole p = 0, which is the regularity condition.
/// Interior window edges (θa > 0 or θb < π) use Dirichlet data.
struct AngularGrid {
    double theta_a = 0, theta_b = std::numbers::pi, h = 0;
    std::vector<double> theta, sin_theta, G, p_face;  // p_face has n+1 entries
    SymTridiag T;
};

inline AngularGrid angular_grid(const Geometry& g, int m, int n, double theta_a, double theta_b) {
    AngularGrid A;
    A.theta_a = theta_a;
    A.theta_b = theta_b;
    A.h = (theta_b - theta_a) / n;
    A.theta.resize(n);
    A.sin_theta.resize(n);
    A.G.resize(n);
    A.p_face.resize(n + 1);
    for (int i = 0; i < n; ++i) {
        A.theta[i] = theta_a + (i + 0.5) * A.h;
        A.sin_theta[i] = std::sin(A.theta[i]);
        A.G[i] = angular_potential(g, m, A.theta[i]);
    }
    for (int i = 0; i <= n; ++i) {
        const double tf = theta_a + i * A.h;
        A.p_face[i] = delta_theta(g.params, tf) * std::sin(tf);
    }
    const bool pole_a = theta_a <= 0.0, pole_b = theta_b >= std::numbers::pi;
    if (pole_a) A.p_face[0] = 0.0;
    if (pole_b) A.p_face[n] = 0.0;
    const double h2 = A.h * A.h;
    A.T.d.resize(n);
    A.T.e.resize(n - 1);
    for (int i = 0; i < n; ++i) {
        double left = A.p_face[i], right = A.p_face[i + 1];
        if (i == 0 && !pole_a) left *= 2.0;
        if (i == n - 1 && !pole_b) right *= 2.0;
        A.T.d[i] = (left + right) / (h2 * A.sin_theta[i]) + A.G[i];
    }
    for (int i = 0; i + 1 < n; ++i)
        A.T.e[i] = -A.p_face[i + 1] / (h2 * std::sqrt(A.sin_theta[i] * A.sin_theta[i + 1]));
    return A;
}

inline void angular_window(const Geometry&, int m, const AngularOptions& opt, double& ta, double& tb) {
    ta = 0.0;
    tb = std::numbers::pi;
    if (std::abs(m) > opt.window_threshold) {
        const double w = std::min(0.5 * std::numbers::pi, opt.window_width / std::sqrt(double(std::abs(m))));
        if (w < 0.5 * std::numbers::pi) {
            ta = 0.5 * std::numbers::pi - w;
            tb = 0.5 * std::numbers::pi + w;
        }
    }
}

inline std::vector<AngularEigenpair> solve_angular(const Geometry& g, int m, int n_eigs, const AngularOptions& opt = {}) {
    if (std::abs(m) < 2) throw DomainError("angular solve requires |m| >= 2");
    if (n_eigs < 1) throw DomainError("n_eigs must be >= 1");
    const int n1 = opt.resolution;
    if (n1 < 16 || (n1 & (n1 - 1)) != 0) throw DomainError("angular resolution must be a power of two >= 16");
    if (n_eigs > n1 / 4) throw ResolutionTooCoarse("too many eigenvalues requested for the grid");

    double ta, tb;
    angular_window(g, m, opt, ta, tb);
    const AngularGrid coarse = angular_grid(g, m, n1, ta, tb);
    const AngularGrid fine = angular_grid(g, m, 2 * n1, ta, tb);

    std::vector<AngularEigenpair> out;
    const int ell0 = std::max(2, std::abs(m));
    for (int j = 0; j < n_eigs; ++j) {
        const double l1 = kth_eigenvalue(coarse.T, j);
        const double l2 = kth_eigenvalue(fine.T, j);
        AngularEigenpair e;
        e.m = m;
        e.ell = ell0 + j;
        e.lambda = (4.0 * l2 - l1) / 3.0;
        e.lambda_grid = l2;
        e.error_estimate = std::abs(l2 - l1) / 3.0;
        if (!std::isfinite(e.lambda)) throw NonConvergence("angular eigenvalue not finite");
        if (e.error_estimate > opt.max_rel_error * std::max(1.0, std::abs(e.lambda)))
            throw ResolutionTooCoarse("angular Richardson error estimate above tolerance");
        const std::vector<double> v = eigenvector(fine.T, l2);
        const std::size_t n = v.size();
        e.theta = fine.theta;
        e.S.resize(n);
        e.weights.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            e.weights[i] = fine.sin_theta[i] * fine.h;
            e.S[i] = v[i] / std::sqrt(e.weights[i]);
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<AngularEigenpair> solve_angular(const BlackHoleParams& p, int m, int n_eigs, const AngularOptions& opt = {}) {
    return solve_angular(derive_geometry(p), m, n_eigs, opt);
}

/// λ_{m|m|}, the fundamental eigenvalue, without eigenvector work.
inline double fundamental_lambda(const Geometry& g, int m, const AngularOptions& opt = {}) {
    if (std::abs(m) < 2) throw DomainError("angular solve requires |m| >= 2");
    double ta, tb;
    angular_window(g, m, opt, ta, tb);
    const double l1 = kth_eigenvalue(angular_grid(g, m, opt.resolution, ta, tb).T, 0);
    const double l2 = kth_eigenvalue(angular_grid(g, m, 2 * opt.resolution, ta, tb).T, 0);
    const double lam = (4.0 * l2 - l1) / 3.0;
    if (std::abs(l2 - l1) / 3.0 > opt.max_rel_error * std::max(1.0, std::abs(lam)))
        throw ResolutionTooCoarse("angular Richardson error estimate above tolerance");
    return lam;
}

inline double fundamental_ratio(const Geometry& g, int m, const AngularOptions& opt = {}) {
    return fundamental_lambda(g, m, opt) / (double(m) * m);
}

/// Discrete Rayleigh quotient of grid samples in the finite-volume inner product;
/// equals lambda_grid for the computed eigenvector.
inline double discrete_rayleigh(const Geometry& g, const AngularEigenpair& e) {
    const std::size_t n = e.S.size();
    const double h = e.theta[1] - e.theta[0];
    const double ta = e.theta.front() - 0.5 * h, tb = e.theta.back() + 0.5 * h;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += angular_potential(g, e.m, e.theta[i]) * e.S[i] * e.S[i] * e.weights[i];
        den += e.S[i] * e.S[i] * e.weights[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double tf = e.theta[i] + 0.5 * h;
        const double p = delta_theta(g.params, tf) * std::sin(tf);
        const double dS = e.S[i + 1] - e.S[i];
        num += p * dS * dS / h;
    }
    const bool pole_a = ta <= 1e-12, pole_b = tb >= std::numbers::pi - 1e-12;
    if (!pole_a) num += 2.0 * delta_theta(g.params, ta) * std::sin(ta) * e.S.front() * e.S.front() / h;
    if (!pole_b) num += 2.0 * delta_theta(g.params, tb) * std::sin(tb) * e.S.back() * e.S.back() / h;
    return num / den;
}

/// Continuous Rayleigh functional ∫(Δ_θ S′² + G S²) sinθ / ∫ S² sinθ on [lo, hi] for a trial S.
inline double rayleigh_functional(const Geometry& g, int m, const std::function<double(double)>& S,
                                  const std::function<double(double)>& dS, double lo, double hi) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto num_f = [&](double t) {
        const double s = S(t), d = dS(t);
        return (delta_theta(g.params, t) * d * d + angular_potential(g, m, t) * s * s) * std::sin(t);
    };
    auto den_f = [&](double t) {
        const double s = S(t);
        return s * s * std::sin(t);
    };
    const double num = GK::integrate(num_f, lo, hi, 15, 1e-13);
    const double den = GK::integrate(den_f, lo, hi, 15, 1e-13);
    return num / den;
}

struct HatBound {
    double h = 0;
    double rayleigh = 0;      // Rayleigh quotient of the hat trial function
    double closed_form = 0;   // 3/(h² sin(π/2−h)) + G(π/2) + sup_{|θ−π/2|<h}(G − G(π/2))
};

/// Upper bounds on λ_{m|m|} from the hat trial function of width h = |m|^{-1/2}.
inline HatBound hat_upper_bound(const Geometry& g, int m) {
    const double c = 0.5 * std::numbers::pi;
    HatBound b;
    b.h = 1.0 / std::sqrt(double(std::abs(m)));
    const double h = b.h;
    auto left = [&](double t) { return t - (c - h); };
    auto right = [&](double t) { return (c + h) - t; };
    auto one = [](double) { return 1.0; };
    auto mone = [](double) { return -1.0; };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto part = [&](auto&& S, auto&& dS, double lo, double hi, double& num, double& den) {
        num += GK::integrate([&](double t) {
            const double s = S(t), d = dS(t);
            return (delta_theta(g.params, t) * d * d + angular_potential(g, m, t) * s * s) * std::sin(t);
        }, lo, hi, 15, 1e-13);
        den += GK::integrate([&](double t) { const double s = S(t); return s * s * std::sin(t); }, lo, hi, 15, 1e-13);
    };
    double num = 0, den = 0;
    part(left, one, c - h, c, num, den);
    part(right, mone, c, c + h, num, den);
    b.rayleigh = num / den;

    const double g0 = angular_potential(g, m, c);
    double sup = 0;
    for (int i = 0; i <= 2000; ++i) {
        const double t = c - h + 2.0 * h * i / 2000.0;
        if (t <= 0 || t >= std::numbers::pi) continue;
        sup = std::max(sup, angular_potential(g, m, t) - g0);
    }
    b.closed_form = 3.0 / (h * h * std::sin(c - h)) + g0 + sup;
    return b;
}

} // namespace kads
