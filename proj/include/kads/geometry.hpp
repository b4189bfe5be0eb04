#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "kads/errors.hpp"
#include "kads/poly.hpp"

namespace kads {

struct BlackHoleParams {
    double M = 1.0;
    double a = 0.0;
    double k = 1.0;
};

inline std::string describe(const BlackHoleParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "(M=" << p.M << ", a=" << p.a << ", k=" << p.k << ")";
    return os.str();
}

/// Δ(r) = (r²+a²)(1+k²r²) − 2Mr, ascending coefficients.
inline Poly<double> delta_poly(const BlackHoleParams& p) {
    const double a2 = p.a * p.a, k2 = p.k * p.k;
    return Poly<double>{a2, -2.0 * p.M, 1.0 + a2 * k2, 0.0, k2};
}

struct DeltaDerivs {
    double d0, d1, d2, d3;
};

inline DeltaDerivs background_polys(const BlackHoleParams& p, double r) {
    const double a2 = p.a * p.a, k2 = p.k * p.k, b = 1.0 + a2 * k2;
    return {((k2 * r * r + b) * r - 2.0 * p.M) * r + a2, (4.0 * k2 * r * r + 2.0 * b) * r - 2.0 * p.M,
            12.0 * k2 * r * r + 2.0 * b, 24.0 * k2 * r};
}

inline double delta_theta(const BlackHoleParams& p, double theta) {
    const double c = std::cos(theta);
    return 1.0 - p.a * p.a * p.k * p.k * c * c;
}

struct Geometry {
    BlackHoleParams params;
    double r_plus = 0, r_minus = 0;
    double Xi = 1, omega_plus = 0, eps = 0;
    Poly<double> delta;       // Δ(r)
    double ddelta_plus = 0;   // ∂ᵣΔ(r₊)
    double kappa = 0;         // ∂ᵣΔ(r₊)/(2(r₊²+a²)): near-horizon rate in r★
    cplx r_complex;           // one of the conjugate pair of non-real roots
    // residue of (r²+a²)/Δ at each root
    double A_plus = 0, A_minus = 0;
    cplx A_complex;
    // y = 1/r forms: D̂(y) = y⁴Δ(1/y) = (1 − r₊y) Q̂(y)
    Poly<double> Dhat, Qhat;
};

inline double hr_gap(const BlackHoleParams& p, double r_plus) {
    return (p.a - p.k * r_plus * r_plus) / (p.k * (r_plus * r_plus + p.a * p.a));
}

namespace detail {

inline double newton_polish(const Poly<double>& f, double x) {
    const Poly<double> df = f.derivative();
    for (int it = 0; it < 8; ++it) {
        const double d = df(x);
        if (d == 0.0) break;
        const double step = f(x) / d;
        x -= step;
        if (std::abs(step) <= 1e-17 * std::abs(x)) break;
    }
    return x;
}

} // namespace detail

inline Geometry derive_geometry(const BlackHoleParams& p) {
    if (!(p.M > 0) || !(p.a >= 0) || !(p.k > 0) || !std::isfinite(p.M) || !std::isfinite(p.a) ||
        !std::isfinite(p.k))
        throw Inadmissible("parameters must satisfy M > 0, a >= 0, k > 0: " + describe(p));
    if (p.a * p.k >= 1.0) throw Inadmissible("a k >= 1: " + describe(p));

    Geometry g;
    g.params = p;
    g.delta = delta_poly(p);

    std::vector<double> real_roots;
    for (const cplx& z : poly_roots(g.delta)) {
        const double scale = 1.0 + std::abs(z);
        if (std::abs(z.imag()) <= 1e-6 * scale && z.real() >= -1e-9 * scale) real_roots.push_back(z.real());
    }
    if (p.a == 0.0) {
        // Δ = r (k²r³ + r − 2M): r = 0 is exact, keep it out of the numerics
        std::erase_if(real_roots, [](double x) { return std::abs(x) < 1e-6; });
        real_roots.push_back(0.0);
    }
    std::sort(real_roots.begin(), real_roots.end());
    if (real_roots.size() < 2) throw Inadmissible("Δ has fewer than two non-negative real roots: " + describe(p));

    g.r_plus = detail::newton_polish(g.delta, real_roots.back());
    g.r_minus = p.a == 0.0 ? 0.0 : detail::newton_polish(g.delta, real_roots[real_roots.size() - 2]);
    if (!(g.r_plus > 0) || std::abs(g.r_plus - g.r_minus) <= 1e-9 * g.r_plus)
        throw Inadmissible("extremal or degenerate horizon: " + describe(p));

    const double a2 = p.a * p.a, k2 = p.k * p.k;
    const double rp2 = g.r_plus * g.r_plus;
    g.Xi = 1.0 - a2 * k2;
    g.omega_plus = p.a / (rp2 + a2);
    g.eps = hr_gap(p, g.r_plus);
    g.ddelta_plus = background_polys(p, g.r_plus).d1;
    if (!(g.ddelta_plus > 0)) throw Inadmissible("∂ᵣΔ(r₊) <= 0: " + describe(p));
    g.kappa = g.ddelta_plus / (2.0 * (rp2 + a2));

    const double S = g.r_plus + g.r_minus, P = g.r_plus * g.r_minus;
    const double q = (1.0 + a2 * k2) / k2 + S * S - P;
    g.r_complex = cplx(-0.5 * S, std::sqrt(std::max(0.0, q - 0.25 * S * S)));

    const Poly<double> d1 = g.delta.derivative();
    g.A_plus = (rp2 + a2) / g.ddelta_plus;
    g.A_minus = p.a == 0.0 ? 0.0 : (g.r_minus * g.r_minus + a2) / d1(g.r_minus);
    g.A_complex = (g.r_complex * g.r_complex + a2) / d1(g.r_complex);

    g.Dhat = g.delta.reversed();
    g.Qhat = g.delta.deflated(g.r_plus).reversed();
    return g;
}

inline Geometry derive_geometry(double M, double a, double k) { return derive_geometry(BlackHoleParams{M, a, k}); }

/// A point of the exterior described redundantly so that both ends stay accurate:
/// y = 1/r and s = 1 − r₊y = (r − r₊)/r.
struct RadialPoint {
    double r_star = 0;
    double u = 0;   // −log s
    double s = 1;
    double y = 0;
    double r = std::numeric_limits<double>::infinity();
};

namespace detail {

inline cplx clog1p(cplx z) {
    if (std::abs(z) < 0.5) {
        const double x = z.real(), y = z.imag();
        return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
    }
    return std::log(1.0 + z);
}

// r★ from (y, log s); the r₊ term is supplied as log s to keep the horizon exact
inline double tortoise_from(const Geometry& g, double y, double log_s) {
    double t = g.A_plus * log_s;
    if (g.A_minus != 0.0) t += g.A_minus * std::log1p(-g.r_minus * y);
    t += 2.0 * (g.A_complex * clog1p(-g.r_complex * y)).real();
    return t;
}

} // namespace detail

inline double tortoise(const Geometry& g, double r) {
    if (!(r > g.r_plus)) throw DomainError("tortoise requires r > r+");
    if (std::isinf(r)) return 0.0;
    const double y = 1.0 / r;
    return detail::tortoise_from(g, y, std::log((r - g.r_plus) / r));
}

/// dr★/dr = (r²+a²)/Δ.
inline double tortoise_jacobian(const Geometry& g, double r) {
    const double a2 = g.params.a * g.params.a;
    return (r * r + a2) / background_polys(g.params, r).d0;
}

inline RadialPoint radial_point_from_u(const Geometry& g, double u) {
    RadialPoint p;
    p.u = u;
    p.s = std::exp(-u);
    p.y = -std::expm1(-u) / g.r_plus;
    p.r = p.y > 0 ? 1.0 / p.y : std::numeric_limits<double>::infinity();
    p.r_star = u == 0.0 ? 0.0 : detail::tortoise_from(g, p.y, -u);
    return p;
}

inline RadialPoint radial_point_from_r(const Geometry& g, double r) {
    if (!(r > g.r_plus)) throw DomainError("radial point requires r > r+");
    RadialPoint p;
    p.r = r;
    if (std::isinf(r)) return p;
    p.y = 1.0 / r;
    p.s = (r - g.r_plus) / r;
    p.u = -std::log(p.s);
    p.r_star = detail::tortoise_from(g, p.y, -p.u);
    return p;
}

/// Inverse tortoise map: Newton in u = −log(1 − r₊/r), safeguarded by bisection.
inline RadialPoint inverse_tortoise(const Geometry& g, double r_star) {
    if (!(r_star <= 0) || !std::isfinite(r_star)) throw DomainError("inverse_tortoise requires r* <= 0");
    if (r_star == 0.0) return radial_point_from_u(g, 0.0);
    const double a2 = g.params.a * g.params.a;
    auto dtdu = [&](const RadialPoint& p) { return -(1.0 + a2 * p.y * p.y) / (g.r_plus * g.Qhat(p.y)); };

    double lo = 0.0, hi = std::max(-r_star * g.params.k * g.params.k * g.r_plus, -r_star / g.A_plus);
    RadialPoint ph = radial_point_from_u(g, hi);
    while (ph.r_star > r_star) {
        lo = hi;
        hi *= 2.0;
        ph = radial_point_from_u(g, hi);
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const RadialPoint p = radial_point_from_u(g, u);
        const double f = p.r_star - r_star;
        if (f > 0) lo = u; else hi = u;
        double un = u - f / dtdu(p);
        if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
        if (std::abs(un - u) <= 2e-16 * std::max(1.0, u) || hi - lo <= 4e-16 * std::max(1.0, u))
            return radial_point_from_u(g, un);
        u = un;
    }
    throw NonConvergence("inverse_tortoise did not converge");
}

/// Componentwise piecewise-linear path in (M, a, k) over s ∈ [0, 1] with equispaced knots.
struct ParameterPath {
    std::vector<BlackHoleParams> waypoints;

    BlackHoleParams at(double s) const {
        if (waypoints.empty()) throw DomainError("empty parameter path");
        if (!(s >= 0.0 && s <= 1.0)) throw DomainError("path parameter outside [0, 1]");
        if (waypoints.size() == 1) return waypoints.front();
        const double x = s * double(waypoints.size() - 1);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(x), waypoints.size() - 2);
        const double t = x - double(i);
        const auto& p = waypoints[i];
        const auto& q = waypoints[i + 1];
        return {p.M + t * (q.M - p.M), p.a + t * (q.a - p.a), p.k + t * (q.k - p.k)};
    }

    double eps_at(double s) const { return derive_geometry(at(s)).eps; }

    /// Throws Inadmissible at the first failing sample.
    void verify_admissible(int samples = 1000) const {
        for (int i = 0; i <= samples; ++i) (void)derive_geometry(at(double(i) / samples));
    }

    /// s with ε(s) = target, by bisection on a sign change of ε − target.
    double solve_eps(double target, double tol = 1e-14) const {
        double lo = 0.0, hi = 1.0;
        double flo = eps_at(lo) - target, fhi = eps_at(hi) - target;
        if (flo * fhi > 0) throw NoBracket("eps target not bracketed on the path");
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            const double fm = eps_at(mid) - target;
            if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; }
        }
        return 0.5 * (lo + hi);
    }
};

/// The spin ramp used for threshold tests: ε ≈ −0.32 at s = 0, ε ≈ +0.31 at s = 1.
inline ParameterPath reference_path() { return ParameterPath{{{0.3, 0.135, 1.0}, {0.3, 0.22, 1.0}}}; }

} // namespace kads
