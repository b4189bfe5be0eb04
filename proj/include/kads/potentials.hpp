#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "kads/angular.hpp"
#include "kads/exact_poly.hpp"
#include "kads/geometry.hpp"
#include "kads/poly.hpp"

namespace kads {

/// Coefficients (ascending in r) of P(r) = (r²+a²)⁴V₀₀ for given parameters.
/// The expansion is done once with integer arithmetic; degrees 8..10 cancel identically.
inline std::vector<double> p7_coefficients(const BlackHoleParams& p) {
    static const std::vector<ExactPoly> coeffs = [] {
        auto c = exact::p7().coefficients_in_r();
        while (!c.empty() && c.back().is_zero()) c.pop_back();
        return c;
    }();
    std::vector<double> out(coeffs.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j) out[j] = coeffs[j].eval(p.M, p.a, p.k);
    return out;
}

/// (r²+a²)²V₁/(4Ξω₊m) = ½∂ᵣΔ(r₊²−r²) + 2Δr, ascending in r.
inline Poly<double> v1_cubic(const Geometry& g) {
    const double M = g.params.M, a2 = g.params.a * g.params.a, k2 = g.params.k * g.params.k;
    const double rp2 = g.r_plus * g.r_plus;
    return Poly<double>{-M * rp2, (1.0 + a2 * k2) * rp2 + 2.0 * a2, -3.0 * M, 2.0 * k2 * rp2 + 1.0 + a2 * k2};
}

struct PotentialValues {
    double V0 = 0, V00 = 0, V1 = 0;
    cplx V;
};

/// Potentials and their first two r★-derivatives.
struct PotentialJets {
    Jet<double> V0, V00, V1;
    Jet<double> y;   // y = 1/r as a function of r★
    cplx V() const { return {V0.v + V00.v, -V1.v}; }
    cplx dV() const { return {V0.d + V00.d, -V1.d}; }
    cplx ddV() const { return {V0.dd + V00.dd, -V1.dd}; }
};

/// The complex radial potential V = V₀ + V₀₀ − iV₁ for one (params, m, λ).
/// Internally everything is a rational function of y = 1/r with the horizon
/// factor s = 1 − r₊y split off, so both r★ → −∞ and r★ = 0 are evaluated exactly.
class RadialPotential {
public:
    RadialPotential(Geometry g, int m, double lambda) : g_(std::move(g)), m_(m), lambda_(lambda) {
        const double a = g_.params.a, k = g_.params.k;
        lt_ = kads::lambda_tilde(g_, m, lambda);
        xwm_ = g_.Xi * g_.omega_plus * m;
        l0_ = lambda - 2.0 - a * a * k * k;
        P7hat_ = Poly<double>(p7_coefficients(g_.params)).reversed();
        C2hat_ = v1_cubic(g_).deflated(g_.r_plus).reversed();
    }

    const Geometry& geometry() const { return g_; }
    int m() const { return m_; }
    double lambda() const { return lambda_; }
    double lambda_tilde() const { return lt_; }
    double xi_omega_m() const { return xwm_; }

    /// Jets in r★ at a radial point.
    PotentialJets jets(const RadialPoint& p) const {
        using J = Jet<double>;
        const double a2 = g_.params.a * g_.params.a, rp = g_.r_plus;
        const J y = J::variable(p.y);
        const J s{p.s, -rp, 0.0};
        const J q = 1.0 + a2 * y * y;
        const J q2 = q * q;
        const J Dh = s * g_.Qhat(y);
        const J w = Dh / q2;
        const J sp = s * (1.0 + rp * y);
        PotentialJets out;
        J V0 = l0_ * w - (xwm_ * xwm_) * (sp * sp) / q2;
        J V00 = y * P7hat_(y) / (q2 * q2);
        J V1 = (4.0 * xwm_) * y * s * C2hat_(y) / q2;
        const J yp = -(Dh / q);
        const J yt{p.y, yp.v, yp.d * yp.v};
        out.V0 = chain(V0, yt);
        out.V00 = chain(V00, yt);
        out.V1 = chain(V1, yt);
        out.y = yt;
        return out;
    }

    PotentialValues eval(const RadialPoint& p) const {
        const double a2 = g_.params.a * g_.params.a, rp = g_.r_plus, y = p.y;
        const double q = 1.0 + a2 * y * y, q2 = q * q;
        const double Dh = p.s * g_.Qhat(y);
        const double sp = p.s * (1.0 + rp * y);
        PotentialValues v;
        v.V0 = l0_ * Dh / q2 - xwm_ * xwm_ * sp * sp / q2;
        v.V00 = y * P7hat_(y) / (q2 * q2);
        v.V1 = 4.0 * xwm_ * y * p.s * C2hat_(y) / q2;
        v.V = {v.V0 + v.V00, -v.V1};
        return v;
    }

    PotentialValues eval_r(double r) const {
        if (!(r > g_.r_plus)) throw DomainError("potential evaluated at r <= r+");
        return eval(radial_point_from_r(g_, r));
    }

    cplx V(const RadialPoint& p) const { return eval(p).V; }

    // Closed forms in r, kept separate from the y-form evaluators as cross-checks.

    double w(double r) const {
        const double q = r * r + g_.params.a * g_.params.a;
        return background_polys(g_.params, r).d0 / (q * q);
    }

    /// w′ in r★, closed form.
    double w_prime(double r) const {
        const double a2 = g_.params.a * g_.params.a, k2 = g_.params.k * g_.params.k, M = g_.params.M;
        const double q = r * r + a2, q4 = q * q * q * q;
        const double D = background_polys(g_.params, r).d0;
        return -D / q4 * (((2.0 - 2.0 * a2 * k2) * r - 6.0 * M) * r * r + 2.0 * a2 * (1.0 - a2 * k2) * r + 2.0 * M * a2);
    }

    double v0_direct(double r) const {
        const double q = r * r + g_.params.a * g_.params.a;
        const double rp = g_.r_plus;
        const double D = background_polys(g_.params, r).d0;
        const double z = (r - rp) * (r + rp);
        return D / (q * q) * l0_ - xwm_ * xwm_ * z * z / (q * q);
    }

    /// V₀ written with λ̃.
    double v0_tilde_form(double r) const {
        const double q = r * r + g_.params.a * g_.params.a, k = g_.params.k;
        const double rp = g_.r_plus;
        const double D = background_polys(g_.params, r).d0;
        const double z = (r - rp) * (r + rp);
        const double c = xwm_ / k;
        return D / (q * q) * lt_ + c * c * (D - k * k * z * z) / (q * q);
    }

    /// V₀′ in r★, closed form.
    double v0_prime(double r) const {
        const double a2 = g_.params.a * g_.params.a, rp = g_.r_plus;
        const double q = r * r + a2;
        const double D = background_polys(g_.params, r).d0;
        return l0_ * w_prime(r) -
               xwm_ * xwm_ * 2.0 * D / q * ((r * r - rp * rp) / q) * (2.0 * r * (rp * rp + a2) / (q * q));
    }

    double crux_f(const RadialPoint& p) const {
        const PotentialJets j = jets(p);
        return 4.0 * std::abs(j.V1.v) * std::sqrt(std::abs(j.V0.v + j.V00.v)) + 2.0 * j.V0.d;
    }
    double crux_f(double r) const { return crux_f(radial_point_from_r(g_, r)); }

private:
    Geometry g_;
    int m_;
    double lambda_, lt_, xwm_, l0_;
    Poly<double> P7hat_, C2hat_;
};

/// 10⁴-point style grid, log-spaced in r − r₊ over [lo·r₊, hi·r₊].
inline std::vector<double> certificate_grid(const Geometry& g, int n = 10000, double lo = 1e-6, double hi = 1e3) {
    std::vector<double> r(n);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i) r[i] = g.r_plus * (1.0 + std::exp(l0 + (l1 - l0) * i / (n - 1)));
    return r;
}

struct CertificateReport {
    std::vector<double> p7;             // ascending coefficients of (r²+a²)⁴V₀₀
    std::array<double, 8> dP{};         // ∂ʲP(r₊)
    bool dP_positive = false;
    double v1_lower_min = 0;            // min V₁/(Ξω₊m)
    double v1_upper_min = 0;            // min 8(k²r₊²+2)/r − V₁/(Ξω₊m)
    bool v1_ok = false;
    double quad_min = 0;                // min (Δ − k²(r−r₊)²(r+r₊)²)/scale
    bool quad_ok = false;
    bool all_ok() const { return dP_positive && v1_ok && quad_ok; }
};

/// Numerical certificates of the three positivity lemmas. With fail_hard, a failing
/// certificate throws CertificateFailure.
inline CertificateReport positivity_certificates(const Geometry& g, int m, int grid_points = 10000, bool fail_hard = false) {
    if (std::abs(m) < 2) throw DomainError("certificates require |m| >= 2");
    CertificateReport rep;
    rep.p7 = p7_coefficients(g.params);
    const Poly<double> shifted = Poly<double>(rep.p7).shifted(g.r_plus);
    double fact = 1.0;
    rep.dP_positive = true;
    for (int j = 0; j < 8; ++j) {
        if (j > 0) fact *= j;
        rep.dP[j] = shifted[j] * fact;
        rep.dP_positive = rep.dP_positive && rep.dP[j] > 0;
    }

    const auto grid = certificate_grid(g, grid_points);
    const double a2 = g.params.a * g.params.a, k2 = g.params.k * g.params.k, rp = g.r_plus;
    const Poly<double> C3 = v1_cubic(g);
    const Poly<double> C2 = C3.deflated(rp);
    rep.v1_lower_min = rep.v1_upper_min = rep.quad_min = std::numeric_limits<double>::infinity();
    for (double r : grid) {
        const double q = r * r + a2;
        const double v1n = 4.0 * (r - rp) * C2(r) / (q * q);
        rep.v1_lower_min = std::min(rep.v1_lower_min, v1n);
        rep.v1_upper_min = std::min(rep.v1_upper_min, 8.0 * (k2 * rp * rp + 2.0) / r - v1n);
        const double D = background_polys(g.params, r).d0;
        const double z = (r - rp) * (r + rp);
        const double scale = k2 * r * r * r * r + (1.0 + a2 * k2) * r * r + 2.0 * g.params.M * r + a2;
        rep.quad_min = std::min(rep.quad_min, (D - k2 * z * z) / scale);
    }
    rep.v1_ok = g.params.a == 0.0 || (rep.v1_lower_min > 0 && rep.v1_upper_min > 0);
    rep.quad_ok = rep.quad_min >= -1e-12;
    if (fail_hard && !rep.all_ok()) throw CertificateFailure("positivity certificate failed for " + describe(g.params));
    return rep;
}

/// D = inf over r > max(3M, r₊) of 2r(Δ/(r²+a²))((r²−r₊²)/(r²+a²))(2r(r₊²+a²)/(r²+a²)²),
/// sampled on a log grid up to 10³r₊ together with its limit 4k²(r₊²+a²).
inline double crux_constant_D(const Geometry& g, int n = 10000) {
    const double a2 = g.params.a * g.params.a, rp2 = g.r_plus * g.r_plus, k2 = g.params.k * g.params.k;
    const double r0 = std::max(3.0 * g.params.M, g.r_plus * (1.0 + 1e-9));
    double inf = 4.0 * k2 * (rp2 + a2);
    const double l0 = std::log(r0), l1 = std::log(1e3 * std::max(r0, g.r_plus));
    for (int i = 0; i < n; ++i) {
        const double r = std::exp(l0 + (l1 - l0) * i / (n - 1));
        const double q = r * r + a2;
        const double D = background_polys(g.params, r).d0;
        inf = std::min(inf, 2.0 * r * D / q * ((r * r - rp2) / q) * (2.0 * r * (rp2 + a2) / (q * q)));
    }
    return inf;
}

struct CruxReport {
    double D = 0;
    double eps_tilde1 = 0, eps_tilde2 = 0, eps0 = 0;
    bool N_empty = true;
    double N_min_r = 0;             // smallest sampled point of N = {V₀+V₀₀ ≤ 0}
    double three_M_over_Xi = 0;
    double max_f_on_N = 0;          // max of f over N
    double max_scaled_f_on_N = 0;   // max of r f/(Ξω₊m)² over N; the lemma predicts ≤ −D
    bool f_negative_on_N = true;
    bool N_beyond_3M = true;
};

inline CruxReport crux_certificate(const RadialPotential& pot, int grid_points = 10000) {
    const Geometry& g = pot.geometry();
    CruxReport rep;
    const double a2 = g.params.a * g.params.a, k = g.params.k, k2 = k * k, M = g.params.M;
    const double rp2 = g.r_plus * g.r_plus;
    rep.D = crux_constant_D(g);
    rep.three_M_over_Xi = 3.0 * M / g.Xi;
    const double b = 2.0 * k2 * rp2 + 1.0 + a2 * k2;
    rep.eps_tilde1 = (1.0 / b) * ((1.0 + a2 * k2) + 18.0 * M * k2 / (1.0 - a2 * k2));
    double inf_ratio = 1.0 / k;
    {
        const double r0 = std::max(3.0 * M, g.r_plus * (1.0 + 1e-6));
        const double l0 = std::log(r0), l1 = std::log(1e3 * r0);
        for (int i = 0; i < grid_points; ++i) {
            const double r = std::exp(l0 + (l1 - l0) * i / (grid_points - 1));
            inf_ratio = std::min(inf_ratio, (r * r + a2) / std::sqrt(background_polys(g.params, r).d0));
        }
    }
    const double t2 = k * rep.D / (32.0 * (k2 * rp2 + 2.0)) * inf_ratio;
    rep.eps_tilde2 = t2 * t2;
    const double et0 = std::min({0.5, rep.eps_tilde1, rep.eps_tilde2});
    rep.eps0 = 0.5 * k * (rp2 + a2) / (k * rp2 + g.params.a) * (g.omega_plus * g.omega_plus / k2) * et0;

    const double xw2 = pot.xi_omega_m() * pot.xi_omega_m();
    rep.max_f_on_N = rep.max_scaled_f_on_N = -std::numeric_limits<double>::infinity();
    auto visit = [&](const RadialPoint& p) {
        const PotentialValues v = pot.eval(p);
        if (v.V0 + v.V00 > 0) return;
        const double f = pot.crux_f(p);
        if (rep.N_empty || p.r < rep.N_min_r) rep.N_min_r = p.r;
        rep.N_empty = false;
        rep.max_f_on_N = std::max(rep.max_f_on_N, f);
        if (std::isfinite(p.r) && xw2 > 0) rep.max_scaled_f_on_N = std::max(rep.max_scaled_f_on_N, p.r * f / xw2);
        if (!(f < 0)) rep.f_negative_on_N = false;
    };
    for (double r : certificate_grid(g, grid_points)) visit(radial_point_from_r(g, r));
    visit(radial_point_from_u(g, 0.0));
    if (!rep.N_empty) rep.N_beyond_3M = rep.N_min_r >= rep.three_M_over_Xi;
    return rep;
}

/// min of V₀[λ] + V₀₀ over the certificate grid plus the conformal boundary.
inline double min_real_potential(const RadialPotential& pot, int grid_points = 10000) {
    const Geometry& g = pot.geometry();
    double mn = pot.eval(radial_point_from_u(g, 0.0)).V.real();
    for (double r : certificate_grid(g, grid_points)) mn = std::min(mn, pot.eval(radial_point_from_r(g, r)).V.real());
    return mn;
}

} // namespace kads
