#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "kads/dop853.hpp"
#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/potentials.hpp"

namespace kads {

struct RadialNumerics {
    double rtol = 1e-11;
    double atol = 1e-300;
    int seed_order = 24;
    double delta = 1e-4;          // r_seed = r₊(1 + δ)
    double seed_tol = 1e-12;      // allowed relative truncation error of the seed
    int n_dense = 4096;           // points of the uniform r★ output grid
    double rescale_above = 1e100;
};

struct FrobeniusSeed {
    int order = 0;
    double delta = 0;
    RadialPoint point;            // r_seed and its tortoise coordinate
    std::vector<cplx> coeffs;     // R = Σ cₙ ρⁿ⁺¹, ρ = r − r₊, c₀ = ∂ᵣΔ(r₊)
    cplx R, dR;                   // R and dR/dr★ at r_seed
    double truncation_error = 0;  // relative to |R|
    cplx F_at_seed;               // R/Δ at r_seed
};

/// Regular-branch (R = ΔF, F(r₊) = 1) Frobenius seed at r₊(1 + δ).
inline FrobeniusSeed frobenius_seed(const RadialPotential& pot, int order, double delta, double tol = 1e-12) {
    if (order < 10) throw DomainError("Frobenius order must be >= 10");
    if (!(delta >= 1e-8 && delta <= 1e-2)) throw DomainError("Frobenius delta must lie in [1e-8, 1e-2]");
    const Geometry& g = pot.geometry();
    const double rp = g.r_plus, a2 = g.params.a * g.params.a;
    const std::size_t n = static_cast<std::size_t>(order) + 2;

    auto to_c = [&](const Poly<double>& p) {
        std::vector<cplx> v(p.c.begin(), p.c.end());
        v.resize(std::max(v.size(), n), cplx(0));
        return v;
    };
    const Poly<double> D = g.delta.shifted(rp);
    Poly<double> Dt = D;
    Dt.c.erase(Dt.c.begin());                                  // Δ = ρ Δ̃(ρ)
    const Poly<double> Q = Poly<double>{a2, 0.0, 1.0}.shifted(rp);   // r² + a²
    const Poly<double> Z = Poly<double>{-rp * rp, 0.0, 1.0}.shifted(rp);
    const Poly<double> C3 = v1_cubic(g).shifted(rp);
    const Poly<double> P7 = Poly<double>(p7_coefficients(g.params)).shifted(rp);

    const double X = pot.xi_omega_m();
    const double l0 = pot.lambda() - 2.0 - a2 * g.params.k * g.params.k;
    const auto Q2 = series_mul(to_c(Q), to_c(Q), n);

    // H = Δ̃/(r²+a²),  p = 1 + ρH′/H,  q = V/H² = [(Δl₀ − X²Z² − 4iXC₃)Q² + P₇]/(Q²Δ̃²)
    const auto H = series_div(to_c(Dt), to_c(Q), n);
    std::vector<cplx> dH(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) dH[i - 1] = double(i) * H[i];
    const auto HdH = series_div(dH, H, n);
    std::vector<cplx> p(n, 0.0);
    p[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) p[i] = HdH[i - 1];

    std::vector<cplx> inner = to_c(l0 * D);
    const auto Z2 = series_mul(to_c(Z), to_c(Z), n);
    const auto c3 = to_c(C3);
    for (std::size_t i = 0; i < n; ++i) inner[i] -= X * X * Z2[i] + cplx(0, 4.0 * X) * c3[i];
    auto num = series_mul(inner, Q2, n);
    const auto p7 = to_c(P7);
    for (std::size_t i = 0; i < n; ++i) num[i] += p7[i];
    const auto den = series_mul(Q2, series_mul(to_c(Dt), to_c(Dt), n), n);
    const auto q = series_div(num, den, n);

    FrobeniusSeed seed;
    seed.order = order;
    seed.delta = delta;
    seed.coeffs.assign(n, 0.0);
    seed.coeffs[0] = g.ddelta_plus;
    for (std::size_t N = 1; N < n; ++N) {
        cplx acc = 0;
        for (std::size_t j = 1; j <= N; ++j) acc += seed.coeffs[N - j] * (double(N - j + 1) * p[j] - q[j]);
        const double denom = double(N) * double(N + 2);
        seed.coeffs[N] = -acc / denom;
        if (!std::isfinite(std::abs(seed.coeffs[N]))) throw RecurrenceBreakdown("Frobenius recurrence produced a non-finite coefficient");
    }

    const double rho = rp * delta;
    const double r = rp + rho;
    seed.point = radial_point_from_r(g, r);
    cplx R = 0, dRdrho = 0;
    double rho_pow = 1.0;
    for (int j = 0; j <= order; ++j) {
        dRdrho += double(j + 1) * seed.coeffs[j] * rho_pow;
        rho_pow *= rho;
        R += seed.coeffs[j] * rho_pow;
    }
    const double tail = std::abs(seed.coeffs[order + 1]) * rho_pow * rho + std::abs(seed.coeffs[order]) * rho_pow;
    seed.truncation_error = tail / std::abs(R);
    const double Dr = rho * Dt(rho);
    seed.R = R;
    seed.dR = Dr / (r * r + a2) * dRdrho;
    seed.F_at_seed = R / Dr;
    if (!(seed.truncation_error <= tol)) throw TruncationError("Frobenius truncation estimate above tolerance");
    return seed;
}

/// One integration of the regular branch on [r★_seed, 0], normalized so that ∫|R|² dr★ = 1
/// (trapezoid on the uniform output grid).
struct RadialSolution {
    using State = std::array<cplx, 2>;

    FrobeniusSeed seed;
    double r_star_min = 0;
    Dop853Result<2> raw;
    double log_norm = 0;     // true normalized state = raw state · exp(log_scale − log_norm)

    std::vector<double> r_star, r;
    std::vector<cplx> R, dR;
    std::vector<double> pomega, im_W;

    double step() const { return r_star.size() > 1 ? r_star[1] - r_star[0] : 0.0; }

    State normalized(const State& y, double log_scale) const {
        const double f = std::exp(log_scale - log_norm);
        return {y[0] * f, y[1] * f};
    }

    /// Normalized state at any r★ in [r★_min, 0] via dense output.
    State at(double t) const {
        const auto& segs = raw.segments;
        auto it = std::lower_bound(segs.begin(), segs.end(), t, [](const Dop853Segment<2>& s, double v) { return s.t1 < v; });
        if (it == segs.end()) it = std::prev(segs.end());
        return normalized((*it)(t), it->log_scale);
    }

    std::size_t nodes() const { return raw.t.size(); }
    State node_state(std::size_t i) const { return normalized(raw.y[i], raw.log_scale[i]); }
};

inline double bullet(const cplx& R, const cplx& dR) { return 2.0 * (R * std::conj(dR)).real(); }
inline double wronskian_im(const cplx& R, const cplx& dR) { return 2.0 * (R * std::conj(dR)).imag(); }

inline RadialSolution integrate_regular(const RadialPotential& pot, const FrobeniusSeed& seed, const RadialNumerics& num = {}) {
    const Geometry& g = pot.geometry();
    RadialSolution sol;
    sol.seed = seed;
    sol.r_star_min = seed.point.r_star;
    Dop853Options opt;
    opt.rtol = num.rtol;
    opt.atol = num.atol;
    opt.rescale_above = num.rescale_above;
    auto rhs = [&](double t, const std::array<cplx, 2>& y) -> std::array<cplx, 2> {
        const RadialPoint p = inverse_tortoise(g, std::min(t, 0.0));
        return {y[1], pot.V(p) * y[0]};
    };
    sol.raw = dop853<2>(rhs, sol.r_star_min, {seed.R, seed.dR}, 0.0, opt);

    const int n = std::max(num.n_dense, 16);
    sol.r_star.resize(n);
    std::vector<RadialSolution::State> ys(n);
    std::vector<double> ls(n);
    std::size_t k = 0;
    const auto& segs = sol.raw.segments;
    for (int i = 0; i < n; ++i) {
        const double t = i == n - 1 ? 0.0 : sol.r_star_min * (1.0 - double(i) / (n - 1));
        sol.r_star[i] = t;
        while (k + 1 < segs.size() && segs[k].t1 < t) ++k;
        ys[i] = segs[k](t);
        ls[i] = segs[k].log_scale;
    }
    // normalize relative to the final scale, then by the L² norm
    const double lf = sol.raw.log_scale.back();
    double acc = 0;
    std::vector<double> mod2(n);
    for (int i = 0; i < n; ++i) {
        const double f = std::exp(ls[i] - lf);
        mod2[i] = std::norm(ys[i][0] * f);
    }
    const double h = sol.r_star[1] - sol.r_star[0];
    for (int i = 0; i + 1 < n; ++i) acc += 0.5 * h * (mod2[i] + mod2[i + 1]);
    sol.log_norm = lf + 0.5 * std::log(acc);

    sol.r.resize(n);
    sol.R.resize(n);
    sol.dR.resize(n);
    sol.pomega.resize(n);
    sol.im_W.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto y = sol.normalized(ys[i], ls[i]);
        sol.R[i] = y[0];
        sol.dR[i] = y[1];
        sol.pomega[i] = bullet(y[0], y[1]);
        sol.im_W[i] = wronskian_im(y[0], y[1]);
        sol.r[i] = i == n - 1 ? std::numeric_limits<double>::infinity() : inverse_tortoise(g, sol.r_star[i]).r;
    }
    return sol;
}

inline RadialSolution integrate_regular(const RadialPotential& pot, const RadialNumerics& num = {}) {
    return integrate_regular(pot, frobenius_seed(pot, num.seed_order, num.delta, num.seed_tol), num);
}

struct IdentityDefects {
    double wpderiv1 = 0;    // ℘′ = 2|R′|² + 2Re(V)|R|², 6th-order differences on the uniform grid
    double wpderiv2 = 0;    // ℘″ = 2iIm(V)W + 2Re(V′)|R|² + 4Re(V)℘
    double wronskian = 0;   // Im W = 2∫V₁|R|², quadrature along the adaptive steps
    double energy = 0;      // ℘ = 2∫(|R′|² + (V₀+V₀₀)|R|²)
    double max() const { return std::max({wpderiv1, wpderiv2, wronskian, energy}); }
};

inline IdentityDefects identity_defects(const RadialSolution& sol, const RadialPotential& pot) {
    const Geometry& g = pot.geometry();
    IdentityDefects d;
    const std::size_t n = sol.r_star.size();
    const double h = sol.step();
    static constexpr double c1[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
    static constexpr double c2[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
    double e1 = 0, s1 = 0, e2 = 0, s2 = 0;
    for (std::size_t i = 3; i + 3 < n; ++i) {
        double f1 = 0, f2 = 0;
        for (int j = 0; j < 7; ++j) {
            f1 += c1[j] * sol.pomega[i + j - 3];
            f2 += c2[j] * sol.pomega[i + j - 3];
        }
        f1 /= h;
        f2 /= h * h;
        const PotentialJets J = pot.jets(inverse_tortoise(g, sol.r_star[i]));
        const cplx R = sol.R[i], dR = sol.dR[i];
        const double rv = J.V0.v + J.V00.v;
        const double rhs1 = 2.0 * std::norm(dR) + 2.0 * rv * std::norm(R);
        const double rhs2 = 4.0 * J.V1.v * (R * std::conj(dR)).imag() + 2.0 * (J.V0.d + J.V00.d) * std::norm(R) +
                            4.0 * rv * sol.pomega[i];
        e1 = std::max(e1, std::abs(f1 - rhs1));
        s1 = std::max(s1, std::abs(rhs1));
        e2 = std::max(e2, std::abs(f2 - rhs2));
        s2 = std::max(s2, std::abs(rhs2));
    }
    d.wpderiv1 = e1 / s1;
    d.wpderiv2 = e2 / s2;

    // integral identities, with the horizon tails from the exponential rates 6κ and 4κ
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const double kap = g.kappa;
    auto integrands = [&](double t, const RadialSolution::State& y, double& iw, double& ie) {
        const PotentialValues v = pot.eval(inverse_tortoise(g, std::min(t, 0.0)));
        iw = v.V1 * std::norm(y[0]);
        ie = std::norm(y[1]) + (v.V0 + v.V00) * std::norm(y[0]);
    };
    const auto y0 = sol.node_state(0);
    double iw0, ie0;
    integrands(sol.raw.t[0], y0, iw0, ie0);
    double Iw = iw0 / (6.0 * kap), Ie = ie0 / (4.0 * kap);
    double ew = 0, sw = 0, ee = 0, se = 0;
    auto check = [&](const RadialSolution::State& y) {
        const double imw = wronskian_im(y[0], y[1]);
        const double pw = bullet(y[0], y[1]);
        ew = std::max(ew, std::abs(imw - 2.0 * Iw));
        sw = std::max(sw, std::abs(imw));
        ee = std::max(ee, std::abs(pw - 2.0 * Ie));
        se = std::max(se, std::abs(pw));
    };
    check(y0);
    for (std::size_t k = 0; k < sol.raw.segments.size(); ++k) {
        const auto& seg = sol.raw.segments[k];
        const double mid = 0.5 * (seg.t0 + seg.t1), half = 0.5 * (seg.t1 - seg.t0);
        auto add = [&](double x, double w) {
            const double t = mid + half * x;
            double iw, ie;
            integrands(t, sol.normalized(seg(t), seg.log_scale), iw, ie);
            Iw += w * half * iw;
            Ie += w * half * ie;
        };
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (xs[j] == 0.0) {
                add(0.0, ws[j]);
            } else {
                add(xs[j], ws[j]);
                add(-xs[j], ws[j]);
            }
        }
        check(sol.node_state(k + 1));
    }
    d.wronskian = ew / sw;
    d.energy = ee / se;
    return d;
}

struct BulletProfile {
    double min = 0;               // g: min ℘ over [window_start, 0]
    double argmin = 0;
    std::size_t argmin_index = 0;
    double endpoint = 0;          // ℘(0)
    double window_start = 0;      // end of the monotone horizon tail, at or past r★_lo
    double window_min = 0;        // min ℘ over the near-horizon window [r★_min, window_start]
    bool window_positive = false;
    double grid_step = 0;
    double global_min = 0;        // min ℘ over the whole grid
};

/// Bullet profile past the near-horizon window. Beyond r★_lo the window extends while ℘ keeps increasing,
/// so the tiny but positive horizon tail never competes with the boundary value for the minimum.
inline BulletProfile bullet_profile(const RadialSolution& sol, double r_star_lo) {
    BulletProfile b;
    const std::size_t n = sol.r_star.size();
    std::size_t i0 = 0;
    while (i0 + 1 < n && sol.r_star[i0] < r_star_lo) ++i0;
    while (i0 + 1 < n && sol.pomega[i0 + 1] >= sol.pomega[i0]) ++i0;
    b.window_start = sol.r_star[i0];
    b.min = b.window_min = b.global_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sol.pomega[i];
        b.global_min = std::min(b.global_min, p);
        if (i >= i0 && p < b.min) {
            b.min = p;
            b.argmin = sol.r_star[i];
            b.argmin_index = i;
        }
        if (i <= i0) b.window_min = std::min(b.window_min, p);
    }
    b.window_positive = b.window_min > 0;
    b.endpoint = sol.pomega.back();
    b.grid_step = sol.step();
    return b;
}

struct MatchResult {
    cplx kappa;
    double residual_value = 0;   // |R⁺(0) − conj(R⁻(0))|
    double residual_deriv = 0;   // |R⁺′(0) + conj(R⁻)′(0)|
    bool zero_branch = false;    // κ from −conj(R′)/R′ because R(0) = 0
};

/// κ-match of R⁺ = R, R⁻ = κR into the coupled boundary conditions at r★ = 0.
inline MatchResult kappa_match(cplx R0, cplx dR0, double p_tol = std::numeric_limits<double>::infinity()) {
    if (R0 == cplx(0) && dR0 == cplx(0)) throw MatchError("kappa_match: R(0) = R'(0) = 0");
    const double scale = std::max(std::abs(R0) * std::abs(dR0), std::max(std::norm(R0), std::norm(dR0)));
    if (std::abs(bullet(R0, dR0)) > p_tol * std::max(scale, 1e-300))
        throw MatchError("kappa_match: boundary bullet above tolerance");
    MatchResult m;
    m.zero_branch = std::abs(R0) <= 1e-14 * std::abs(dR0);
    m.kappa = m.zero_branch ? -std::conj(dR0) / dR0 : std::conj(R0) / R0;
    const cplx Rm = m.kappa * R0, dRm = m.kappa * dR0;
    m.residual_value = std::abs(R0 - std::conj(Rm));
    m.residual_deriv = std::abs(dR0 + std::conj(dRm));
    return m;
}

} // namespace kads
