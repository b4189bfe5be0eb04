#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kads/angular.hpp"
#include "kads/dop853.hpp"
#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/potentials.hpp"
#include "kads/radial.hpp"

namespace kads {

struct WkbNumerics {
    double rtol = 1e-13;
    int n_grid = 4096;
    double envelope_slack = 1e-9;
    bool throw_on_violation = false;
};

/// Parameter range where negativity is expected to be certifiable; outside it results are reported only.
struct WkbRegime {
    double eps_min = 0.01, eps_max = 0.1;
    int m_min = 20, m_max = 200;
    bool contains(double eps, int m) const {
        return eps >= eps_min && eps <= eps_max && std::abs(m) >= m_min && std::abs(m) <= m_max;
    }
};

inline double wkb_frequency_from(double lambda_tilde, double k) {
    if (!(lambda_tilde < 0)) throw NonNegativeLambdaTilde("lambda_tilde >= 0: no oscillatory region at infinity");
    return k * std::sqrt(-lambda_tilde);
}

inline double wkb_frequency(const RadialPotential& pot) {
    return wkb_frequency_from(pot.lambda_tilde(), pot.geometry().params.k);
}

inline double wkb_frequency(const BlackHoleParams& p, int m, const AngularOptions& opt = {}) {
    const Geometry g = derive_geometry(p);
    return wkb_frequency_from(lambda_tilde(g, m, fundamental_lambda(g, m, opt)), p.k);
}

/// F(r★) = ϖ⁻¹ ∫_{r★}^0 |V + ϖ²|, by adaptive Gauss–Kronrod.
inline double error_control_F(const RadialPotential& pot, double varpi, double r_star) {
    if (r_star > 0) throw DomainError("error_control_F: r_star must be <= 0");
    if (r_star == 0) return 0.0;
    const Geometry& g = pot.geometry();
    auto f = [&](double t) { return std::abs(pot.V(inverse_tortoise(g, std::min(t, 0.0))) + varpi * varpi); };
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, r_star, 0.0, 15, 1e-13, &err);
    return v / varpi;
}

struct WkbBasis {
    using State = std::array<cplx, 5>;   // R₁, R₁′, R₂, R₂′, F

    double varpi = 0;
    double window = 0;                    // π/ϖ
    Dop853Result<5> raw;
    std::vector<double> r_star;           // uniform, from −π/ϖ to 0
    std::vector<cplx> R1, dR1, R2, dR2;
    std::vector<double> F;

    double wronskian_drift = 0;           // max |W(R₁,R₂) + 2i| / 2
    double envelope_excess = 0;           // max over nodes of residual − (exp(F) − 1)
    double envelope_ratio = 0;            // max over nodes of residual / (exp(F) − 1), nodes with F > 0
    bool envelope_ok = true;

    /// Dense-output state at r★ in [−π/ϖ, 0].
    State at(double t) const {
        const auto& segs = raw.segments;
        auto it = std::lower_bound(segs.begin(), segs.end(), t, [](const Dop853Segment<5>& s, double v) { return s.t1 > v; });
        if (it == segs.end()) it = std::prev(segs.end());
        return (*it)(t);
    }
};

namespace detail {

struct EnvelopeCheck {
    double excess = -std::numeric_limits<double>::infinity();
    double ratio = 0;
    void add(double varpi, double t, const WkbBasis::State& y) {
        const double env = std::expm1(y[4].real());
        const double sq = std::sqrt(varpi);
        const cplx e1 = std::exp(cplx(0, varpi * t)), e2 = std::conj(e1);
        const double res[4] = {
            std::abs(sq * y[0] - e1),
            std::abs(sq * y[1] - cplx(0, varpi) * e1) / varpi,
            std::abs(sq * y[2] - e2),
            std::abs(sq * y[3] + cplx(0, varpi) * e2) / varpi,
        };
        for (double r : res) {
            excess = std::max(excess, r - env);
            if (env > 0) ratio = std::max(ratio, r / env);
        }
    }
};

} // namespace detail

inline WkbBasis wkb_basis(const RadialPotential& pot, double varpi, const WkbNumerics& num = {}) {
    if (!(varpi > 0)) throw DomainError("wkb_basis: varpi must be positive");
    const Geometry& g = pot.geometry();
    WkbBasis b;
    b.varpi = varpi;
    b.window = std::numbers::pi / varpi;
    const double w2 = varpi * varpi;
    auto rhs = [&](double t, const WkbBasis::State& y) -> WkbBasis::State {
        const cplx V = pot.V(inverse_tortoise(g, std::min(t, 0.0)));
        return {y[1], V * y[0], y[3], V * y[2], cplx(-std::abs(V + w2) / varpi, 0.0)};
    };
    const double r0 = 1.0 / std::sqrt(varpi);
    const WkbBasis::State y0{cplx(r0), cplx(0, varpi * r0), cplx(r0), cplx(0, -varpi * r0), cplx(0)};
    Dop853Options opt;
    opt.rtol = num.rtol;
    opt.atol = 1e-300;
    b.raw = dop853<5>(rhs, 0.0, y0, -b.window, opt);

    detail::EnvelopeCheck env;
    auto wdrift = [](const WkbBasis::State& y) { return std::abs(y[0] * y[3] - y[2] * y[1] + cplx(0, 2.0)) / 2.0; };
    for (std::size_t i = 0; i < b.raw.t.size(); ++i) {
        env.add(varpi, b.raw.t[i], b.raw.y[i]);
        b.wronskian_drift = std::max(b.wronskian_drift, wdrift(b.raw.y[i]));
    }
    const int n = std::max(num.n_grid, 16);
    b.r_star.resize(n);
    b.R1.resize(n);
    b.dR1.resize(n);
    b.R2.resize(n);
    b.dR2.resize(n);
    b.F.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = i == n - 1 ? 0.0 : -b.window * (1.0 - double(i) / (n - 1));
        const auto y = i == n - 1 ? y0 : b.at(t);
        b.r_star[i] = t;
        b.R1[i] = y[0];
        b.dR1[i] = y[1];
        b.R2[i] = y[2];
        b.dR2[i] = y[3];
        b.F[i] = y[4].real();
        env.add(varpi, t, y);
        b.wronskian_drift = std::max(b.wronskian_drift, wdrift(y));
    }
    b.envelope_excess = env.excess;
    b.envelope_ratio = env.ratio;
    b.envelope_ok = env.excess <= num.envelope_slack;
    if (!b.envelope_ok && num.throw_on_violation)
        throw EnvelopeViolation("WKB residual exceeds exp(F) - 1; tighten the integrator tolerance");
    return b;
}

/// Smallest C with F(r★) ≤ C|m|r★² on the grid.
inline double envelope_constant(const WkbBasis& b, int m) {
    double c = 0;
    for (std::size_t i = 0; i + 1 < b.r_star.size(); ++i)
        c = std::max(c, b.F[i] / (std::abs(m) * b.r_star[i] * b.r_star[i]));
    return c;
}

struct NegativityReport {
    double max_open = -std::numeric_limits<double>::infinity();   // max ℘ over the open window
    double argmax = 0;
    double min = std::numeric_limits<double>::infinity();
    double argmin = 0;
    bool negative = false;        // ℘ < 0 at every interior node
    bool certified = false;       // negative and inside the certification regime
    bool interference = false;    // both A₁, A₂ nonzero
    double theta = 0;             // arg(A₁ conj(A₂)) in [0, 2π)
    double dip = 0;               // predicted dip −θ/(2ϖ) + κπ/(4ϖ)
    int dip_kappa = 0;
    double q_at_dip = 0;
    double q_min = std::numeric_limits<double>::infinity();
    double q_argmin = 0;
    double leading_constant = 0;  // smallest C with |q + 4Im(A₁Ā₂e^{2iϖr★})| ≤ C|m|r★²
};

inline NegativityReport negativity_scan(const WkbBasis& b, cplx A1, cplx A2, int m = 0, bool in_regime = false) {
    if (A1 == cplx(0) && A2 == cplx(0)) throw DomainError("negativity_scan: A1 = A2 = 0");
    NegativityReport r;
    r.interference = A1 != cplx(0) && A2 != cplx(0);
    if (r.interference) {
        const double s = 1.0 / std::sqrt(std::abs(A1) * std::abs(A2));
        A1 *= s;
        A2 *= s;
    }
    const cplx z = A1 * std::conj(A2);
    auto qval = [&](const cplx& R1, const cplx& dR1, const cplx& R2, const cplx& dR2) {
        return 2.0 * (z * R1 * std::conj(dR2) + std::conj(z) * R2 * std::conj(dR1)).real();
    };
    const std::size_t n = b.r_star.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double t = b.r_star[i];
        const cplx R = A1 * b.R1[i] + A2 * b.R2[i];
        const cplx dR = A1 * b.dR1[i] + A2 * b.dR2[i];
        const double p = bullet(R, dR);
        if (p < r.min) {
            r.min = p;
            r.argmin = t;
        }
        if (i > 0 && i + 1 < n && p > r.max_open) {
            r.max_open = p;
            r.argmax = t;
        }
        if (r.interference) {
            const double q = qval(b.R1[i], b.dR1[i], b.R2[i], b.dR2[i]);
            if (q < r.q_min) {
                r.q_min = q;
                r.q_argmin = t;
            }
            if (i + 1 < n && m != 0) {
                const double lead = -4.0 * (z * std::exp(cplx(0, 2.0 * b.varpi * t))).imag();
                r.leading_constant = std::max(r.leading_constant, std::abs(q - lead) / (std::abs(m) * t * t));
            }
        }
    }
    r.negative = r.max_open < 0;
    r.certified = r.negative && in_regime;
    if (r.interference) {
        const double two_pi = 2.0 * std::numbers::pi;
        r.theta = std::fmod(std::arg(z) + two_pi, two_pi);
        const double w = b.varpi, pi = std::numbers::pi;
        for (int kap : {1, -3}) {
            const double d = -r.theta / (2.0 * w) + kap * pi / (4.0 * w);
            if (d < 0 && d > -b.window) {
                r.dip = d;
                r.dip_kappa = kap;
                break;
            }
        }
        if (r.dip_kappa == 0) r.dip = r.theta <= pi / 2 ? 0.0 : -b.window;
        const auto y = b.at(r.dip);
        r.q_at_dip = qval(y[0], y[1], y[2], y[3]);
    }
    return r;
}

struct WkbSlopes {
    double varpi = 0;
    double V0pp = 0, V00p = 0, V00pp = 0, V1p = 0;   // r★-derivatives at r★ = 0
    double beta1 = 0, beta2 = 0;                     // (4σᵢV₁ + 2ϖ⁻¹V₀′)′(0), σ₁ = −1, σ₂ = +1
};

/// Taylor data of the potentials at r★ = 0, evaluated exactly at y = 0.
inline WkbSlopes wkb_slopes(const RadialPotential& pot, double varpi) {
    const PotentialJets J = pot.jets(radial_point_from_u(pot.geometry(), 0.0));
    WkbSlopes s;
    s.varpi = varpi;
    s.V0pp = J.V0.dd;
    s.V00p = J.V00.d;
    s.V00pp = J.V00.dd;
    s.V1p = J.V1.d;
    s.beta1 = -4.0 * s.V1p + 2.0 * s.V0pp / varpi;
    s.beta2 = 4.0 * s.V1p + 2.0 * s.V0pp / varpi;
    return s;
}

/// Relative defect of the Duhamel representation ℘ᵢ(r★) = (1/2ϖ)∫₀^{r★} Eᵢ sin(2ϖ(r★ − t)) dt for basis element i ∈ {1, 2}.
inline double duhamel_defect(const WkbBasis& b, const RadialPotential& pot, int which) {
    if (which != 1 && which != 2) throw DomainError("duhamel_defect: basis index must be 1 or 2");
    const Geometry& g = pot.geometry();
    const double w = b.varpi, w2 = w * w;
    const int off = which == 1 ? 0 : 2;
    auto E = [&](double t) {
        const auto y = b.at(t);
        const cplx R = y[off], dR = y[off + 1];
        const PotentialJets J = pot.jets(inverse_tortoise(g, std::min(t, 0.0)));
        const double reV = J.V0.v + J.V00.v, reVp = J.V0.d + J.V00.d;
        return 4.0 * J.V1.v * (R * std::conj(dR)).imag() + 2.0 * reVp * std::norm(R) + 4.0 * (reV + w2) * bullet(R, dR);
    };
    using GL = boost::math::quadrature::gauss<double, 8>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    const std::size_t n = b.r_star.size();
    double Ic = 0, Is = 0, err = 0, scale = 0;
    for (std::size_t i = n - 1; i-- > 0;) {
        const double ta = b.r_star[i + 1], tb = b.r_star[i];
        const double mid = 0.5 * (ta + tb), half = 0.5 * (tb - ta);
        auto add = [&](double x, double wt) {
            const double t = mid + half * x;
            const double e = E(t);
            Ic += wt * half * e * std::cos(2.0 * w * t);
            Is += wt * half * e * std::sin(2.0 * w * t);
        };
        for (std::size_t j = 0; j < xs.size(); ++j) {
            add(xs[j], ws[j]);
            if (xs[j] != 0.0) add(-xs[j], ws[j]);
        }
        const double t = tb;
        const double p_dh = (std::sin(2.0 * w * t) * Ic - std::cos(2.0 * w * t) * Is) / (2.0 * w);
        const cplx R = which == 1 ? b.R1[i] : b.R2[i];
        const cplx dR = which == 1 ? b.dR1[i] : b.dR2[i];
        const double p = bullet(R, dR);
        err = std::max(err, std::abs(p - p_dh));
        scale = std::max(scale, std::abs(p));
    }
    return err / scale;
}

/// Largest value of 4π²(x − sin x) − x³ on n samples of [−2π, 0]; the inequality holds when this is ≤ 0 up to rounding.
inline double sinxx3_violation(int n = 10001) {
    const double pi = std::numbers::pi;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x = -2.0 * pi * double(i) / (n - 1);
        const double lhs = 4.0 * pi * pi * (x - std::sin(x)), x3 = x * x * x;
        worst = std::max(worst, lhs - x3);
    }
    return worst;
}

} // namespace kads
