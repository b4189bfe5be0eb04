#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kads/angular.hpp"
#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/parallel.hpp"
#include "kads/potentials.hpp"
#include "kads/radial.hpp"

namespace kads {

struct ShooterNumerics {
    RadialNumerics radial;
    AngularOptions angular;
    double window_factor = 10.0;   // r★_lo = r★(r₊(1 + window_factor·δ))
    int coarse_samples = 64;
    double s_tol = 1e-10;
    double p_tol = 1e-8;
    double residual_tol = 1e-6;
    double zero_tol = 1e-6;
    int max_iterations = 200;
    int boundary_cells = 2;
};

struct Touch {
    double r_star = 0;
    double pomega = 0, dpomega = 0, ddpomega = 0;
    double re_V = 0;
    double amplitude = 0;     // |R|² + |R′|², relative to its maximum on the grid
    bool concave = false;
    bool alarm = false;       // Re V > 0 at the touch: the solution would have to nearly vanish
};

struct ReboundDiagnostics {
    int critical_points = 0;
    int touches = 0;
    int violations = 0;
    int alarms = 0;
    std::vector<Touch> touch_list;

    void merge(const ReboundDiagnostics& o) {
        critical_points += o.critical_points;
        touches += o.touches;
        violations += o.violations;
        alarms += o.alarms;
        touch_list.insert(touch_list.end(), o.touch_list.begin(), o.touch_list.end());
    }
};

/// Locates the interior critical points of ℘ on [r★_lo, 0) and tests every near-touch ℘ ≈ ℘′ ≈ 0 for ℘″ < 0.
inline ReboundDiagnostics no_rebound_check(const RadialSolution& sol, const RadialPotential& pot, double zero_tol,
                                           double r_star_lo) {
    const Geometry& g = pot.geometry();
    ReboundDiagnostics d;
    struct Local {
        double p, dp, ddp, reV, amp;
    };
    auto local = [&](double t, const RadialSolution::State& y) {
        const PotentialJets J = pot.jets(inverse_tortoise(g, std::min(t, 0.0)));
        const double reV = J.V0.v + J.V00.v;
        const cplx R = y[0], dR = y[1];
        const double p = bullet(R, dR);
        const double dp = 2.0 * std::norm(dR) + 2.0 * reV * std::norm(R);
        const double ddp = 4.0 * J.V1.v * (R * std::conj(dR)).imag() + 2.0 * (J.V0.d + J.V00.d) * std::norm(R) + 4.0 * reV * p;
        return Local{p, dp, ddp, reV, std::norm(R) + std::norm(dR)};
    };
    const std::size_t n = sol.r_star.size();
    std::size_t i0 = 0;
    while (i0 < n && sol.r_star[i0] < r_star_lo) ++i0;
    std::vector<Local> L(n);
    double p_scale = 0, amp_scale = 0;
    for (std::size_t i = i0; i < n; ++i) {
        L[i] = local(sol.r_star[i], {sol.R[i], sol.dR[i]});
        p_scale = std::max(p_scale, std::abs(L[i].p));
        amp_scale = std::max(amp_scale, L[i].amp);
    }
    for (std::size_t i = i0; i + 1 < n; ++i) {
        if ((L[i].dp > 0) == (L[i + 1].dp > 0)) continue;
        double a = sol.r_star[i], b = sol.r_star[i + 1];
        const bool sa = L[i].dp > 0;
        for (int it = 0; it < 60 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
            const double c = 0.5 * (a + b);
            if ((local(c, sol.at(c)).dp > 0) == sa) a = c; else b = c;
        }
        const double t = 0.5 * (a + b);
        if (t >= 0.0) continue;
        ++d.critical_points;
        const Local c = local(t, sol.at(t));
        if (std::abs(c.p) >= zero_tol * p_scale) continue;
        Touch tc{t, c.p, c.dp, c.ddp, c.reV, c.amp / amp_scale, c.ddp < 0, c.reV > 0};
        ++d.touches;
        if (tc.alarm) {
            ++d.alarms;
            if (tc.amplitude >= zero_tol) ++d.violations;
        } else if (!tc.concave) {
            ++d.violations;
        }
        d.touch_list.push_back(tc);
    }
    return d;
}

struct ShotResult {
    double s = std::numeric_limits<double>::quiet_NaN();
    BlackHoleParams params;
    double eps = 0;
    double lambda = 0, lambda_tilde = 0;
    double r_star_lo = 0;
    BulletProfile profile;        // g = profile.min
    ReboundDiagnostics rebound;
    std::shared_ptr<const RadialPotential> potential;
    std::shared_ptr<const RadialSolution> solution;

    double g() const { return profile.min; }
    double endpoint() const { return profile.endpoint; }
    bool argmin_at_boundary(int cells) const {
        return profile.argmin_index + static_cast<std::size_t>(cells) + 1 >= solution->r_star.size();
    }
};

inline ShotResult shoot_params(const BlackHoleParams& p, int m, const ShooterNumerics& num = {}) {
    if (std::abs(m) < 2) throw DomainError("shoot requires |m| >= 2");
    const Geometry g = derive_geometry(p);
    ShotResult s;
    s.params = p;
    s.eps = g.eps;
    s.lambda = fundamental_lambda(g, m, num.angular);
    auto pot = std::make_shared<const RadialPotential>(g, m, s.lambda);
    s.lambda_tilde = pot->lambda_tilde();
    auto sol = std::make_shared<const RadialSolution>(integrate_regular(*pot, num.radial));
    s.r_star_lo = tortoise(g, g.r_plus * (1.0 + num.window_factor * num.radial.delta));
    s.profile = bullet_profile(*sol, s.r_star_lo);
    s.rebound = no_rebound_check(*sol, *pot, num.zero_tol, s.r_star_lo);
    s.potential = std::move(pot);
    s.solution = std::move(sol);
    return s;
}

inline ShotResult shoot(const ParameterPath& path, double s, int m, const ShooterNumerics& num = {}) {
    ShotResult r = shoot_params(path.at(s), m, num);
    r.s = s;
    return r;
}

struct CoarsePoint {
    double s = 0, g = 0, eps = 0;
};

struct ModeCertificate {
    int m = 0;
    double s_m = 0, s_lo = 0, s_hi = 0, bracket_width = 0;
    BlackHoleParams params;
    double eps_at_sm = 0;
    double lambda = 0, lambda_tilde = 0;
    cplx kappa;
    double residual_value = 0, residual_deriv = 0;
    double pomega0 = 0;           // ℘(0) at s_lo
    double argmin = 0, grid_step = 0;
    int iterations = 0;
    bool bracket_valid = false;   // g(s_m − s_tol) > 0 > g(s_m + s_tol)
    double continuity_L = 0;      // max |Δg|/|Δs| over the coarse scan
    bool window_positive = true;  // near-horizon positivity at every shot
    std::vector<CoarsePoint> coarse;
    ReboundDiagnostics rebound;   // aggregated over every shot of the search
};

inline std::vector<CoarsePoint> coarse_scan(const ParameterPath& path, int m, const ShooterNumerics& num, int jobs,
                                            ReboundDiagnostics* rebound = nullptr, bool* window_positive = nullptr) {
    const int n = std::max(num.coarse_samples, 2);
    std::vector<CoarsePoint> pts(n);
    std::vector<ReboundDiagnostics> rb(n);
    std::vector<char> wp(n, 1);
    parallel_for(n, jobs, [&](std::size_t j) {
        const double s = double(j) / (n - 1);
        const ShotResult r = shoot(path, s, m, num);
        pts[j] = {s, r.g(), r.eps};
        rb[j] = r.rebound;
        wp[j] = r.profile.window_positive;
    });
    for (int j = 0; j < n; ++j) {
        if (rebound) rebound->merge(rb[j]);
        if (window_positive && !wp[j]) *window_positive = false;
    }
    return pts;
}

inline ModeCertificate find_threshold(const ParameterPath& path, int m, const ShooterNumerics& num = {}, int jobs = 1) {
    ModeCertificate c;
    c.m = m;
    c.coarse = coarse_scan(path, m, num, jobs, &c.rebound, &c.window_positive);
    for (std::size_t j = 1; j < c.coarse.size(); ++j)
        c.continuity_L = std::max(c.continuity_L, std::abs(c.coarse[j].g - c.coarse[j - 1].g) / (c.coarse[j].s - c.coarse[j - 1].s));
    if (!(c.coarse.front().g > 0)) throw NoBracket("g(0) <= 0: path start is not in the positive set");
    std::size_t j = 1;
    while (j < c.coarse.size() && c.coarse[j].g >= 0) ++j;
    if (j == c.coarse.size()) throw NoBracket("g stays non-negative along the whole path");

    double lo = c.coarse[j - 1].s, hi = c.coarse[j].s;
    ShotResult shot_lo = shoot(path, lo, m, num);
    auto record = [&](const ShotResult& r) {
        c.rebound.merge(r.rebound);
        if (!r.profile.window_positive) c.window_positive = false;
    };
    record(shot_lo);
    while (hi - lo > num.s_tol || !(std::abs(shot_lo.endpoint()) < num.p_tol)) {
        if (++c.iterations > num.max_iterations) throw BisectionStall("bisection iteration limit reached");
        const double width = hi - lo;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) throw BisectionStall("bracket no longer representable in floating point");
        ShotResult r = shoot(path, mid, m, num);
        record(r);
        if (r.g() >= 0) {
            lo = mid;
            shot_lo = std::move(r);
        } else {
            hi = mid;
        }
        if (!(hi - lo <= 0.5 * width + 4.0 * std::numeric_limits<double>::epsilon() * hi)) throw BisectionStall("bracket failed to halve");
    }
    if (!shot_lo.argmin_at_boundary(num.boundary_cells))
        throw ReboundDetected("argmin of the bullet is interior at convergence");

    const auto& sol = *shot_lo.solution;
    const MatchResult mr = kappa_match(sol.R.back(), sol.dR.back());
    c.s_lo = lo;
    c.s_hi = hi;
    c.s_m = lo;
    c.bracket_width = hi - lo;
    c.params = shot_lo.params;
    c.eps_at_sm = shot_lo.eps;
    c.lambda = shot_lo.lambda;
    c.lambda_tilde = shot_lo.lambda_tilde;
    c.kappa = mr.kappa;
    c.residual_value = mr.residual_value;
    c.residual_deriv = mr.residual_deriv;
    c.pomega0 = shot_lo.endpoint();
    c.argmin = shot_lo.profile.argmin;
    c.grid_step = shot_lo.profile.grid_step;
    if (!(c.residual_value < num.residual_tol && c.residual_deriv < num.residual_tol))
        throw MatchError("kappa-match residuals above tolerance");

    const double sa = std::max(0.0, c.s_m - num.s_tol), sb = std::min(1.0, c.s_m + num.s_tol);
    c.bracket_valid = shoot(path, sa, m, num).g() > 0 && shoot(path, sb, m, num).g() < 0;
    return c;
}

struct AccumulationRow {
    int m = 0;
    bool ok = false;
    std::string error_kind, error_message;
    std::optional<ModeCertificate> certificate;
};

struct AccumulationTable {
    std::vector<AccumulationRow> rows;
    bool trend_ok = false;        // each |ε(s_m)| ≤ slack × previous
    double trend_slack = 1.5;
    int positive_eps = 0;         // rows with ε(s_m) > 0, reported only
};

inline AccumulationTable accumulation_scan(const ParameterPath& path, const std::vector<int>& m_list,
                                           const ShooterNumerics& num = {}, int jobs = 1, double slack = 1.5) {
    if (!std::is_sorted(m_list.begin(), m_list.end(), [](int a, int b) { return std::abs(a) < std::abs(b); }))
        throw DomainError("accumulation_scan: m list must be ascending in |m|");
    AccumulationTable t;
    t.trend_slack = slack;
    for (int m : m_list) {
        AccumulationRow row;
        row.m = m;
        try {
            row.certificate = find_threshold(path, m, num, jobs);
            row.ok = true;
        } catch (const Error& e) {
            row.error_kind = e.kind();
            row.error_message = e.what();
        }
        t.rows.push_back(std::move(row));
    }
    t.trend_ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : t.rows) {
        if (!r.ok) {
            t.trend_ok = false;
            continue;
        }
        const double e = std::abs(r.certificate->eps_at_sm);
        if (e > slack * prev) t.trend_ok = false;
        prev = e;
        if (r.certificate->eps_at_sm > 0) ++t.positive_eps;
    }
    return t;
}

struct StabilityRow {
    int ell = 0;
    double lambda = 0, lambda_tilde = 0;
    double min_potential = 0;     // min of V₀[λ_{mℓ}] + V₀₀ on the grid
    bool positive = false;
};

struct StabilityReport {
    int m = 0;
    double eps = 0;
    std::vector<StabilityRow> rows;
    bool potential_positive = false;
    bool ordering_ok = false;     // λ̃ non-decreasing in ℓ
    double bullet_min = 0;        // min ℘ of the ℓ = |m| regular branch over the whole grid
    bool bullet_positive = false;
    bool certified() const { return potential_positive && bullet_positive; }
};

inline StabilityReport mode_stability_scan(const BlackHoleParams& p, int m, int ell_max, const ShooterNumerics& num = {},
                                           int grid_points = 10000) {
    const Geometry g = derive_geometry(p);
    if (!(g.eps < 0)) throw DomainError("mode_stability_scan requires eps < 0");
    const int ell0 = std::max(2, std::abs(m));
    if (ell_max < ell0) throw DomainError("ell_max below |m|");
    StabilityReport rep;
    rep.m = m;
    rep.eps = g.eps;
    const auto eigs = solve_angular(g, m, ell_max - ell0 + 1, num.angular);
    rep.potential_positive = rep.ordering_ok = true;
    for (const auto& e : eigs) {
        const RadialPotential pot(g, m, e.lambda);
        StabilityRow row{e.ell, e.lambda, pot.lambda_tilde(), min_real_potential(pot, grid_points), false};
        row.positive = row.min_potential > 0;
        if (!row.positive) rep.potential_positive = false;
        if (!rep.rows.empty() && row.lambda_tilde < rep.rows.back().lambda_tilde) rep.ordering_ok = false;
        rep.rows.push_back(row);
    }
    const RadialPotential pot(g, m, eigs.front().lambda);
    const RadialSolution sol = integrate_regular(pot, num.radial);
    rep.bullet_min = *std::min_element(sol.pomega.begin(), sol.pomega.end());
    rep.bullet_positive = rep.bullet_min > 0;
    return rep;
}

struct StabilitySweep {
    std::vector<StabilityReport> reports;
    std::optional<int> smallest_certified_m;
};

inline StabilitySweep stability_sweep(const BlackHoleParams& p, const std::vector<int>& m_list, int extra_ell = 5,
                                      const ShooterNumerics& num = {}, int jobs = 1) {
    StabilitySweep sw;
    sw.reports.resize(m_list.size());
    parallel_for(m_list.size(), jobs, [&](std::size_t i) {
        const int m = m_list[i];
        sw.reports[i] = mode_stability_scan(p, m, std::max(2, std::abs(m)) + extra_ell, num);
    });
    for (const auto& r : sw.reports)
        if (r.certified() && (!sw.smallest_certified_m || std::abs(r.m) < std::abs(*sw.smallest_certified_m)))
            sw.smallest_certified_m = r.m;
    return sw;
}

} // namespace kads
