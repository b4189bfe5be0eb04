#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "CLI11.hpp"
#include "kads/shooter.hpp"
#include "kads/wkb.hpp"
#include "spectral_oracle.hpp"
#include "support.hpp"

using namespace kads;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int passed = 0, failed = 0;

template <class Fn>
void criterion(int id, const char* name, double limit_s, Fn&& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const Error& e) {
        o = {false, fmt("%s: %s", e.kind(), e.what())};
    }
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool ok = o.pass && dt < limit_s;
    (ok ? passed : failed)++;
    std::printf("criterion %d %s  %s: %s (%.1f s, limit %.0f s)\n", id, ok ? "PASS" : "FAIL", name, o.detail.c_str(), dt, limit_s);
    std::fflush(stdout);
}

Outcome geometry_oracles() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ue(-6.0, 3.0), uq(-3.0, 1.5);
    boost::math::quadrature::exp_sinh<double> es;
    double horizon = 0, tort = 0, trip = 0;
    for (int i = 0; i < 200; ++i) {
        const BlackHoleParams p = kads::testing::random_params(rng);
        const Geometry g = derive_geometry(p);
        horizon = std::max(horizon, std::abs(g.r_plus - kads::testing::horizon_by_bisection(p)) / g.r_plus);
        const double a2 = p.a * p.a;
        const Poly<double> D = delta_poly(p);
        const double rq = g.r_plus * (1.0 + std::pow(10.0, uq(rng)));
        const double quad = -es.integrate([&](double x) { return (x * x + a2) / D(x); }, rq, std::numeric_limits<double>::infinity(), 1e-14);
        tort = std::max(tort, std::abs(tortoise(g, rq) - quad) / std::max(1.0, std::abs(quad)));
        const double r = g.r_plus * (1.0 + std::pow(10.0, ue(rng)));
        trip = std::max(trip, std::abs(inverse_tortoise(g, tortoise(g, r)).r - r) / r);
    }
    return {horizon < 1e-12 && tort < 1e-10 && trip < 1e-10,
            fmt("200 sets, max horizon rel err %.1e, tortoise err %.1e, inverse round trip %.1e", horizon, tort, trip)};
}

Outcome angular_limit() {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    const double target = limit_target(g);
    const double d25 = std::abs(fundamental_ratio(g, 25) - target);
    const double d200 = std::abs(fundamental_ratio(g, 200) - target);
    double oracle = 0;
    for (int m : {2, 4, 8}) {
        const double lam = fundamental_lambda(g, m), ref = kads::testing::spectral_angular(g, m).front();
        oracle = std::max(oracle, std::abs(lam - ref) / ref);
    }
    const double X2 = g.Xi * g.Xi;
    return {d200 < d25 && d200 < 0.05 * X2 && oracle < 1e-6,
            fmt("gap %.4e at m=25, %.4e at m=200 (bound %.4e), dense oracle rel err %.1e", d25, d200, 0.05 * X2, oracle)};
}

Outcome potential_certificates() {
    std::mt19937_64 rng(3);
    int fails = 0, checks = 0;
    double dp = std::numeric_limits<double>::infinity(), quad = dp, v1 = dp;
    for (int i = 0; i < 100; ++i) {
        const Geometry g = derive_geometry(kads::testing::random_params(rng, true));
        for (int m : {2, 10, 50}) {
            const CertificateReport c = positivity_certificates(g, m, 10000);
            ++checks;
            if (!c.all_ok()) ++fails;
            dp = std::min(dp, *std::min_element(c.dP.begin(), c.dP.end()));
            quad = std::min(quad, c.quad_min);
            v1 = std::min({v1, c.v1_lower_min, c.v1_upper_min});
        }
    }
    return {fails == 0, fmt("%d/%d failures; min dP %.2e, min V1 margin %.2e, min quadratic margin %.2e", fails, checks, dp, v1, quad)};
}

Outcome radial_identities() {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> um(2, 30);
    std::uniform_real_distribution<double> ul(0.0, 0.5);
    double worst = 0, log_ratio = 0, log_steps = 0, worst_ratio = 0;
    const int n = 20;
    for (int i = 0; i < n; ++i) {
        const BlackHoleParams p = kads::testing::random_params(rng);
        const int m = um(rng);
        const Geometry g = derive_geometry(p);
        const RadialPotential pot(g, m, fundamental_lambda(g, m) * (1.0 + ul(rng)));
        RadialNumerics tight, a, b;
        tight.rtol = 1e-12;
        a.rtol = 1e-10;
        b.rtol = 5e-11;
        worst = std::max(worst, identity_defects(integrate_regular(pot, tight), pot).max());
        const RadialSolution sa = integrate_regular(pot, a), sb = integrate_regular(pot, b);
        const double r = identity_defects(sb, pot).max() / identity_defects(sa, pot).max();
        worst_ratio = std::max(worst_ratio, r);
        log_ratio += std::log(r) / n;
        log_steps += std::log(double(sb.nodes()) / double(sa.nodes())) / n;
    }
    // step control proportional to the tolerance: error halves, steps grow by 2^(1/8)
    const double ratio = std::exp(log_ratio), steps = std::exp(log_steps), expect_steps = std::pow(2.0, 1.0 / 8.0);
    const bool order_ok = worst_ratio < 1.0 && ratio > 0.35 && ratio < 0.75 && std::abs(steps / expect_steps - 1.0) < 0.05;
    return {worst < 1e-7 && order_ok,
            fmt("max defect %.2e at rtol 1e-12; on halving rtol defects scale by %.3f (worst %.3f), steps by %.4f (2^(1/8) = %.4f)",
                worst, ratio, worst_ratio, steps, expect_steps)};
}

RadialPotential reference_potential(double eps, int m) {
    const ParameterPath path = reference_path();
    const Geometry g = derive_geometry(path.at(path.solve_eps(eps)));
    return RadialPotential(g, m, fundamental_lambda(g, m));
}

Outcome wkb_envelope() {
    bool env = true;
    std::vector<double> C;
    std::string cs;
    double ratio = 0;
    for (int m : {20, 40, 80}) {
        const RadialPotential pot = reference_potential(0.05, m);
        const WkbBasis b = wkb_basis(pot, wkb_frequency(pot));
        env = env && b.envelope_ok;
        ratio = std::max(ratio, b.envelope_ratio);
        C.push_back(envelope_constant(b, m));
        cs += fmt("%s%.3f", cs.empty() ? "" : ", ", C.back());
    }
    const double spread = *std::max_element(C.begin(), C.end()) / *std::min_element(C.begin(), C.end());
    return {env && spread < 2.0, fmt("envelope %s (max residual/(exp F - 1) = %.3f); C = %s for m = 20, 40, 80, spread %.2f (limit 2)",
                                     env ? "holds at every node" : "violated", ratio, cs.c_str(), spread)};
}

Outcome negativity(double eps, int m) {
    const RadialPotential pot = reference_potential(eps, m);
    const WkbBasis b = wkb_basis(pot, wkb_frequency(pot));
    const bool regime = WkbRegime{}.contains(pot.geometry().eps, m);
    const NegativityReport r1 = negativity_scan(b, 1.0, 0.0, m, regime), r2 = negativity_scan(b, 0.0, 1.0, m, regime);
    double dip = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < 8; ++j) {
        const double th = 2.0 * std::numbers::pi * j / 8;
        dip = std::max(dip, negativity_scan(b, std::polar(1.0, th), 1.0, m, regime).q_at_dip);
    }
    const WkbSlopes s = wkb_slopes(pot, b.varpi);
    return {r1.negative && r2.negative && dip <= -3.5,
            fmt("max p[R1] %.3e, max p[R2] %.3e, weakest dip q %.4f over 8 phases; slopes beta1 %.1f, beta2 %.1f", r1.max_open,
                r2.max_open, dip, s.beta1, s.beta2)};
}

Outcome mode_stability(int jobs) {
    const std::vector<int> ms{2, 4, 8, 16, 32, 64, 100};
    const StabilitySweep sw = stability_sweep({1.0, 0.2, 1.0}, ms, 5, {}, jobs);
    std::string list;
    for (const auto& r : sw.reports)
        if (r.certified()) list += fmt("%s%d", list.empty() ? "" : ",", r.m);
    double minV = std::numeric_limits<double>::infinity();
    for (const auto& r : sw.reports)
        for (const auto& row : r.rows) minV = std::min(minV, row.min_potential);
    return {sw.smallest_certified_m.has_value(),
            fmt("eps %.4f; certified m = {%s}; min V0+V00 over all (m, l) %.3f", sw.reports.front().eps, list.c_str(), minV)};
}

ReboundDiagnostics scan_rebound;

Outcome end_to_end(int jobs) {
    const AccumulationTable t = accumulation_scan(reference_path(), {8, 12, 16, 24}, {}, jobs, 1.5);
    bool ok = t.trend_ok;
    std::string rows;
    for (const auto& r : t.rows) {
        if (!r.ok) {
            ok = false;
            rows += fmt(" m=%d %s;", r.m, r.error_kind.c_str());
            continue;
        }
        const ModeCertificate& c = *r.certificate;
        scan_rebound.merge(c.rebound);
        ok = ok && c.bracket_width < 1e-8 && std::abs(c.pomega0) < 1e-8 && c.residual_value < 1e-6 && c.residual_deriv < 1e-6;
        rows += fmt(" m=%d s=%.10f eps=%.5f |p(0)|=%.1e res=%.1e;", r.m, c.s_m, c.eps_at_sm, std::abs(c.pomega0),
                    std::max(c.residual_value, c.residual_deriv));
    }
    return {ok, fmt("trend %s;%s", t.trend_ok ? "decreasing" : "not decreasing", rows.c_str())};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance run"};
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);
    if (jobs == 0) jobs = default_jobs();

    criterion(1, "geometry oracles", 10, geometry_oracles);
    criterion(2, "angular semiclassical limit", 120, angular_limit);
    criterion(3, "potential certificates", 60, potential_certificates);
    criterion(4, "radial identities", 120, radial_identities);
    criterion(5, "WKB envelope", 60, wkb_envelope);
    criterion(6, "negativity above threshold", 60, [] { return negativity(0.05, 60); });
    criterion(7, "mode stability below the critical spin", 120, [&] { return mode_stability(jobs); });
    criterion(8, "end-to-end shooting", 900, [&] { return end_to_end(jobs); });
    criterion(9, "no rebound", 1, [] {
        return Outcome{scan_rebound.critical_points > 0 && scan_rebound.violations == 0,
                       fmt("%d critical points, %d near-touches, %d violations, %d alarms", scan_rebound.critical_points,
                           scan_rebound.touches, scan_rebound.violations, scan_rebound.alarms)};
    });

    for (double eps : {0.02, 0.03}) {
        const Outcome o = negativity(eps, 60);
        std::printf("diagnostic eps=%.2f m=60: %s\n", eps, o.detail.c_str());
    }
    std::printf("acceptance: %d of %d criteria passed\n", passed, passed + failed);
    return failed == 0 ? 0 : 1;
}
