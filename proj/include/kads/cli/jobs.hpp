#pragma once

#include <complex>
#include <map>
#include <numbers>
#include <string>

#include "json.hpp"

#include "kads/angular.hpp"
#include "kads/cli/config.hpp"
#include "kads/cli/output.hpp"
#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/potentials.hpp"
#include "kads/radial.hpp"
#include "kads/shooter.hpp"
#include "kads/wkb.hpp"

namespace kads::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_numerical = 3 };

struct JobResult {
    int exit_code = exit_ok;
    std::map<std::string, std::string> files;   // file name -> content
    std::string error_kind, error_message;
};

namespace detail {

inline json meta(const JobConfig& c) {
    return {{"tool", tool_name}, {"version", tool_version}, {"config_hash", config_hash(c.source)}, {"command", c.command}};
}

inline CsvTable table(const JobConfig& c, std::vector<std::string> header) {
    CsvTable t;
    t.meta = {{"tool", tool_name}, {"version", tool_version}, {"config_hash", config_hash(c.source)}, {"command", c.command}};
    t.header = std::move(header);
    return t;
}

inline json to_json(const BlackHoleParams& p) { return {{"M", p.M}, {"a", p.a}, {"k", p.k}}; }
inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline std::string dump(json j) { return j.dump(2) + "\n"; }

inline json geometry_json(const Geometry& g) {
    return {{"params", to_json(g.params)}, {"r_plus", g.r_plus}, {"r_minus", g.r_minus}, {"r_complex", to_json(g.r_complex)},
            {"Xi", g.Xi}, {"omega_plus", g.omega_plus}, {"eps", g.eps}, {"kappa", g.kappa},
            {"ddelta_plus", g.ddelta_plus}, {"A_plus", g.A_plus}, {"A_minus", g.A_minus}, {"A_complex", to_json(g.A_complex)}};
}

inline CsvTable radial_csv(const JobConfig& c, const RadialSolution& sol) {
    CsvTable t = table(c, {"r", "r_star", "re_R", "im_R", "re_dR", "im_dR", "pomega", "im_W"});
    for (std::size_t i = 0; i < sol.r_star.size(); ++i)
        t.add({sol.r[i], sol.r_star[i], sol.R[i].real(), sol.R[i].imag(), sol.dR[i].real(), sol.dR[i].imag(), sol.pomega[i], sol.im_W[i]});
    return t;
}

inline json rebound_json(const ReboundDiagnostics& d) {
    json touches = json::array();
    for (const auto& t : d.touch_list)
        touches.push_back({{"r_star", t.r_star}, {"pomega", t.pomega}, {"dpomega", t.dpomega}, {"ddpomega", t.ddpomega},
                           {"re_V", t.re_V}, {"amplitude", t.amplitude}, {"concave", t.concave}, {"alarm", t.alarm}});
    return {{"critical_points", d.critical_points}, {"touches", d.touches}, {"violations", d.violations},
            {"alarms", d.alarms}, {"touch_list", touches}};
}

inline json shot_json(const ShotResult& s) {
    json j = {{"params", to_json(s.params)}, {"eps", s.eps}, {"lambda", s.lambda}, {"lambda_tilde", s.lambda_tilde},
              {"g", s.g()}, {"argmin", s.profile.argmin}, {"endpoint", s.endpoint()}, {"window_start", s.profile.window_start},
              {"window_positive", s.profile.window_positive}, {"r_star_lo", s.r_star_lo},
              {"rebound", rebound_json(s.rebound)}};
    if (!std::isnan(s.s)) j["s"] = s.s;
    return j;
}

inline json certificate_json(const ModeCertificate& c) {
    return {{"m", c.m}, {"s_m", c.s_m}, {"s_lo", c.s_lo}, {"s_hi", c.s_hi}, {"bracket_width", c.bracket_width},
            {"params", to_json(c.params)}, {"eps_at_sm", c.eps_at_sm}, {"lambda", c.lambda}, {"lambda_tilde", c.lambda_tilde},
            {"kappa", to_json(c.kappa)}, {"residual_value", c.residual_value}, {"residual_deriv", c.residual_deriv},
            {"pomega0", c.pomega0}, {"argmin", c.argmin}, {"grid_step", c.grid_step}, {"iterations", c.iterations},
            {"bracket_valid", c.bracket_valid}, {"continuity_L", c.continuity_L}, {"window_positive", c.window_positive},
            {"rebound", rebound_json(c.rebound)}};
}

inline void job_geom(const JobConfig& c, JobResult& out) {
    const Geometry g = derive_geometry(*c.params);
    json j = {{"meta", meta(c)}, {"geometry", geometry_json(g)}};
    out.files["geom.json"] = dump(j);
}

inline void job_angular(const JobConfig& c, JobResult& out) {
    const Geometry g = derive_geometry(*c.params);
    const auto eigs = solve_angular(g, *c.m, c.n_eigs, c.numerics.angular);
    json arr = json::array();
    CsvTable t = table(c, {"ell", "theta", "S"});
    for (const auto& e : eigs) {
        arr.push_back({{"ell", e.ell}, {"lambda", e.lambda}, {"lambda_grid", e.lambda_grid},
                       {"error_estimate", e.error_estimate}, {"lambda_tilde", lambda_tilde(g, *c.m, e.lambda)}});
        for (std::size_t i = 0; i < e.theta.size(); ++i) t.add({static_cast<long long>(e.ell), e.theta[i], e.S[i]});
    }
    json j = {{"meta", meta(c)}, {"m", *c.m}, {"params", to_json(g.params)}, {"limit_target", limit_target(g)},
              {"eigenpairs", arr}};
    out.files["angular.json"] = dump(j);
    out.files["angular.csv"] = t.str();
}

inline void job_potentials(const JobConfig& c, JobResult& out) {
    const Geometry g = derive_geometry(*c.params);
    const int m = *c.m;
    const double lam = c.lambda ? *c.lambda : fundamental_lambda(g, m, c.numerics.angular);
    const RadialPotential pot(g, m, lam);
    const CertificateReport cert = positivity_certificates(g, m, c.certificate_points);
    const CruxReport crux = crux_certificate(pot, c.certificate_points);
    json j = {{"meta", meta(c)},
              {"m", m},
              {"params", to_json(g.params)},
              {"lambda", lam},
              {"lambda_tilde", pot.lambda_tilde()},
              {"certificates",
               {{"dP", cert.dP}, {"dP_positive", cert.dP_positive}, {"v1_lower_min", cert.v1_lower_min},
                {"v1_upper_min", cert.v1_upper_min}, {"v1_ok", cert.v1_ok}, {"quad_min", cert.quad_min},
                {"quad_ok", cert.quad_ok}, {"all_ok", cert.all_ok()}}},
              {"crux",
               {{"D", crux.D}, {"eps_tilde1", crux.eps_tilde1}, {"eps_tilde2", crux.eps_tilde2}, {"eps0", crux.eps0},
                {"N_empty", crux.N_empty}, {"N_min_r", crux.N_empty ? json(nullptr) : json(crux.N_min_r)},
                {"three_M_over_Xi", crux.three_M_over_Xi}, {"f_negative_on_N", crux.f_negative_on_N},
                {"N_beyond_3M", crux.N_beyond_3M}}},
              {"min_real_potential", min_real_potential(pot, c.certificate_points)}};
    out.files["potentials.json"] = dump(j);
    CsvTable t = table(c, {"r", "r_star", "V0", "V00", "V1"});
    for (double r : certificate_grid(g, c.certificate_points)) {
        const RadialPoint p = radial_point_from_r(g, r);
        const PotentialValues v = pot.eval(p);
        t.add({r, p.r_star, v.V0, v.V00, v.V1});
    }
    out.files["potentials.csv"] = t.str();
}

inline void job_shoot(const JobConfig& c, JobResult& out) {
    const ShotResult s = c.params ? shoot_params(*c.params, *c.m, c.numerics) : shoot(*c.path, *c.s, *c.m, c.numerics);
    json j = {{"meta", meta(c)}, {"m", *c.m}, {"shot", shot_json(s)}};
    out.files["shot.json"] = dump(j);
    out.files["radial.csv"] = radial_csv(c, *s.solution).str();
}

inline void job_find_mode(const JobConfig& c, JobResult& out, int jobs) {
    const ModeCertificate cert = find_threshold(*c.path, *c.m, c.numerics, jobs);
    json j = {{"meta", meta(c)}, {"certificate", certificate_json(cert)}};
    out.files["certificate.json"] = dump(j);
    CsvTable t = table(c, {"s", "eps", "g"});
    for (const auto& p : cert.coarse) t.add({p.s, p.eps, p.g});
    out.files["coarse_scan.csv"] = t.str();
    const ShotResult s = shoot(*c.path, cert.s_m, *c.m, c.numerics);
    out.files["radial.csv"] = radial_csv(c, *s.solution).str();
}

inline void job_wkb(const JobConfig& c, JobResult& out) {
    BlackHoleParams p;
    json where;
    if (c.params) {
        p = *c.params;
    } else {
        const double s = c.s ? *c.s : c.path->solve_eps(*c.eps_target);
        p = c.path->at(s);
        where["s"] = s;
    }
    const Geometry g = derive_geometry(p);
    const int m = *c.m;
    const RadialPotential pot(g, m, fundamental_lambda(g, m, c.numerics.angular));
    const double w = wkb_frequency(pot);
    const WkbBasis b = wkb_basis(pot, w, c.wkb);
    const WkbSlopes sl = wkb_slopes(pot, w);
    const bool regime = WkbRegime{}.contains(g.eps, m);
    auto neg = [&](const NegativityReport& r) {
        json j = {{"max_open", r.max_open}, {"argmax", r.argmax}, {"min", r.min}, {"argmin", r.argmin},
                  {"negative", r.negative}, {"certified", r.certified}};
        if (r.interference)
            j.update({{"theta", r.theta}, {"dip", r.dip}, {"dip_kappa", r.dip_kappa}, {"q_at_dip", r.q_at_dip},
                      {"q_min", r.q_min}, {"q_argmin", r.q_argmin}, {"leading_constant", r.leading_constant}});
        return j;
    };
    json phases = json::array();
    for (int i = 0; i < c.phases; ++i) {
        const double th = 2.0 * std::numbers::pi * i / c.phases;
        phases.push_back(neg(negativity_scan(b, std::polar(1.0, th), 1.0, m, regime)));
    }
    json j = {{"meta", meta(c)},
              {"m", m},
              {"params", to_json(p)},
              {"eps", g.eps},
              {"in_regime", regime},
              {"varpi", w},
              {"window", b.window},
              {"F_at_window", b.F.front()},
              {"F_quadrature_at_window", error_control_F(pot, w, -b.window)},
              {"envelope_constant", envelope_constant(b, m)},
              {"envelope_ok", b.envelope_ok},
              {"envelope_excess", b.envelope_excess},
              {"wronskian_drift", b.wronskian_drift},
              {"duhamel_defect", {duhamel_defect(b, pot, 1), duhamel_defect(b, pot, 2)}},
              {"slopes", {{"V0pp", sl.V0pp}, {"V00p", sl.V00p}, {"V00pp", sl.V00pp}, {"V1p", sl.V1p}, {"beta1", sl.beta1}, {"beta2", sl.beta2}}},
              {"R1", neg(negativity_scan(b, 1.0, 0.0, m, regime))},
              {"R2", neg(negativity_scan(b, 0.0, 1.0, m, regime))},
              {"combination", neg(negativity_scan(b, c.A1, c.A2, m, regime))},
              {"interference_phases", phases}};
    j.update(where);
    out.files["wkb.json"] = dump(j);
    CsvTable t = table(c, {"r_star", "F", "envelope", "re_R1", "im_R1", "re_dR1", "im_dR1", "re_R2", "im_R2", "re_dR2",
                           "im_dR2", "pomega1", "pomega2"});
    for (std::size_t i = 0; i < b.r_star.size(); ++i)
        t.add({b.r_star[i], b.F[i], std::expm1(b.F[i]), b.R1[i].real(), b.R1[i].imag(), b.dR1[i].real(), b.dR1[i].imag(),
               b.R2[i].real(), b.R2[i].imag(), b.dR2[i].real(), b.dR2[i].imag(), bullet(b.R1[i], b.dR1[i]),
               bullet(b.R2[i], b.dR2[i])});
    out.files["wkb_basis.csv"] = t.str();
}

inline void job_scan(const JobConfig& c, JobResult& out, int jobs) {
    const AccumulationTable tab = accumulation_scan(*c.path, c.m_list, c.numerics, jobs);
    CsvTable t = table(c, {"m", "status", "s_m", "eps_at_sm", "bracket_width", "pomega0", "residual_value",
                           "residual_deriv", "touches", "violations", "error_kind"});
    CsvTable prof = table(c, {"m", "s_m", "r_star", "pomega"});
    json rows = json::array();
    for (const auto& r : tab.rows) {
        if (r.ok) {
            const auto& ce = *r.certificate;
            t.add({static_cast<long long>(r.m), std::string("ok"), ce.s_m, ce.eps_at_sm, ce.bracket_width, ce.pomega0,
                   ce.residual_value, ce.residual_deriv, static_cast<long long>(ce.rebound.touches),
                   static_cast<long long>(ce.rebound.violations), std::string()});
            rows.push_back(certificate_json(ce));
            const ShotResult s = shoot(*c.path, ce.s_m, r.m, c.numerics);
            for (std::size_t i = 0; i < s.solution->r_star.size(); ++i)
                prof.add({static_cast<long long>(r.m), ce.s_m, s.solution->r_star[i], s.solution->pomega[i]});
        } else {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            t.add({static_cast<long long>(r.m), std::string("failed"), nan, nan, nan, nan, nan, nan, 0LL, 0LL, r.error_kind});
            rows.push_back({{"m", r.m}, {"error_kind", r.error_kind}, {"error_message", r.error_message}});
        }
    }
    json j = {{"meta", meta(c)}, {"trend_ok", tab.trend_ok}, {"trend_slack", tab.trend_slack},
              {"positive_eps_rows", tab.positive_eps}, {"rows", rows}};
    out.files["accumulation.json"] = dump(j);
    out.files["accumulation.csv"] = t.str();
    out.files["pomega_profiles.csv"] = prof.str();
}

inline void job_stability(const JobConfig& c, JobResult& out, int jobs) {
    std::vector<int> ms = c.m_list;
    if (c.m) ms.insert(ms.begin(), *c.m);
    const StabilitySweep sw = stability_sweep(*c.params, ms, c.extra_ell, c.numerics, jobs);
    CsvTable t = table(c, {"m", "ell", "lambda", "lambda_tilde", "min_potential", "positive"});
    json reps = json::array();
    for (const auto& r : sw.reports) {
        for (const auto& row : r.rows)
            t.add({static_cast<long long>(r.m), static_cast<long long>(row.ell), row.lambda, row.lambda_tilde,
                   row.min_potential, static_cast<long long>(row.positive)});
        reps.push_back({{"m", r.m}, {"eps", r.eps}, {"potential_positive", r.potential_positive}, {"ordering_ok", r.ordering_ok},
                        {"bullet_min", r.bullet_min}, {"bullet_positive", r.bullet_positive}, {"certified", r.certified()}});
    }
    json j = {{"meta", meta(c)}, {"params", to_json(*c.params)}, {"reports", reps},
              {"smallest_certified_m", sw.smallest_certified_m ? json(*sw.smallest_certified_m) : json(nullptr)}};
    out.files["stability.json"] = dump(j);
    out.files["stability.csv"] = t.str();
}

} // namespace detail

/// Runs one validated job. Artifacts are returned in memory; on failure only error.json is produced.
inline JobResult run_job(const JobConfig& c, int jobs = 1) {
    JobResult out;
    try {
        if (c.command == "geom") detail::job_geom(c, out);
        else if (c.command == "angular") detail::job_angular(c, out);
        else if (c.command == "potentials") detail::job_potentials(c, out);
        else if (c.command == "shoot") detail::job_shoot(c, out);
        else if (c.command == "find-mode") detail::job_find_mode(c, out, jobs);
        else if (c.command == "wkb") detail::job_wkb(c, out);
        else if (c.command == "scan") detail::job_scan(c, out, jobs);
        else if (c.command == "stability") detail::job_stability(c, out, jobs);
        else throw ConfigError("unknown command '" + c.command + "'");
    } catch (const ConfigError& e) {
        out = {};
        out.exit_code = exit_config;
        out.error_kind = e.kind();
        out.error_message = e.what();
    } catch (const Error& e) {
        out = {};
        out.exit_code = exit_numerical;
        out.error_kind = e.kind();
        out.error_message = e.what();
    } catch (const std::exception& e) {
        out = {};
        out.exit_code = exit_numerical;
        out.error_kind = "InternalError";
        out.error_message = e.what();
    }
    if (out.exit_code == exit_numerical)
        out.files["error.json"] = detail::dump({{"meta", detail::meta(c)}, {"error", {{"kind", out.error_kind}, {"message", out.error_message}}}});
    return out;
}

} // namespace kads::cli
