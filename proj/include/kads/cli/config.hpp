#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "kads/errors.hpp"
#include "kads/geometry.hpp"
#include "kads/shooter.hpp"
#include "kads/wkb.hpp"

namespace kads::cli {

using nlohmann::json;

inline const std::set<std::string>& commands() {
    static const std::set<std::string> c{"geom", "angular", "potentials", "shoot", "find-mode", "wkb", "scan", "stability"};
    return c;
}

struct JobConfig {
    std::string command;
    std::optional<BlackHoleParams> params;
    std::optional<ParameterPath> path;
    std::optional<double> s;
    std::optional<double> eps_target;
    std::optional<int> m;
    std::vector<int> m_list;
    int n_eigs = 1;
    int extra_ell = 5;
    std::optional<double> lambda;
    std::complex<double> A1{1.0, 0.0}, A2{0.0, 0.0};
    int phases = 8;
    ShooterNumerics numerics;
    WkbNumerics wkb;
    int certificate_points = 10000;
    json source;   // the validated document, for hashing
};

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) fail(where, "unknown key '" + k + "'");
    }
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "expected a finite number");
    return v;
}

inline double positive(const json& j, const std::string& where) {
    const double v = number(j, where);
    if (!(v > 0)) fail(where, "must be positive");
    return v;
}

inline int integer(const json& j, const std::string& where, int lo = std::numeric_limits<int>::min()) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    const long long v = j.get<long long>();
    if (v < lo || v > std::numeric_limits<int>::max()) fail(where, "integer out of range");
    return static_cast<int>(v);
}

inline BlackHoleParams params(const json& j, const std::string& where) {
    only_keys(j, where, {"M", "a", "k"});
    for (const char* k : {"M", "a", "k"})
        if (!j.contains(k)) fail(where, std::string("missing key '") + k + "'");
    return {number(j["M"], where + ".M"), number(j["a"], where + ".a"), number(j["k"], where + ".k")};
}

inline std::complex<double> complex_number(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "expected [re, im]");
    return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline int m_value(const json& j, const std::string& where) {
    const int m = integer(j, where);
    if (std::abs(m) < 2) fail(where, "|m| must be >= 2");
    return m;
}

inline void numerics(const json& j, JobConfig& c) {
    const std::string w = "numerics";
    only_keys(j, w, {"rtol", "seed_order", "delta", "seed_tol", "n_dense", "angular_resolution", "angular_max_rel_error",
                     "coarse_samples", "s_tol", "p_tol", "residual_tol", "zero_tol", "window_factor", "wkb_rtol",
                     "wkb_grid", "envelope_slack", "certificate_points"});
    auto& n = c.numerics;
    if (j.contains("rtol")) n.radial.rtol = positive(j["rtol"], w + ".rtol");
    if (j.contains("seed_order")) n.radial.seed_order = integer(j["seed_order"], w + ".seed_order", 10);
    if (j.contains("delta")) {
        n.radial.delta = positive(j["delta"], w + ".delta");
        if (n.radial.delta > 1e-2) fail(w + ".delta", "must be <= 1e-2");
    }
    if (j.contains("seed_tol")) n.radial.seed_tol = positive(j["seed_tol"], w + ".seed_tol");
    if (j.contains("n_dense")) n.radial.n_dense = integer(j["n_dense"], w + ".n_dense", 16);
    if (j.contains("angular_resolution")) {
        n.angular.resolution = integer(j["angular_resolution"], w + ".angular_resolution", 16);
        if (n.angular.resolution & (n.angular.resolution - 1)) fail(w + ".angular_resolution", "must be a power of two");
    }
    if (j.contains("angular_max_rel_error")) n.angular.max_rel_error = positive(j["angular_max_rel_error"], w + ".angular_max_rel_error");
    if (j.contains("coarse_samples")) n.coarse_samples = integer(j["coarse_samples"], w + ".coarse_samples", 2);
    if (j.contains("s_tol")) n.s_tol = positive(j["s_tol"], w + ".s_tol");
    if (j.contains("p_tol")) n.p_tol = positive(j["p_tol"], w + ".p_tol");
    if (j.contains("residual_tol")) n.residual_tol = positive(j["residual_tol"], w + ".residual_tol");
    if (j.contains("zero_tol")) n.zero_tol = positive(j["zero_tol"], w + ".zero_tol");
    if (j.contains("window_factor")) n.window_factor = positive(j["window_factor"], w + ".window_factor");
    if (j.contains("wkb_rtol")) c.wkb.rtol = positive(j["wkb_rtol"], w + ".wkb_rtol");
    if (j.contains("wkb_grid")) c.wkb.n_grid = integer(j["wkb_grid"], w + ".wkb_grid", 16);
    if (j.contains("envelope_slack")) c.wkb.envelope_slack = positive(j["envelope_slack"], w + ".envelope_slack");
    if (j.contains("certificate_points")) c.certificate_points = integer(j["certificate_points"], w + ".certificate_points", 16);
}

} // namespace detail

/// Validates a parsed document and builds the job. Throws ConfigError on any schema violation.
inline JobConfig parse_config(const json& j) {
    using namespace detail;
    only_keys(j, "config", {"command", "params", "path", "s", "eps_target", "m", "m_list", "n_eigs", "extra_ell",
                            "lambda", "amplitudes", "phases", "numerics"});
    JobConfig c;
    c.source = j;
    if (!j.contains("command") || !j["command"].is_string()) fail("command", "missing or not a string");
    c.command = j["command"].get<std::string>();
    if (!commands().count(c.command)) fail("command", "unknown command '" + c.command + "'");

    if (j.contains("params")) c.params = params(j["params"], "params");
    if (j.contains("path")) {
        const json& p = j["path"];
        if (p.is_string()) {
            if (p.get<std::string>() != "reference") fail("path", "the only named path is 'reference'");
            c.path = reference_path();
        } else {
            only_keys(p, "path", {"waypoints"});
            if (!p.contains("waypoints") || !p["waypoints"].is_array() || p["waypoints"].size() < 2)
                fail("path.waypoints", "expected an array of at least two parameter sets");
            ParameterPath path;
            for (std::size_t i = 0; i < p["waypoints"].size(); ++i)
                path.waypoints.push_back(params(p["waypoints"][i], "path.waypoints[" + std::to_string(i) + "]"));
            c.path = path;
        }
    }
    if (j.contains("s")) {
        c.s = number(j["s"], "s");
        if (*c.s < 0 || *c.s > 1) fail("s", "must lie in [0, 1]");
    }
    if (j.contains("eps_target")) c.eps_target = number(j["eps_target"], "eps_target");
    if (j.contains("m")) c.m = m_value(j["m"], "m");
    if (j.contains("m_list")) {
        if (!j["m_list"].is_array() || j["m_list"].empty()) fail("m_list", "expected a non-empty array");
        for (std::size_t i = 0; i < j["m_list"].size(); ++i) c.m_list.push_back(m_value(j["m_list"][i], "m_list[" + std::to_string(i) + "]"));
    }
    if (j.contains("n_eigs")) c.n_eigs = integer(j["n_eigs"], "n_eigs", 1);
    if (j.contains("extra_ell")) c.extra_ell = integer(j["extra_ell"], "extra_ell", 0);
    if (j.contains("lambda")) c.lambda = number(j["lambda"], "lambda");
    if (j.contains("amplitudes")) {
        only_keys(j["amplitudes"], "amplitudes", {"A1", "A2"});
        if (j["amplitudes"].contains("A1")) c.A1 = complex_number(j["amplitudes"]["A1"], "amplitudes.A1");
        if (j["amplitudes"].contains("A2")) c.A2 = complex_number(j["amplitudes"]["A2"], "amplitudes.A2");
        if (c.A1 == 0.0 && c.A2 == 0.0) fail("amplitudes", "A1 and A2 cannot both vanish");
    }
    if (j.contains("phases")) c.phases = integer(j["phases"], "phases", 0);
    if (j.contains("numerics")) numerics(j["numerics"], c);

    const std::string& cmd = c.command;
    auto need = [&](bool ok, const char* what) {
        if (!ok) fail(cmd, what);
    };
    if (cmd == "geom") need(c.params.has_value(), "requires 'params'");
    if (cmd == "angular" || cmd == "potentials") {
        need(c.params.has_value(), "requires 'params'");
        need(c.m.has_value(), "requires 'm'");
    }
    if (cmd == "shoot") {
        need(c.m.has_value(), "requires 'm'");
        need(c.params.has_value() != (c.path.has_value() && c.s.has_value()), "requires either 'params' or 'path' with 's'");
    }
    if (cmd == "find-mode") {
        need(c.path.has_value(), "requires 'path'");
        need(c.m.has_value(), "requires 'm'");
    }
    if (cmd == "wkb") {
        need(c.m.has_value(), "requires 'm'");
        const bool from_path = c.path.has_value() && (c.s.has_value() != c.eps_target.has_value());
        need(c.params.has_value() != from_path, "requires either 'params' or 'path' with exactly one of 's', 'eps_target'");
    }
    if (cmd == "scan") {
        need(c.path.has_value(), "requires 'path'");
        need(!c.m_list.empty(), "requires 'm_list'");
    }
    if (cmd == "stability") {
        need(c.params.has_value(), "requires 'params'");
        need(c.m.has_value() || !c.m_list.empty(), "requires 'm' or 'm_list'");
    }
    return c;
}

inline JobConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

} // namespace kads::cli
