#pragma once

#include <cmath>
#include <random>

#include "kads/geometry.hpp"

namespace kads::testing {

/// Random admissible (M, a, k): rejection sampling over a box, optionally with a > 0.
inline BlackHoleParams random_params(std::mt19937_64& rng, bool positive_spin = false) {
    std::uniform_real_distribution<double> uM(0.05, 2.0), uk(0.3, 2.0), u01(0.0, 1.0);
    for (;;) {
        const double M = uM(rng), k = uk(rng);
        double a = 0.95 * u01(rng) / k;
        if (!positive_spin && u01(rng) < 0.1) a = 0.0;
        if (positive_spin && a < 1e-3) continue;
        const BlackHoleParams p{M, a, k};
        try {
            const Geometry g = derive_geometry(p);
            if (g.r_plus - g.r_minus > 1e-3 * g.r_plus) return p;
        } catch (const Error&) {
        }
    }
}

/// Largest root of Δ by sign-change scan and bisection, independent of the companion matrix.
inline double horizon_by_bisection(const BlackHoleParams& p) {
    const Poly<double> D = delta_poly(p);
    const int n = 200000;
    double lo = 0, hi = 0;
    const double l0 = std::log(1e-4), l1 = std::log(1e3);
    double prev = std::exp(l0);
    for (int i = 1; i < n; ++i) {
        const double r = std::exp(l0 + (l1 - l0) * i / (n - 1));
        if (D(prev) <= 0 && D(r) > 0) {
            lo = prev;
            hi = r;
        }
        prev = r;
    }
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (D(mid) > 0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace kads::testing
