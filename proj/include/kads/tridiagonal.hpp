#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "kads/errors.hpp"

namespace kads {

/// Symmetric tridiagonal matrix: diagonal d[0..n), off-diagonal e[0..n-1).
struct SymTridiag {
    std::vector<double> d, e;
    std::size_t size() const { return d.size(); }
};

/// Number of eigenvalues strictly below x (Sturm sequence count).
inline std::size_t sturm_count(const SymTridiag& T, double x) {
    const double tiny = std::numeric_limits<double>::min() * 1e4;
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double e2 = i == 0 ? 0.0 : T.e[i - 1] * T.e[i - 1];
        q = T.d[i] - x - (i == 0 ? 0.0 : e2 / q);
        if (std::abs(q) < tiny) q = -tiny;
        if (q < 0) ++count;
    }
    return count;
}

inline void gershgorin(const SymTridiag& T, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double r = (i > 0 ? std::abs(T.e[i - 1]) : 0.0) + (i + 1 < T.size() ? std::abs(T.e[i]) : 0.0);
        lo = std::min(lo, T.d[i] - r);
        hi = std::max(hi, T.d[i] + r);
    }
}

/// The j-th smallest eigenvalue (0-based) by bisection on the Sturm count.
inline double kth_eigenvalue(const SymTridiag& T, std::size_t j) {
    double lo, hi;
    gershgorin(T, lo, hi);
    const double pad = 1e-12 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
    lo -= pad;
    hi += pad;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(T, mid) > j) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {

// Solve (T − σI) x = b with partial pivoting (general tridiagonal LU, as in LAPACK gttrf/gttrs).
inline std::vector<double> shifted_solve(const SymTridiag& T, double sigma, std::vector<double> b) {
    const std::size_t n = T.size();
    std::vector<double> dl(T.e), d(T.d), du(T.e), du2(n, 0.0);
    std::vector<char> swapped(n, 0);
    const double eps = std::numeric_limits<double>::epsilon();
    double scale = std::abs(sigma);
    for (double v : d) scale = std::max(scale, std::abs(v));
    for (double v : T.e) scale = std::max(scale, std::abs(v));
    const double floor = eps * scale + std::numeric_limits<double>::min();
    for (auto& v : d) v -= sigma;

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (std::abs(d[i]) < floor) d[i] = floor;
            const double f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            const double tmp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = tmp - f * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
            swapped[i] = 1;
        }
    }
    if (std::abs(d[n - 1]) < floor) d[n - 1] = floor;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (swapped[i]) std::swap(b[i], b[i + 1]);
        b[i + 1] -= dl[i] * b[i];
    }
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    if (n > 2)
        for (std::size_t i = n - 2; i-- > 0;) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    return b;
}

} // namespace detail

/// Unit eigenvector for a converged eigenvalue by inverse iteration.
inline std::vector<double> eigenvector(const SymTridiag& T, double lambda) {
    const std::size_t n = T.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.7 * double(i) + 0.3);
    for (int it = 0; it < 4; ++it) {
        x = detail::shifted_solve(T, lambda, std::move(x));
        double nrm = 0;
        for (double v : x) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (!std::isfinite(nrm) || nrm == 0) throw NonConvergence("inverse iteration failed");
        for (double& v : x) v /= nrm;
    }
    // fix the sign so the largest component is positive
    const auto it = std::max_element(x.begin(), x.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*it < 0)
        for (double& v : x) v = -v;
    return x;
}

} // namespace kads
