#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace kads {

using cplx = std::complex<double>;

/// Dense polynomial, coefficients in ascending order.
template <class T>
struct Poly {
    std::vector<T> c;

    Poly() = default;
    Poly(std::initializer_list<T> l) : c(l) {}
    explicit Poly(std::vector<T> v) : c(std::move(v)) {}

    int degree() const { return static_cast<int>(c.size()) - 1; }
    T operator[](std::size_t i) const { return i < c.size() ? c[i] : T(0); }

    template <class X>
    X operator()(const X& x) const {
        X acc = X(0.0);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + X(c[i]);
        return acc;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly{T(0)};
        std::vector<T> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = T(double(i)) * c[i];
        return Poly(std::move(d));
    }

    // p(x0 + t) as a polynomial in t
    Poly shifted(T x0) const {
        std::vector<T> b = c;
        const std::size_t n = b.size();
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = n - 1; j > i; --j) b[j - 1] += x0 * b[j];
        return Poly(std::move(b));
    }

    // quotient of p(x) by (x - root); the remainder is dropped
    Poly deflated(T root) const {
        if (c.size() <= 1) return Poly{T(0)};
        std::vector<T> q(c.size() - 1);
        T carry = c.back();
        for (std::size_t i = c.size() - 1; i-- > 0;) {
            q[i] = carry;
            carry = c[i] + root * carry;
        }
        return Poly(std::move(q));
    }

    // x^deg p(1/x)
    Poly reversed() const { return Poly(std::vector<T>(c.rbegin(), c.rend())); }

    Poly trimmed(double tol = 0.0) const {
        std::vector<T> b = c;
        while (b.size() > 1 && std::abs(b.back()) <= tol) b.pop_back();
        return Poly(std::move(b));
    }
};

template <class T>
Poly<T> operator+(const Poly<T>& p, const Poly<T>& q) {
    std::vector<T> r(std::max(p.c.size(), q.c.size()), T(0));
    for (std::size_t i = 0; i < p.c.size(); ++i) r[i] += p.c[i];
    for (std::size_t i = 0; i < q.c.size(); ++i) r[i] += q.c[i];
    return Poly<T>(std::move(r));
}

template <class T>
Poly<T> operator-(const Poly<T>& p, const Poly<T>& q) {
    std::vector<T> r(std::max(p.c.size(), q.c.size()), T(0));
    for (std::size_t i = 0; i < p.c.size(); ++i) r[i] += p.c[i];
    for (std::size_t i = 0; i < q.c.size(); ++i) r[i] -= q.c[i];
    return Poly<T>(std::move(r));
}

template <class T>
Poly<T> operator*(const Poly<T>& p, const Poly<T>& q) {
    if (p.c.empty() || q.c.empty()) return Poly<T>{T(0)};
    std::vector<T> r(p.c.size() + q.c.size() - 1, T(0));
    for (std::size_t i = 0; i < p.c.size(); ++i)
        for (std::size_t j = 0; j < q.c.size(); ++j) r[i + j] += p.c[i] * q.c[j];
    return Poly<T>(std::move(r));
}

template <class T>
Poly<T> operator*(T s, Poly<T> p) {
    for (auto& v : p.c) v *= s;
    return p;
}

/// All complex roots via the companion matrix.
inline std::vector<cplx> poly_roots(const Poly<double>& p0) {
    Poly<double> p = p0.trimmed();
    const int n = p.degree();
    if (n < 1) return {};
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -p.c[i] / p.c[n];
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<cplx> out(n);
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

// truncated power series helpers; all vectors hold coefficients 0..n-1
template <class T>
std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b, std::size_t n) {
    std::vector<T> r(n, T(0));
    for (std::size_t i = 0; i < n && i < a.size(); ++i)
        for (std::size_t j = 0; i + j < n && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

template <class T>
std::vector<T> series_div(const std::vector<T>& a, const std::vector<T>& b, std::size_t n) {
    std::vector<T> r(n, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        T acc = i < a.size() ? a[i] : T(0);
        for (std::size_t j = 1; j <= i && j < b.size(); ++j) acc -= b[j] * r[i - j];
        r[i] = acc / b[0];
    }
    return r;
}

/// Second-order jet: value and first two derivatives along one variable.
template <class T>
struct Jet {
    T v{}, d{}, dd{};
    Jet() = default;
    Jet(T v_) : v(v_) {}
    Jet(double v_) requires(!std::is_same_v<T, double>) : v(v_) {}
    Jet(T v_, T d_, T dd_) : v(v_), d(d_), dd(dd_) {}

    static Jet variable(T x) { return {x, T(1), T(0)}; }

    Jet& operator+=(const Jet& o) { v += o.v; d += o.d; dd += o.dd; return *this; }
    Jet& operator-=(const Jet& o) { v -= o.v; d -= o.d; dd -= o.dd; return *this; }
    Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator-(const Jet& a) { return {-a.v, -a.d, -a.dd}; }
    friend Jet operator*(const Jet& a, const Jet& b) {
        return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + T(2) * a.d * b.d + a.v * b.dd};
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        const T q = a.v / b.v;
        const T qd = (a.d - q * b.d) / b.v;
        const T qdd = (a.dd - T(2) * qd * b.d - q * b.dd) / b.v;
        return {q, qd, qdd};
    }
    friend Jet operator*(T s, const Jet& a) { return {s * a.v, s * a.d, s * a.dd}; }
    friend Jet operator*(const Jet& a, T s) { return s * a; }
    friend Jet operator+(const Jet& a, T s) { return {a.v + s, a.d, a.dd}; }
    friend Jet operator+(T s, const Jet& a) { return a + s; }
    friend Jet operator-(const Jet& a, T s) { return {a.v - s, a.d, a.dd}; }
    friend Jet operator-(T s, const Jet& a) { return {s - a.v, -a.d, -a.dd}; }
};

template <class T>
Jet<T> apply(const Jet<T>& u, T f, T f1, T f2) {
    return {f, f1 * u.d, f2 * u.d * u.d + f1 * u.dd};
}

inline Jet<double> sin(const Jet<double>& u) { return apply(u, std::sin(u.v), std::cos(u.v), -std::sin(u.v)); }
inline Jet<double> cos(const Jet<double>& u) { return apply(u, std::cos(u.v), -std::sin(u.v), -std::cos(u.v)); }
inline Jet<double> log(const Jet<double>& u) { return apply(u, std::log(u.v), 1.0 / u.v, -1.0 / (u.v * u.v)); }
inline Jet<double> sqrt(const Jet<double>& u) {
    const double s = std::sqrt(u.v);
    return apply(u, s, 0.5 / s, -0.25 / (s * u.v));
}

// Chain a jet in x to a jet in t given x(t) as a jet.
template <class T>
Jet<T> chain(const Jet<T>& f_of_x, const Jet<double>& x_of_t) {
    return {f_of_x.v, f_of_x.d * x_of_t.d,
            f_of_x.dd * x_of_t.d * x_of_t.d + f_of_x.d * x_of_t.dd};
}

} // namespace kads
