#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace kads {

/// Polynomial with integer coefficients in the four symbols (M, a, k, r).
/// Used to expand the horizon-regular potentials without floating cancellation.
class ExactPoly {
public:
    using Exps = std::array<int, 4>;
    enum Var { M = 0, A = 1, K = 2, R = 3 };

    ExactPoly() = default;
    ExactPoly(std::int64_t c) {
        if (c != 0) terms_[{0, 0, 0, 0}] = c;
    }
    static ExactPoly var(Var v, int power = 1) {
        ExactPoly p;
        Exps e{0, 0, 0, 0};
        e[v] = power;
        p.terms_[e] = 1;
        return p;
    }

    const std::map<Exps, std::int64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    ExactPoly& operator+=(const ExactPoly& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    ExactPoly& operator-=(const ExactPoly& o) {
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend ExactPoly operator+(ExactPoly a, const ExactPoly& b) { return a += b; }
    friend ExactPoly operator-(ExactPoly a, const ExactPoly& b) { return a -= b; }
    friend ExactPoly operator-(const ExactPoly& a) { return ExactPoly(0) - a; }
    friend ExactPoly operator*(const ExactPoly& a, const ExactPoly& b) {
        ExactPoly out;
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exps e;
                for (int i = 0; i < 4; ++i) e[i] = ea[i] + eb[i];
                out.add_term(e, ca * cb);
            }
        return out;
    }

    ExactPoly pow(int n) const {
        ExactPoly out(1);
        for (int i = 0; i < n; ++i) out = out * *this;
        return out;
    }

    // formal derivative in one symbol
    ExactPoly diff(Var v) const {
        ExactPoly out;
        for (const auto& [e, c] : terms_) {
            if (e[v] == 0) continue;
            Exps f = e;
            f[v] -= 1;
            out.add_term(f, c * e[v]);
        }
        return out;
    }

    int degree(Var v) const {
        int d = -1;
        for (const auto& [e, c] : terms_) d = std::max(d, e[v]);
        return d;
    }

    /// Coefficient of r^j as a polynomial in (M, a, k); index j ascending.
    std::vector<ExactPoly> coefficients_in_r() const {
        std::vector<ExactPoly> out(std::max(0, degree(R) + 1));
        for (const auto& [e, c] : terms_) {
            Exps f = e;
            f[R] = 0;
            out[e[R]].add_term(f, c);
        }
        return out;
    }

    double eval(double m, double a, double k, double r = 0.0) const {
        const double x[4] = {m, a, k, r};
        double acc = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = static_cast<double>(c);
            for (int i = 0; i < 4; ++i) t *= std::pow(x[i], e[i]);
            acc += t;
        }
        return acc;
    }

private:
    void add_term(const Exps& e, std::int64_t c) {
        if (c == 0) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_[e] = c;
        } else if ((it->second += c) == 0) {
            terms_.erase(it);
        }
    }

    std::map<Exps, std::int64_t> terms_;
};

namespace exact {

inline ExactPoly delta() {
    using P = ExactPoly;
    const P r = P::var(P::R), a = P::var(P::A), k = P::var(P::K), m = P::var(P::M);
    return (r * r + a * a) * (P(1) + k * k * r * r) - P(2) * m * r;
}

/// (r^2+a^2)^4 V00 expanded from its defining rational expression.
inline ExactPoly p7() {
    using P = ExactPoly;
    const P r = P::var(P::R), a = P::var(P::A), k = P::var(P::K);
    const P d = delta();
    const P d1 = d.diff(P::R);
    const P d2 = d1.diff(P::R);
    const P q = r * r + a * a;
    return d1 * d1 * q * q + d * (P(2) + a * a * k * k - P(6) * k * k * r * r - d2) * q * q +
           r * d * d1 * q - (P(2) * r * r - a * a) * d * d;
}

} // namespace exact

} // namespace kads
