#include <gtest/gtest.h>

#include <random>

#include "kads/angular.hpp"
#include "kads/radial.hpp"
#include "support.hpp"

using namespace kads;

namespace {

RadialPotential make_potential(const BlackHoleParams& p, int m) {
    const Geometry g = derive_geometry(p);
    return RadialPotential(g, m, fundamental_lambda(g, m));
}

} // namespace

TEST(Frobenius, LeadingBehaviour) {
    const RadialPotential pot = make_potential({0.3, 0.2, 1.0}, 12);
    const Geometry& g = pot.geometry();
    const FrobeniusSeed s = frobenius_seed(pot, 24, 1e-4);
    EXPECT_DOUBLE_EQ(s.coeffs[0].real(), g.ddelta_plus);
    EXPECT_LT(s.truncation_error, 1e-12);
    EXPECT_NEAR(std::abs(s.F_at_seed - 1.0), 0.0, 1e-2);
    const FrobeniusSeed s2 = frobenius_seed(pot, 24, 1e-6);
    EXPECT_LT(std::abs(s2.F_at_seed - 1.0), 1e-2 * std::abs(s.F_at_seed - 1.0) * 1.5);
    // near the horizon R ≈ Δ, R′ ≈ 2κR
    EXPECT_NEAR(std::abs(s2.dR / s2.R - 2.0 * g.kappa), 0.0, 1e-3 * g.kappa);
}

TEST(Frobenius, SeriesSatisfiesTheOdeAtTheSeed) {
    const RadialPotential pot = make_potential({1.0, 0.2, 1.0}, 6);
    const Geometry& g = pot.geometry();
    const FrobeniusSeed s = frobenius_seed(pot, 30, 1e-3);
    // second derivative by differencing the series-based R′ through the tortoise map
    auto series = [&](double r) {
        const double rho = r - g.r_plus;
        cplx R = 0, dR = 0, pw = 1;
        for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
            dR += double(j + 1) * s.coeffs[j] * pw;
            pw *= rho;
            R += s.coeffs[j] * pw;
        }
        return std::array<cplx, 2>{R, dR / tortoise_jacobian(g, r)};
    };
    const double r = s.point.r, h = 1e-6 * g.r_plus;
    const auto a = series(r + h), b = series(r - h), c = series(r);
    const cplx d2 = (a[1] - b[1]) / (2 * h) / tortoise_jacobian(g, r);
    EXPECT_NEAR(std::abs(d2 - pot.V(radial_point_from_r(g, r)) * c[0]), 0.0, 1e-6 * std::abs(d2));
}

TEST(Frobenius, Errors) {
    const RadialPotential pot = make_potential({0.3, 0.2, 1.0}, 4);
    EXPECT_THROW(frobenius_seed(pot, 5, 1e-4), DomainError);
    EXPECT_THROW(frobenius_seed(pot, 24, 0.5), DomainError);
    EXPECT_THROW(frobenius_seed(pot, 10, 1e-2, 1e-300), TruncationError);
}

TEST(Radial, NormalizationAndSeedIndependence) {
    const RadialPotential pot = make_potential({0.3, 0.2, 1.0}, 10);
    RadialNumerics a, b;
    a.rtol = b.rtol = 1e-12;
    b.delta = 1e-5;
    const RadialSolution sa = integrate_regular(pot, a), sb = integrate_regular(pot, b);
    double acc = 0;
    for (std::size_t i = 0; i + 1 < sa.r_star.size(); ++i)
        acc += 0.5 * (sa.r_star[i + 1] - sa.r_star[i]) * (std::norm(sa.R[i]) + std::norm(sa.R[i + 1]));
    EXPECT_NEAR(acc, 1.0, 1e-12);
    // same regular solution; the normalizations differ only by the horizon-tail quadrature
    const cplx ra = sa.R.back(), rb = sb.R.back();
    EXPECT_NEAR(std::abs(ra / rb - 1.0), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(sa.dR.back() / ra - sb.dR.back() / rb), 0.0, 1e-9 * std::abs(sa.dR.back() / ra));
    EXPECT_EQ(sa.r_star.back(), 0.0);
    EXPECT_TRUE(std::isinf(sa.r.back()));
}

TEST(Radial, DenseAccessorMatchesGrid) {
    const RadialPotential pot = make_potential({0.3, 0.2, 1.0}, 10);
    const RadialSolution s = integrate_regular(pot);
    for (std::size_t i : {std::size_t(5), s.r_star.size() / 2, s.r_star.size() - 1}) {
        const auto y = s.at(s.r_star[i]);
        EXPECT_NEAR(std::abs(y[0] - s.R[i]), 0.0, 1e-12 * (1 + std::abs(s.R[i])));
    }
}

TEST(Radial, IdentitiesHoldAtTightTolerance) {
    std::mt19937_64 rng(57);
    RadialNumerics num;
    num.rtol = 1e-12;
    for (int i = 0; i < 6; ++i) {
        const BlackHoleParams p = kads::testing::random_params(rng);
        const RadialPotential pot = make_potential(p, 2 + 3 * i);
        const IdentityDefects d = identity_defects(integrate_regular(pot, num), pot);
        EXPECT_LT(d.max(), 1e-7) << describe(p) << " " << d.wpderiv1 << " " << d.wpderiv2 << " " << d.wronskian << " " << d.energy;
    }
}

TEST(Radial, DefectsShrinkWithTolerance) {
    const RadialPotential pot = make_potential({1.0, 0.2, 1.0}, 8);
    RadialNumerics a, b;
    a.rtol = 1e-10;
    b.rtol = 5e-11;
    const RadialSolution sa = integrate_regular(pot, a), sb = integrate_regular(pot, b);
    const IdentityDefects da = identity_defects(sa, pot), db = identity_defects(sb, pot);
    EXPECT_LT(db.wronskian, da.wronskian);
    EXPECT_LT(db.energy, da.energy);
    EXPECT_LT(db.wpderiv1, da.wpderiv1);
    const double steps = double(sb.nodes()) / double(sa.nodes());
    EXPECT_GT(steps, 1.0);
    EXPECT_LT(steps, 1.3);
}

TEST(Radial, BulletPositiveBelowThreshold) {
    const RadialPotential pot = make_potential({1.0, 0.2, 1.0}, 20);
    const RadialSolution s = integrate_regular(pot);
    const BulletProfile b = bullet_profile(s, tortoise(pot.geometry(), pot.geometry().r_plus * 1.001));
    EXPECT_GT(b.global_min, 0.0);
    EXPECT_TRUE(b.window_positive);
    EXPECT_LE(b.min, b.endpoint);
}

TEST(KappaMatch, ResidualIdentities) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N;
    for (int i = 0; i < 100; ++i) {
        const cplx R0(N(rng), N(rng)), dR0(N(rng), N(rng));
        const MatchResult m = kappa_match(R0, dR0);
        EXPECT_NEAR(std::abs(m.kappa), 1.0, 1e-14);
        EXPECT_NEAR(m.residual_value, 0.0, 1e-14 * std::abs(R0));
        EXPECT_NEAR(m.residual_deriv, std::abs(bullet(R0, dR0)) / std::abs(R0), 1e-12 * (1 + std::abs(dR0)));
        // when the boundary bullet vanishes both conditions hold
        const cplx dRz = cplx(0, N(rng)) * R0;
        const MatchResult z = kappa_match(R0, dRz, 1e-12);
        EXPECT_LT(z.residual_deriv, 1e-13 * (1 + std::abs(dRz)));
    }
}

TEST(KappaMatch, ZeroBranchAndErrors) {
    const MatchResult m = kappa_match(0.0, cplx(1, 2));
    EXPECT_TRUE(m.zero_branch);
    EXPECT_NEAR(m.residual_deriv, 0.0, 1e-15);
    EXPECT_THROW(kappa_match(0.0, 0.0), MatchError);
    EXPECT_THROW(kappa_match(1.0, 1.0, 1e-8), MatchError);
}
