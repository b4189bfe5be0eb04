#include <gtest/gtest.h>

#include <random>

#include "kads/angular.hpp"
#include "kads/potentials.hpp"
#include "support.hpp"

using namespace kads;

namespace {

struct Direct {
    double V0, V00, V1;
};

// r-forms built from Δ and the defining polynomials, independent of the y-form evaluator
Direct direct(const RadialPotential& pot, double r) {
    const Geometry& g = pot.geometry();
    const double a2 = g.params.a * g.params.a, k2 = g.params.k * g.params.k, q = r * r + a2;
    const double D = delta_poly(g.params)(r);
    const double X = pot.xi_omega_m(), z = r * r - g.r_plus * g.r_plus;
    const double V0 = (D * (pot.lambda() - 2 - a2 * k2) - X * X * z * z) / (q * q);
    const double V00 = Poly<double>(p7_coefficients(g.params))(r) / (q * q * q * q);
    const double V1 = 4 * X * v1_cubic(g)(r) / (q * q);
    return {V0, V00, V1};
}

} // namespace

TEST(Potentials, YFormMatchesRForm) {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        const Geometry g = derive_geometry(kads::testing::random_params(rng));
        const int m = 2 + i % 9;
        const RadialPotential pot(g, m, fundamental_lambda(g, m));
        for (double f : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e3}) {
            const double r = g.r_plus * (1 + f);
            const PotentialValues v = pot.eval_r(r);
            const Direct d = direct(pot, r);
            const double sc = 1 + std::abs(pot.lambda()) + pot.xi_omega_m() * pot.xi_omega_m();
            EXPECT_NEAR(v.V0, d.V0, 1e-11 * sc);
            EXPECT_NEAR(v.V00, d.V00, 1e-11 * sc);
            EXPECT_NEAR(v.V1, d.V1, 1e-11 * sc);
            EXPECT_NEAR(pot.v0_direct(r), d.V0, 1e-11 * sc);
            EXPECT_NEAR(pot.v0_tilde_form(r), d.V0, 1e-10 * sc);
        }
    }
}

TEST(Potentials, BoundaryValues) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    const int m = 10;
    const RadialPotential pot(g, m, fundamental_lambda(g, m));
    const PotentialValues v0 = pot.eval(radial_point_from_u(g, 0.0));
    EXPECT_NEAR(v0.V.real(), g.params.k * g.params.k * pot.lambda_tilde(), 1e-12 * std::abs(pot.lambda_tilde()));
    EXPECT_EQ(v0.V00, 0.0);
    EXPECT_EQ(v0.V1, 0.0);
    // at the horizon V → (2κ)²
    const PotentialValues vh = pot.eval_r(g.r_plus * (1 + 1e-12));
    EXPECT_NEAR(vh.V.real(), 4 * g.kappa * g.kappa, 1e-8);
}

TEST(Potentials, JetsMatchFiniteDifferences) {
    const Geometry g = derive_geometry(0.3, 0.2, 1.0);
    const RadialPotential pot(g, 7, fundamental_lambda(g, 7));
    const double h = 1e-4;
    for (double t : {-3.0, -0.7, -0.1, -h}) {
        const PotentialJets J = pot.jets(inverse_tortoise(g, t));
        auto V = [&](double x) { return pot.V(inverse_tortoise(g, std::min(x, 0.0))); };
        const cplx d1 = (V(t + h) - V(t - h)) / (2 * h);
        const cplx d2 = (V(t + h) - 2.0 * V(t) + V(t - h)) / (h * h);
        if (t + h <= 0) {
            EXPECT_NEAR(std::abs(J.dV() - d1), 0.0, 1e-5 * (1 + std::abs(d1)));
            EXPECT_NEAR(std::abs(J.ddV() - d2), 0.0, 1e-3 * (1 + std::abs(d2)));
        }
        const double r = inverse_tortoise(g, t).r;
        EXPECT_NEAR(pot.v0_prime(r), J.V0.d, 1e-9 * (1 + std::abs(J.V0.d)));
        if (t + h < 0) {
            auto w = [&](double x) { return pot.w(inverse_tortoise(g, x).r); };
            EXPECT_NEAR(pot.w_prime(r), (w(t + h) - w(t - h)) / (2 * h), 1e-7);
        }
    }
}

TEST(Potentials, CertificatesOnRandomParameters) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 25; ++i) {
        const Geometry g = derive_geometry(kads::testing::random_params(rng, true));
        for (int m : {2, 10, 50}) {
            const CertificateReport c = positivity_certificates(g, m, 2000);
            EXPECT_TRUE(c.dP_positive) << describe(g.params);
            EXPECT_TRUE(c.v1_ok) << describe(g.params);
            EXPECT_TRUE(c.quad_ok) << describe(g.params);
        }
    }
}

TEST(Potentials, CruxConstant) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    const double D = crux_constant_D(g);
    EXPECT_GT(D, 0.0);
    EXPECT_LE(D, 4 * (g.r_plus * g.r_plus + 0.04) * (1 + 1e-12));
    const RadialPotential pot(g, 20, fundamental_lambda(g, 20));
    const CruxReport c = crux_certificate(pot, 2000);
    EXPECT_GT(c.eps0, 0.0);
    EXPECT_TRUE(c.N_empty);   // below threshold V₀ + V₀₀ stays positive at this m
    EXPECT_GT(min_real_potential(pot, 2000), 0.0);
}

TEST(Potentials, NegativeRegionAboveThreshold) {
    const ParameterPath path = reference_path();
    const Geometry g = derive_geometry(path.at(path.solve_eps(0.05)));
    const RadialPotential pot(g, 40, fundamental_lambda(g, 40));
    EXPECT_LT(pot.lambda_tilde(), 0.0);
    EXPECT_LT(min_real_potential(pot, 2000), 0.0);
    const CruxReport c = crux_certificate(pot, 2000);
    EXPECT_FALSE(c.N_empty);
}
