#include <gtest/gtest.h>

#include <random>

#include <Eigen/Dense>

#include "kads/angular.hpp"
#include "kads/tridiagonal.hpp"
#include "spectral_oracle.hpp"
#include "support.hpp"

using namespace kads;

TEST(Tridiagonal, MatchesDenseSolver) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int n : {1, 2, 3, 17, 64}) {
        SymTridiag T;
        T.d.resize(n);
        T.e.resize(n > 0 ? n - 1 : 0);
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) A(i, i) = T.d[i] = N(rng);
        for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = A(i + 1, i) = T.e[i] = N(rng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        for (int j = 0; j < n; ++j) {
            const double lam = kth_eigenvalue(T, j);
            EXPECT_NEAR(lam, es.eigenvalues()[j], 1e-12);
            const auto v = eigenvector(T, lam);
            Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
            EXPECT_NEAR((A * x - lam * x).norm(), 0.0, 1e-9);
        }
    }
}

TEST(Angular, CorrectedPotentialMatchesFactorizedOperator) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(0.05, std::numbers::pi - 0.05);
    for (int i = 0; i < 50; ++i) {
        const Geometry g = derive_geometry(kads::testing::random_params(rng));
        for (int m : {-7, -2, 2, 3, 12}) {
            const double t = ut(rng);
            const double a = angular_potential(g, m, t), b = angular_potential_factorized(g, m, t);
            EXPECT_NEAR(a, b, 1e-9 * (1 + std::abs(b))) << describe(g.params) << " m=" << m;
        }
    }
}

TEST(Angular, SchwarzschildValue) {
    const auto e = solve_angular(derive_geometry(1.0, 0.0, 1.0), 2, 3);
    EXPECT_NEAR(e[0].lambda, 4.0, 1e-9);
    EXPECT_NEAR(e[1].lambda, 10.0, 1e-9);
    EXPECT_NEAR(e[2].lambda, 18.0, 1e-9);
}

TEST(Angular, MatchesSpectralOracle) {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 8; ++i) {
        const Geometry g = derive_geometry(kads::testing::random_params(rng));
        for (int m : {-4, 2, 3, 8}) {
            const auto fv = solve_angular(g, m, 3);
            const auto sp = kads::testing::spectral_angular(g, m);
            for (int j = 0; j < 3; ++j)
                EXPECT_NEAR(fv[j].lambda, sp[j], 1e-7 * std::max(1.0, std::abs(sp[j]))) << describe(g.params) << " m=" << m;
        }
    }
}

TEST(Angular, SymmetryUnderMReflection) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    for (int m : {2, 5, 11}) EXPECT_NEAR(fundamental_lambda(g, m), fundamental_lambda(g, -m), 1e-9 * m * m);
}

TEST(Angular, EigenpairStructure) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    const auto e = solve_angular(g, 6, 4);
    for (std::size_t j = 0; j < e.size(); ++j) {
        EXPECT_EQ(e[j].ell, 6 + int(j));
        if (j) {
            EXPECT_GT(e[j].lambda, e[j - 1].lambda);
        }
        EXPECT_NEAR(discrete_rayleigh(g, e[j]), e[j].lambda_grid, 1e-8 * e[j].lambda_grid);
        EXPECT_LT(e[j].error_estimate, 1e-5 * e[j].lambda);
        for (std::size_t k = 0; k <= j; ++k) {
            double ip = 0;
            for (std::size_t i = 0; i < e[j].S.size(); ++i) ip += e[j].S[i] * e[k].S[i] * e[j].weights[i];
            EXPECT_NEAR(ip, j == k ? 1.0 : 0.0, 1e-10);
        }
        // regular solution vanishes at both poles for |m| >= 3
        double mx = 0;
        for (double s : e[j].S) mx = std::max(mx, std::abs(s));
        EXPECT_LT(std::abs(e[j].S.front()), 1e-4 * mx);
        EXPECT_LT(std::abs(e[j].S.back()), 1e-4 * mx);
    }
}

TEST(Angular, HatTrialFunctionBoundsFromAbove) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    for (int m : {10, 40, 100}) {
        const double lam = fundamental_lambda(g, m);
        const HatBound b = hat_upper_bound(g, m);
        EXPECT_GE(b.rayleigh, lam);
        EXPECT_GE(b.closed_form, b.rayleigh);
    }
}

TEST(Angular, SemiclassicalLimit) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    const double target = limit_target(g);
    EXPECT_NEAR(target, limit_target_split(g), 1e-14);
    double prev = 1e300;
    for (int m : {25, 50, 100, 200}) {
        const double d = std::abs(fundamental_ratio(g, m) - target);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 0.05 * g.Xi * g.Xi);
}

TEST(Angular, LargeMWindowAgreesWithFullDomain) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    AngularOptions full;
    full.window_threshold = 1 << 30;
    full.resolution = 8192;
    const int m = 600;
    const double lw = fundamental_lambda(g, m), lf = fundamental_lambda(g, m, full);
    EXPECT_NEAR(lw, lf, 1e-6 * lf);
    EXPECT_LT(std::abs(lw / (double(m) * m) - limit_target(g)), 0.01);
}

TEST(Angular, RejectsBadInput) {
    const Geometry g = derive_geometry(1.0, 0.2, 1.0);
    EXPECT_THROW(solve_angular(g, 1, 1), DomainError);
    AngularOptions o;
    o.resolution = 1000;
    EXPECT_THROW(solve_angular(g, 4, 1, o), DomainError);
    EXPECT_THROW(angular_potential(g, 4, 0.0), DomainError);
}
