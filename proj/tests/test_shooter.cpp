#include <gtest/gtest.h>

#include <atomic>

#include "kads/shooter.hpp"

using namespace kads;

namespace {

ShooterNumerics quick() {
    ShooterNumerics num;
    num.coarse_samples = 16;
    return num;
}

} // namespace

TEST(Parallel, CoversEveryIndexAndRethrowsFirstError) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
        parallel_for(10, 3, [](std::size_t i) {
            if (i == 7) throw DomainError("seven");
            if (i == 4) throw NoBracket("four");
        });
        FAIL();
    } catch (const NoBracket& e) {
        EXPECT_STREQ(e.what(), "four");
    }
}

TEST(Shooter, SignChangeAlongReferencePath) {
    const ParameterPath path = reference_path();
    const ShotResult a = shoot(path, 0.0, 40), b = shoot(path, 1.0, 40);
    EXPECT_GT(a.g(), 0.0);
    EXPECT_LT(b.g(), 0.0);
    EXPECT_LT(a.eps, 0.0);
    EXPECT_GT(b.eps, 0.0);
    EXPECT_TRUE(a.profile.window_positive);
    EXPECT_TRUE(b.profile.window_positive);
    EXPECT_LE(a.g(), a.endpoint());
    EXPECT_GT(a.lambda_tilde, 0.0);
}

TEST(Shooter, NoReboundOnRealSolutions) {
    const ParameterPath path = reference_path();
    for (double s : {0.3, 0.8, 1.0}) {
        const ShotResult r = shoot(path, s, 24);
        EXPECT_EQ(r.rebound.violations, 0) << "s=" << s;
        EXPECT_EQ(r.rebound.touches, 0) << "s=" << s;
    }
    EXPECT_GT(shoot(path, 1.0, 24).rebound.critical_points, 0);
}

TEST(Shooter, ThresholdCertificate) {
    const ParameterPath path = reference_path();
    const ModeCertificate c = find_threshold(path, 8, quick(), 4);
    EXPECT_NEAR(c.s_m, 0.784376697053, 1e-8);
    EXPECT_LE(c.bracket_width, 1e-10);
    EXPECT_LT(std::abs(c.pomega0), 1e-8);
    EXPECT_LT(c.residual_value, 1e-6);
    EXPECT_LT(c.residual_deriv, 1e-6);
    EXPECT_NEAR(std::abs(c.kappa), 1.0, 1e-12);
    EXPECT_TRUE(c.bracket_valid);
    EXPECT_TRUE(c.window_positive);
    EXPECT_EQ(c.rebound.violations, 0);
    EXPECT_GT(c.eps_at_sm, 0.0);
    EXPECT_NEAR(c.eps_at_sm, path.eps_at(c.s_m), 1e-15);
    EXPECT_EQ(c.coarse.size(), 16u);

    const ModeCertificate d = find_threshold(path, 8, quick(), 1);
    EXPECT_EQ(c.s_m, d.s_m);
    EXPECT_EQ(c.pomega0, d.pomega0);
    EXPECT_EQ(c.iterations, d.iterations);
}

TEST(Shooter, BracketErrors) {
    const ParameterPath path = reference_path();
    ShooterNumerics num = quick();
    num.coarse_samples = 3;
    EXPECT_THROW(find_threshold(ParameterPath{{path.at(0.0)}}, 12, num, 2), NoBracket);
    EXPECT_THROW(find_threshold(ParameterPath{{path.at(1.0)}}, 12, num, 2), NoBracket);
    num.max_iterations = 3;
    EXPECT_THROW(find_threshold(path, 12, num, 2), BisectionStall);
    EXPECT_THROW(shoot(path, 0.5, 1), DomainError);
}

TEST(Shooter, AccumulationRecordsErrorsPerRow) {
    ShooterNumerics num = quick();
    num.coarse_samples = 3;
    const ParameterPath flat{{reference_path().at(0.0)}};
    const AccumulationTable t = accumulation_scan(flat, {8, 12}, num, 2);
    ASSERT_EQ(t.rows.size(), 2u);
    for (const auto& r : t.rows) {
        EXPECT_FALSE(r.ok);
        EXPECT_EQ(r.error_kind, "NoBracket");
    }
    EXPECT_FALSE(t.trend_ok);
    EXPECT_THROW(accumulation_scan(flat, {12, 8}, num), DomainError);
}

TEST(Shooter, AccumulationTrend) {
    const AccumulationTable t = accumulation_scan(reference_path(), {8, 16}, quick(), 4);
    ASSERT_EQ(t.rows.size(), 2u);
    ASSERT_TRUE(t.rows[0].ok && t.rows[1].ok);
    EXPECT_TRUE(t.trend_ok);
    EXPECT_LT(t.rows[1].certificate->eps_at_sm, t.rows[0].certificate->eps_at_sm);
    EXPECT_EQ(t.positive_eps, 2);
}

TEST(Shooter, StabilityBelowCriticalSpin) {
    const BlackHoleParams p{1.0, 0.2, 1.0};
    const StabilitySweep sw = stability_sweep(p, {10, 20}, 3, {}, 2);
    ASSERT_EQ(sw.reports.size(), 2u);
    for (const auto& r : sw.reports) {
        EXPECT_TRUE(r.certified());
        EXPECT_TRUE(r.ordering_ok);
        EXPECT_EQ(r.rows.size(), 4u);
        EXPECT_LT(r.eps, 0.0);
    }
    ASSERT_TRUE(sw.smallest_certified_m);
    EXPECT_EQ(*sw.smallest_certified_m, 10);
    EXPECT_THROW(mode_stability_scan(reference_path().at(1.0), 10, 12), DomainError);
    EXPECT_THROW(mode_stability_scan(p, 10, 9), DomainError);
}

TEST(Shooter, TouchClassification) {
    // zero_tol = 1 turns every critical point into a near-touch, exercising the classification
    const ShotResult r = shoot(reference_path(), 1.0, 24);
    const ReboundDiagnostics d = no_rebound_check(*r.solution, *r.potential, 1.0, r.r_star_lo);
    ASSERT_GT(d.touches, 0);
    EXPECT_GE(d.touches + 1, d.critical_points);
    int violations = 0, alarms = 0;
    for (const Touch& t : d.touch_list) {
        EXPECT_LT(t.r_star, 0.0);
        EXPECT_GE(t.r_star, r.r_star_lo);
        EXPECT_LT(std::abs(t.dpomega), 1e-6 * (1 + std::abs(t.ddpomega)));
        EXPECT_EQ(t.concave, t.ddpomega < 0);
        EXPECT_EQ(t.alarm, t.re_V > 0);
        alarms += t.alarm;
        violations += t.alarm ? t.amplitude >= 1.0 : !t.concave;
    }
    EXPECT_EQ(d.alarms, alarms);
    EXPECT_EQ(d.violations, violations);
}
