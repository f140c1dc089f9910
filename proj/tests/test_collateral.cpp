#include <gtest/gtest.h>

#include <cmath>

#include "htlc/collateral.hpp"
#include "htlc/montecarlo.hpp"
#include "oracles.hpp"

using namespace htlc;

namespace {

const Scenario kDefault = Scenario::defaults();

CollateralScenario with_q(double q) { return {kDefault, q}; }

TEST(CollateralT3, ThresholdIsRootOfAliceIndifference) {
    for (double q : {0.0, 0.01, 0.1, 0.5}) {
        const auto& tl = kDefault.timeline;
        const auto adv = [&](double p3) {
            const double cont = 1.3 * expected_price(p3, tl.tau_b, kDefault.market) * std::exp(-0.01 * tl.tau_b) +
                                q * std::exp(-0.01 * (tl.eps_b + tl.tau_a));
            return cont - 2.0 * std::exp(-0.01 * (tl.eps_b + 2.0 * tl.tau_a));
        };
        EXPECT_NEAR(threshold_t3_collateral(with_q(q)), oracle::bisect(adv, 1e-3, 5.0), 1e-6) << "q=" << q;
    }
}

TEST(CollateralT3, LargeDepositRemovesThreshold) {
    EXPECT_EQ(threshold_t3_collateral(with_q(2.0)), 0.0);
    EXPECT_EQ(threshold_t3_collateral(with_q(0.0)), threshold_t3(kDefault));
}

TEST(CollateralT2, UtilitiesMatchClosedForm) {
    for (double q : {0.0, 0.01, 0.1})
        for (double p2 : {0.1, 1.0, 1.5, 2.0, 2.45, 3.5}) {
            const auto u = utilities_t2_collateral(p2, with_q(q));
            const auto o = oracle::utilities_t2(p2, kDefault, q);
            EXPECT_NEAR(u.alice_cont, o.alice_cont, 1e-8) << "q=" << q << " p2=" << p2;
            EXPECT_NEAR(u.bob_cont, o.bob_cont, 1e-8) << "q=" << q << " p2=" << p2;
            EXPECT_NEAR(u.alice_stop, o.alice_stop, 1e-14);
        }
}

TEST(CollateralT2, ZeroDepositReproducesBaseline) {
    for (double p2 : {0.5, 1.5, 2.2}) {
        const auto c = utilities_t2_collateral(p2, with_q(0.0));
        const auto b = utilities_t2(p2, kDefault);
        EXPECT_NEAR(c.alice_cont, b.alice_cont, 1e-12);
        EXPECT_NEAR(c.bob_cont, b.bob_cont, 1e-12);
        EXPECT_NEAR(c.alice_stop, b.alice_stop, 1e-15);
    }
    const auto set = feasible_set_t2_collateral(with_q(0.0));
    ASSERT_EQ(set.size(), 1u);
    EXPECT_EQ(set[0], *feasible_range_t2(kDefault));
}

TEST(CollateralT2, FeasibleSetMatchesDenseRootOracle) {
    for (double q : {0.01, 0.05, 0.1}) {
        const auto set = feasible_set_t2_collateral(with_q(q));
        const auto roots = oracle::dense_roots(
            [&](double p2) {
                const auto u = oracle::utilities_t2(p2, kDefault, q);
                return u.bob_cont - u.bob_stop;
            },
            1e-4, 40.0, 40000);
        ASSERT_EQ(roots.size() % 2, 1u) << "q=" << q;
        // Bob continues near zero, so the set is (0, r0) U (r1, r2) U ...
        ASSERT_EQ(set.size(), (roots.size() + 1) / 2) << "q=" << q;
        EXPECT_EQ(set[0].lo, 0.0);
        for (std::size_t i = 0; i < set.size(); ++i) {
            EXPECT_NEAR(set[i].hi, roots[2 * i], 1e-6);
            if (i > 0) EXPECT_NEAR(set[i].lo, roots[2 * i - 1], 1e-6);
        }
    }
}

TEST(CollateralT2, SmallDepositSplitsTheSet) {
    const auto set = feasible_set_t2_collateral(with_q(0.01));
    ASSERT_EQ(set.size(), 2u);
    EXPECT_NEAR(set[1].lo, 1.1445, 1e-3);
    EXPECT_NEAR(set[1].hi, 2.3995, 1e-3);
}

TEST(CollateralT1, ZeroDepositReproducesBaseline) {
    const auto c = utilities_t1_collateral(2.0, with_q(0.0));
    const auto b = utilities_t1(2.0, kDefault);
    EXPECT_NEAR(c.alice_cont, b.alice_cont, 1e-12);
    EXPECT_NEAR(c.bob_cont, b.bob_cont, 1e-12);
    EXPECT_NEAR(success_rate_collateral(2.0, with_q(0.0)), success_rate(2.0, kDefault), 1e-12);
}

TEST(CollateralT1, StopKeepsDeposit) {
    const auto u = utilities_t1_collateral(2.0, with_q(0.1));
    EXPECT_DOUBLE_EQ(u.alice_stop, 2.1);
    EXPECT_DOUBLE_EQ(u.bob_stop, 2.1);
}

TEST(CollateralT1, SuccessRateIncreasesWithDeposit) {
    const double s0 = success_rate_collateral(2.0, with_q(0.0));
    const double s1 = success_rate_collateral(2.0, with_q(0.01));
    const double s2 = success_rate_collateral(2.0, with_q(0.1));
    EXPECT_LT(s0, s1);
    EXPECT_LT(s1, s2);
}

TEST(CollateralT1, SuccessRateMatchesSimpsonOracle) {
    for (double q : {0.01, 0.1}) {
        const auto set = feasible_set_t2_collateral(with_q(q));
        const double k = threshold_t3_collateral(with_q(q));
        const oracle::Lognormal ln = oracle::transition(2.0, 3.0, kDefault);
        double sr = 0.0;
        for (const auto& iv : set)
            sr += oracle::expect(
                [&](double x) { return oracle::transition(x, 4.0, kDefault).prob_above(k); }, iv.lo, iv.hi, ln);
        EXPECT_NEAR(success_rate_collateral(2.0, with_q(q)), sr, 1e-7) << "q=" << q;
    }
}

TEST(CollateralT1, AgreedRateSetsIntersect) {
    const auto sets = feasible_set_pstar_collateral(with_q(0.1), 2.0);
    EXPECT_EQ(sets.both, sets.alice.intersect(sets.bob));
    EXPECT_TRUE(sets.both.contains(2.0));
    ASSERT_EQ(sets.both.size(), 1u);
    EXPECT_NEAR(sets.both[0].lo, 1.647, 2e-3);
    EXPECT_NEAR(sets.both[0].hi, 2.465, 2e-3);
}

TEST(CollateralPolicy, InitiatedAndLockRule) {
    const auto pol = make_collateral_policy(with_q(0.1));
    EXPECT_TRUE(pol.initiated);
    EXPECT_EQ(pol.lock_amount(0.01), 1.0);
    EXPECT_EQ(pol.lock_amount(3.0), 0.0);
    EXPECT_EQ(pol.collateral(), 0.1);
}

TEST(CollateralMonteCarlo, UtilitiesAndSuccessRateAgree) {
    SimConfig cfg;
    cfg.seed = 42;
    for (double q : {0.01, 0.1}) {
        const auto pol = make_collateral_policy(with_q(q));
        const SimEstimate sr = estimate_success_rate(pol, cfg);
        EXPECT_LT(std::abs(sr.z_score(success_rate_collateral(2.0, with_q(q)))), 3.0) << "q=" << q;
        const auto u2 = utilities_t2_collateral(1.8, with_q(q));
        const auto mc2 = estimate_utilities_t2(pol, 1.8, 1.0, cfg);
        EXPECT_LT(std::abs(mc2.alice.z_score(u2.alice_cont)), 3.0);
        EXPECT_LT(std::abs(mc2.bob.z_score(u2.bob_cont)), 3.0);
        const auto u1 = utilities_t1_collateral(2.0, with_q(q));
        const auto mc1 = estimate_utilities_t1(pol, cfg);
        EXPECT_LT(std::abs(mc1.alice.z_score(u1.alice_cont)), 3.0);
        EXPECT_LT(std::abs(mc1.bob.z_score(u1.bob_cont)), 3.0);
    }
}

}  // namespace
