#include <gtest/gtest.h>

#include <cmath>

#include "htlc/baseline.hpp"
#include "htlc/montecarlo.hpp"
#include "oracles.hpp"

using namespace htlc;

namespace {

const Scenario kDefault = Scenario::defaults();

/// Bob's t2 range from the closed-form utilities and a dense bisection scan.
Interval oracle_range_t2(const Scenario& s) {
    const auto roots = oracle::dense_roots(
        [&](double p2) {
            const auto u = oracle::utilities_t2(p2, s);
            return u.bob_cont - u.bob_stop;
        },
        1e-3 * s.p_star, 20.0 * s.p_star, 20000);
    EXPECT_EQ(roots.size(), 2u);
    return Interval(roots.front(), roots.back());
}

struct T1 {
    double alice_cont, bob_cont;
};

T1 oracle_utilities_t1(const Scenario& s) {
    const auto& tl = s.timeline;
    const Interval r = oracle_range_t2(s);
    const oracle::Lognormal ln = oracle::transition(s.market.p0, tl.tau_a, s);
    const double inside_a = oracle::expect([&](double x) { return oracle::utilities_t2(x, s).alice_cont; }, r.lo, r.hi, ln);
    const double inside_b = oracle::expect([&](double x) { return oracle::utilities_t2(x, s).bob_cont; }, r.lo, r.hi, ln);
    const double prob = ln.cdf(r.hi) - ln.cdf(r.lo);
    const double stop_a = oracle::utilities_t2(1.0, s).alice_stop;
    const double outside_b = ln.forward() - (ln.mass_below(r.hi) - ln.mass_below(r.lo));
    return {(inside_a + (1.0 - prob) * stop_a) * std::exp(-s.alice.r * tl.tau_a),
            (inside_b + outside_b) * std::exp(-s.bob.r * tl.tau_a)};
}

double oracle_sr(const Scenario& s) {
    const Interval r = oracle_range_t2(s);
    const oracle::Lognormal ln = oracle::transition(s.market.p0, s.timeline.tau_a, s);
    return oracle::expect([&](double x) { return oracle::reveal_probability(x, s); }, r.lo, r.hi, ln);
}

TEST(BaselineT3, ThresholdClosedForm) {
    EXPECT_NEAR(threshold_t3(kDefault), 2.0 * std::exp(-0.038) / 1.3, 1e-15);
    EXPECT_NEAR(threshold_t3(kDefault), 1.4810968, 1e-7);
}

TEST(BaselineT3, ThresholdIsRootOfAliceIndifference) {
    const double root = oracle::bisect(
        [](double p3) {
            const auto u = utilities_t3(p3, kDefault);
            return u.alice_cont - u.alice_stop;
        },
        0.5, 5.0);
    EXPECT_NEAR(threshold_t3(kDefault), root, 1e-6);
}

TEST(BaselineT3, ThresholdScalesWithAgreedRate) {
    for (double p : {0.5, 1.0, 3.0})
        EXPECT_NEAR(threshold_t3(kDefault.with_p_star(p)), p / 2.0 * threshold_t3(kDefault), 1e-14);
}

TEST(BaselineT3, DecisionRule) {
    const double l = threshold_t3(kDefault);
    EXPECT_EQ(alice_decision_t3(l * 1.001, kDefault), Action::cont);
    EXPECT_EQ(alice_decision_t3(l, kDefault), Action::stop);
    EXPECT_EQ(alice_decision_t3(l * 0.999, kDefault), Action::stop);
    EXPECT_EQ(bob_decision_t4(), Action::cont);
    EXPECT_THROW(utilities_t3(0.0, kDefault), DomainError);
}

TEST(BaselineT3, UtilitiesAtThreshold) {
    const auto u = utilities_t3(threshold_t3(kDefault), kDefault);
    EXPECT_NEAR(u.alice_cont, u.alice_stop, 1e-14);
    EXPECT_NEAR(u.bob_cont, 1.3 * 2.0 * std::exp(-0.01 * 4.0), 1e-14);
}

TEST(BaselineT2, UtilitiesMatchClosedForm) {
    for (double p2 : {0.3, 1.0, 1.18, 1.7, 2.0, 2.39, 4.0}) {
        const auto u = utilities_t2(p2, kDefault);
        const auto o = oracle::utilities_t2(p2, kDefault);
        EXPECT_NEAR(u.alice_cont, o.alice_cont, 1e-8) << "p2=" << p2;
        EXPECT_NEAR(u.bob_cont, o.bob_cont, 1e-8) << "p2=" << p2;
        EXPECT_NEAR(u.alice_stop, o.alice_stop, 1e-14);
        EXPECT_EQ(u.bob_stop, p2);
    }
}

TEST(BaselineT2, AliceStopIsRefundDiscountedFromT8) {
    EXPECT_NEAR(utilities_t2(2.0, kDefault).alice_stop, 2.0 * std::exp(-0.01 * 11.0), 1e-15);
}

TEST(BaselineT2, FeasibleRangeMatchesDenseRootOracle) {
    const auto r = feasible_range_t2(kDefault);
    ASSERT_TRUE(r);
    const Interval o = oracle_range_t2(kDefault);
    EXPECT_NEAR(r->lo, o.lo, 1e-6);
    EXPECT_NEAR(r->hi, o.hi, 1e-6);
    EXPECT_NEAR(r->lo, 1.1817821, 1e-6);
    EXPECT_NEAR(r->hi, 2.3887058, 1e-6);
    EXPECT_LT(r->lo, threshold_t3(kDefault));
}

TEST(BaselineT2, FeasibleRangeScalesWithAgreedRate) {
    const auto r2 = feasible_range_t2(kDefault);
    const auto r3 = feasible_range_t2(kDefault.with_p_star(3.0));
    ASSERT_TRUE(r2 && r3);
    EXPECT_NEAR(r3->lo, 1.5 * r2->lo, 1e-5);
    EXPECT_NEAR(r3->hi, 1.5 * r2->hi, 1e-5);
}

TEST(BaselineT2, NoPremiumForBobEmptiesTheRange) {
    Scenario s = kDefault;
    s.bob.alpha = 0.0;
    EXPECT_FALSE(feasible_range_t2(s));
}

TEST(BaselineT1, UtilitiesMatchSimpsonOracle) {
    const auto u = utilities_t1(2.0, kDefault);
    const T1 o = oracle_utilities_t1(kDefault);
    EXPECT_NEAR(u.alice_cont, o.alice_cont, 1e-6);
    EXPECT_NEAR(u.bob_cont, o.bob_cont, 1e-6);
    EXPECT_EQ(u.alice_stop, 2.0);
    EXPECT_EQ(u.bob_stop, 2.0);
}

TEST(BaselineT1, SuccessRateMatchesSimpsonOracle) {
    for (double p : {1.6, 2.0, 2.4})
        EXPECT_NEAR(success_rate(p, kDefault), oracle_sr(kDefault.with_p_star(p)), 1e-7) << "P*=" << p;
}

TEST(BaselineT1, SuccessRateRejectsInfeasibleRate) {
    EXPECT_THROW(success_rate(3.0, kDefault), NotInitiatedError);
    EXPECT_THROW(success_rate(1.0, kDefault), NotInitiatedError);
    EXPECT_NO_THROW(success_rate(3.0, kDefault, {}, Feasibility::assume));
}

TEST(BaselineT1, FeasibleAgreedRateRangeMatchesBisectionOracle) {
    const auto r = feasible_range_pstar(kDefault, 2.0);
    ASSERT_TRUE(r);
    auto adv = [](double p) {
        const Scenario s = kDefault.with_p_star(p);
        return oracle_utilities_t1(s).alice_cont - p;
    };
    EXPECT_NEAR(r->lo, oracle::bisect(adv, 1.4, 1.7, 1e-9), 1e-5);
    EXPECT_NEAR(r->hi, oracle::bisect(adv, 2.4, 2.7, 1e-9), 1e-5);
    EXPECT_NEAR(r->lo, 1.5, 0.05);
    EXPECT_NEAR(r->hi, 2.5, 0.05);
}

TEST(BaselineT1, ImpatientAgentsNeverInitiate) {
    Scenario s = kDefault;
    s.alice.r = 0.05;
    EXPECT_FALSE(feasible_range_pstar(s, 2.0));
}

TEST(BaselinePolicy, SolveFillsEverything) {
    const BaselinePolicy pol = solve_baseline(kDefault);
    EXPECT_TRUE(pol.initiated);
    ASSERT_TRUE(pol.p2_range && pol.pstar_range);
    EXPECT_EQ(pol.lock_amount(2.0), 1.0);
    EXPECT_EQ(pol.lock_amount(1.0), 0.0);
    EXPECT_EQ(pol.lock_amount(3.0), 0.0);
    EXPECT_FALSE(make_baseline_policy(kDefault.with_p_star(3.0)).initiated);
}

TEST(BaselineMonteCarlo, StageTwoUtilitiesAgree) {
    const BaselinePolicy pol = make_baseline_policy(kDefault);
    SimConfig cfg;
    cfg.seed = 42;
    for (double p2 : {1.3, 2.0, 2.3}) {
        const auto mc = estimate_utilities_t2(pol, p2, 1.0, cfg);
        const auto u = utilities_t2(p2, kDefault);
        EXPECT_LT(std::abs(mc.alice.z_score(u.alice_cont)), 3.0) << "p2=" << p2;
        EXPECT_LT(std::abs(mc.bob.z_score(u.bob_cont)), 3.0) << "p2=" << p2;
    }
}

TEST(BaselineMonteCarlo, StageOneUtilitiesAgree) {
    const BaselinePolicy pol = make_baseline_policy(kDefault);
    SimConfig cfg;
    cfg.seed = 43;
    const auto mc = estimate_utilities_t1(pol, cfg);
    const auto u = utilities_t1(2.0, kDefault);
    EXPECT_LT(std::abs(mc.alice.z_score(u.alice_cont)), 3.0);
    EXPECT_LT(std::abs(mc.bob.z_score(u.bob_cont)), 3.0);
}

TEST(BaselineMonteCarlo, SuccessRateAgreesAcrossAgreedRates) {
    SimConfig cfg;
    cfg.seed = 42;
    for (double p : {1.6, 1.8, 2.0, 2.2, 2.4}) {
        const BaselinePolicy pol = make_baseline_policy(kDefault.with_p_star(p));
        const SimEstimate mc = estimate_success_rate(pol, cfg);
        EXPECT_LT(std::abs(mc.z_score(success_rate(p, kDefault))), 3.0) << "P*=" << p;
    }
}

TEST(BaselineMonteCarlo, DegenerateVolatilityFollowsForwardChain) {
    Scenario s = kDefault;
    s.market.sigma = 1e-9;
    const BaselinePolicy pol = make_baseline_policy(s);
    const double p2 = expected_price(s.market.p0, s.timeline.tau_a, s.market);
    const double p3 = expected_price(p2, s.timeline.tau_b, s.market);
    const bool expected = pol.lock_amount(p2) > 0.0 && p3 > pol.p3_lower;
    for (std::uint64_t r = 0; r < 20; ++r) {
        auto rng = substream(9, r);
        EXPECT_EQ(simulate_swap(s, pol, rng).success, expected);
    }
}

}  // namespace
