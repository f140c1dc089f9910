#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "htlc/expectation.hpp"
#include "htlc/numerics.hpp"
#include "oracles.hpp"

using namespace htlc;

namespace {

TEST(Integrate, KnownIntegrals) {
    EXPECT_NEAR(integrate([](double x) { return std::exp(x); }, 0.0, 1.0), std::exp(1.0) - 1.0, 1e-12);
    EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, 0.0, M_PI), 2.0, 1e-12);
    EXPECT_NEAR(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0), 2.0 / 3.0, 1e-9);
    EXPECT_NEAR(integrate([](double x) { return 1.0 / (1.0 + x * x); }, -50.0, 50.0), 2.0 * std::atan(50.0), 1e-8);
}

TEST(Integrate, ReversedAndEmptyBounds) {
    auto f = [](double x) { return x * x; };
    EXPECT_DOUBLE_EQ(integrate(f, 2.0, 2.0), 0.0);
    EXPECT_NEAR(integrate(f, 1.0, 0.0), -1.0 / 3.0, 1e-14);
    EXPECT_THROW(integrate(f, 0.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Integrate, NarrowPeakNeedsSubdivision) {
    // Gaussian of width 1e-2 centred off the panel midpoints.
    const double w = 1e-2;
    auto f = [w](double x) { return std::exp(-0.5 * std::pow((x - 0.3137) / w, 2)); };
    EXPECT_NEAR(integrate(f, 0.0, 1.0), w * std::sqrt(2.0 * M_PI), 1e-10);
}

TEST(Integrate, ExhaustedBudgetReportsEstimate) {
    IntegrationConfig cfg;
    cfg.max_depth = 2;
    auto f = [](double x) { return std::sin(200.0 * x); };
    try {
        integrate(f, 0.0, 10.0, cfg);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_TRUE(std::isfinite(e.estimate()));
        EXPECT_GT(e.error_bound(), 0.0);
    }
}

TEST(Integrate, ConfigValidation) {
    IntegrationConfig cfg;
    cfg.rel_tol = 0.0;
    cfg.abs_tol = 0.0;
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Expectation, PartialMomentsMatchClosedForm) {
    const MarketModel m{};
    const oracle::Lognormal ln{2.0, 4.0, m.mu, m.sigma};
    const double inf = std::numeric_limits<double>::infinity();
    for (double k : {1.2, 1.4811, 2.0, 2.6}) {
        EXPECT_NEAR(expect_between([](double x) { return x; }, k, inf, 2.0, 4.0, m), ln.mass_above(k), 1e-9);
        EXPECT_NEAR(expect_between([](double x) { return x; }, 0.0, k, 2.0, 4.0, m), ln.mass_below(k), 1e-9);
        EXPECT_NEAR(probability_between(0.0, k, 2.0, 4.0, m), ln.prob_below(k), 1e-12);
    }
    EXPECT_NEAR(expect_between([](double) { return 1.0; }, 0.0, inf, 2.0, 4.0, m), 1.0, 1e-8);
    EXPECT_EQ(expect_between([](double) { return 1.0; }, 3.0, 2.0, 2.0, 4.0, m), 0.0);
}

TEST(Intervals, ValidationAndOpenMembership) {
    EXPECT_THROW(Interval(2.0, 1.0), DomainError);
    EXPECT_THROW(Interval(-1.0, 1.0), DomainError);
    EXPECT_THROW(Interval(1.0, 1.0), DomainError);
    const Interval iv(1.0, std::numeric_limits<double>::infinity());
    EXPECT_TRUE(iv.contains(1e300));
    EXPECT_FALSE(iv.contains(1.0));
}

TEST(Intervals, SetMergesAndIntersects) {
    IntervalSet s;
    s.add(Interval(3.0, 4.0));
    s.add(Interval(0.0, 1.0));
    s.add(Interval(1.0, 2.0));  // touches (0, 1)
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], Interval(0.0, 2.0));
    EXPECT_EQ(s[1], Interval(3.0, 4.0));
    s.add(Interval(1.5, 3.5));
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0], Interval(0.0, 4.0));

    const IntervalSet a({Interval(0.0, 2.0), Interval(3.0, 5.0)});
    const IntervalSet b({Interval(1.0, 4.0)});
    EXPECT_EQ(a.intersect(b), IntervalSet({Interval(1.0, 2.0), Interval(3.0, 4.0)}));
    EXPECT_TRUE(a.intersect(IntervalSet({Interval(2.0, 3.0)})).empty());
    EXPECT_EQ(a.clip(1.0, 3.5), IntervalSet({Interval(1.0, 2.0), Interval(3.0, 3.5)}));
}

TEST(Roots, MatchesDenseGridOracle) {
    auto f = [](double x) { return std::sin(3.0 * x) - 0.2 * x; };
    const auto roots = find_sign_changes(f, Interval(0.05, 6.0), 256, 1e-10);
    const auto expected = oracle::dense_roots(f, 0.05, 6.0, 20000, false);
    ASSERT_EQ(roots.size(), expected.size());
    for (std::size_t i = 0; i < roots.size(); ++i) EXPECT_NEAR(roots[i], expected[i], 1e-9);
}

TEST(Roots, LogGridAndExactZeros) {
    auto f = [](double x) { return std::log(x); };
    const auto r = find_sign_changes(f, Interval(1e-3, 1e3), 64, 1e-10, GridSpacing::log);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0], 1.0, 1e-10);
    // Grid nodes at 0, 1, ..., 63 with a zero exactly on node 10.
    auto g = [](double x) { return x - 10.0; };
    const auto z = find_sign_changes(g, Interval(0.0, 63.0), 64);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_DOUBLE_EQ(z[0], 10.0);
    EXPECT_THROW(find_sign_changes(g, Interval(0.0, 1.0), 10), DomainError);
    EXPECT_TRUE(find_sign_changes([](double) { return 1.0; }, Interval(0.0, 1.0), 64).empty());
}

TEST(Maximize, MatchesBruteForceGrid) {
    auto f = [](double x) { return std::sin(x) * std::exp(-0.3 * x) + 0.05 * x; };
    const Maximum m = maximize_1d(f, Interval(0.0, 10.0), 1e-7);
    double best_x = 0.0, best_y = -1e300;
    for (int i = 0; i <= 1'000'000; ++i) {
        const double x = 10.0 * i / 1e6;
        if (f(x) > best_y) {
            best_y = f(x);
            best_x = x;
        }
    }
    EXPECT_NEAR(m.argmax, best_x, 1e-5);
    EXPECT_GE(m.value, best_y - 1e-12);
}

TEST(Maximize, PlateauAndBoundary) {
    const Maximum p = maximize_1d([](double) { return 1.0; }, Interval(2.0, 4.0));
    EXPECT_DOUBLE_EQ(p.argmax, 3.0);
    const Maximum b = maximize_1d([](double x) { return x; }, Interval(0.0, 1.0));
    EXPECT_NEAR(b.argmax, 1.0, 1e-5);
    EXPECT_NEAR(b.value, 1.0, 1e-5);
}

TEST(MonotoneCubic, InterpolatesAndPreservesShape) {
    std::vector<double> x{0, 1, 2, 3, 4, 5}, y{0, 0, 1, 1, 3, 10};
    const MonotoneCubic f(x, y);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(f(x[i]), y[i]);
    double prev = -1.0;
    for (double t = 0.0; t <= 5.0; t += 0.01) {
        const double v = f(t);
        EXPECT_GE(v, prev - 1e-14);
        prev = v;
    }
    for (double t = 0.0; t <= 1.0; t += 0.1) EXPECT_DOUBLE_EQ(f(t), 0.0);
    EXPECT_DOUBLE_EQ(f(-3.0), 0.0);
    EXPECT_DOUBLE_EQ(f(9.0), 10.0);
    EXPECT_THROW(MonotoneCubic({0, 0}, {1, 2}), DomainError);
}

TEST(MonotoneCubic, AccurateOnSmoothData) {
    std::vector<double> x, y;
    for (int i = 0; i <= 200; ++i) {
        x.push_back(-4.0 + 8.0 * i / 200);
        y.push_back(std::tanh(x.back()));
    }
    const MonotoneCubic f(x, y);
    for (double t = -3.9; t < 3.9; t += 0.0137) EXPECT_NEAR(f(t), std::tanh(t), 2e-5);
}

}  // namespace
