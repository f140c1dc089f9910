#pragma once

// Machinery shared by the game variants: the cont/stop region of a utility
// difference, and expectations of interpolated stage utilities under the
// t1 -> t2 price transition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "htlc/expectation.hpp"
#include "htlc/numerics.hpp"
#include "htlc/scenario.hpp"

namespace htlc {

struct SolverConfig {
    IntegrationConfig integration;
    std::size_t t2_scan_points = 1024;    ///< log grid for Bob's t2 indifference points
    std::size_t pstar_scan_points = 512;  ///< linear grid over [0.1 p1, 5 p1]
    std::size_t t1_grid_points = 2001;    ///< log-price nodes for t2 utilities
    double t1_grid_halfwidth = 8.0;       ///< node span, in log-price standard deviations
    double root_tol = kRootTol;
};

/// The region where `advantage` (cont minus stop) is positive, plus the
/// number of indifference points found on the way.
struct ContinuationRegion {
    IntervalSet set;
    std::size_t root_count = 0;
};

enum class OpenEnds { extend, clip };

/// Builds {x : advantage(x) > 0} from the sign changes of advantage on the
/// scan window. With OpenEnds::extend, a positive first (last) segment is
/// taken to continue to 0 (+inf).
template <class F>
ContinuationRegion continuation_region(F&& advantage, const Interval& window, std::size_t n_grid,
                                       double tol, GridSpacing spacing, OpenEnds ends) {
    ContinuationRegion out;
    const auto roots = find_sign_changes(advantage, window, n_grid, tol, spacing);
    out.root_count = roots.size();
    std::vector<double> edges;
    edges.push_back(window.lo);
    for (double r : roots)
        if (r > edges.back()) edges.push_back(r);
    if (window.hi > edges.back()) edges.push_back(window.hi);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i];
        const double b = edges[i + 1];
        const double mid = spacing == GridSpacing::log ? std::sqrt(a * b) : 0.5 * (a + b);
        if (!(advantage(mid) > 0.0)) continue;
        const bool first = i == 0;
        const bool last = i + 2 == edges.size();
        const double lo = (first && ends == OpenEnds::extend) ? 0.0 : a;
        const double hi =
            (last && ends == OpenEnds::extend) ? std::numeric_limits<double>::infinity() : b;
        out.set.add(Interval(lo, hi));
    }
    return out;
}

/// Window for Bob's t2 indifference search: the central 1 - 2e-6 of the t2
/// price law, widened to [1e-4 P*, 10 P*] since the crossings scale with the
/// agreed rate rather than with p1. The lower end is pushed towards 0 until
/// the advantage has the sign it has at 0+, and the upper end grows until
/// the advantage turns negative.
template <class F>
Interval bob_t2_window(F&& advantage, const Scenario& s, double sign_at_zero) {
    const double p1 = s.market.p0;
    const double tau = s.timeline.tau_a;
    double lo = std::min(price_quantile(1e-6, p1, tau, s.market), 1e-4 * s.p_star);
    double hi = std::max(price_quantile(1.0 - 1e-6, p1, tau, s.market), 10.0 * s.p_star);
    for (int i = 0; i < 12 && advantage(lo) * sign_at_zero <= 0.0; ++i) lo *= 0.1;
    for (int i = 0; i < 8 && advantage(hi) > 0.0; ++i) hi *= 4.0;
    return {lo, hi};
}

namespace detail {

/// Expected value, over the t2 price given p1, of stage-2 utilities on the
/// region `set`. Utilities are tabulated on a log-price grid around the
/// forward price and interpolated with a monotone cubic in log price.
struct RegionExpectation {
    double alice = 0.0;        ///< integral of pdf * alice utility over the region
    double bob = 0.0;          ///< integral of pdf * bob utility over the region
    double probability = 0.0;  ///< probability of the region
    double price_mass = 0.0;   ///< integral of pdf * x over the region
};

template <class StageFn>
RegionExpectation expect_over_region(StageFn&& stage, const IntervalSet& set, double p1,
                                     const Scenario& s, const SolverConfig& cfg) {
    RegionExpectation out;
    const auto& m = s.market;
    const double tau = s.timeline.tau_a;
    const std::size_t n = cfg.t1_grid_points;
    const double centre = std::log(p1) + m.log_drift(tau);
    const double half = cfg.t1_grid_halfwidth * m.log_stddev(tau);
    const double u0 = centre - half;
    const double du = 2.0 * half / double(n - 1);
    const Interval support = truncated_support(p1, tau, m, cfg.integration.tail_mass);

    for (const auto& iv : set) {
        out.probability += probability_between(iv.lo, iv.hi, p1, tau, m);
        const double a = std::max(iv.lo, support.lo);
        const double b = std::min(iv.hi, support.hi);
        if (!(a < b)) continue;
        auto i0 = static_cast<std::ptrdiff_t>(std::floor((std::log(a) - u0) / du)) - 1;
        auto i1 = static_cast<std::ptrdiff_t>(std::ceil((std::log(b) - u0) / du)) + 1;
        i0 = std::clamp<std::ptrdiff_t>(i0, 0, std::ptrdiff_t(n) - 1);
        i1 = std::clamp<std::ptrdiff_t>(i1, 0, std::ptrdiff_t(n) - 1);
        while (i1 - i0 < 3) {
            if (i0 > 0) --i0;
            if (i1 - i0 < 3 && i1 + 1 < std::ptrdiff_t(n)) ++i1;
        }
        std::vector<double> u, ya, yb;
        for (auto i = i0; i <= i1; ++i) {
            const double ui = u0 + du * double(i);
            const StageUtilities su = stage(std::exp(ui));
            u.push_back(ui);
            ya.push_back(su.alice_cont);
            yb.push_back(su.bob_cont);
        }
        const MonotoneCubic alice_fn(u, std::move(ya));
        const MonotoneCubic bob_fn(std::move(u), std::move(yb));
        out.alice += expect_between([&](double x) { return alice_fn(std::log(x)); }, a, b, p1, tau, m,
                                    cfg.integration);
        out.bob += expect_between([&](double x) { return bob_fn(std::log(x)); }, a, b, p1, tau, m,
                                  cfg.integration);
        out.price_mass += expect_between([](double x) { return x; }, a, b, p1, tau, m, cfg.integration);
    }
    return out;
}

}  // namespace detail

}  // namespace htlc
