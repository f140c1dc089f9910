#pragma once

// Swap with collateral: before t1 each agent escrows Q Token_a with an
// Oracle on Chain_a. Compliance returns an agent's deposit; a stop hands
// both deposits to the counterparty.
//
// Collateral receipts, as offsets from the decision instant they follow:
//   Alice reveals  -> her Q released at t4, received at t4 + tau_a
//   Bob locks      -> his Q released at t3, received at t3 + tau_a
//   Alice stops    -> her Q to Bob at t4, received at t4 + tau_a
//   Bob stops      -> 2Q to Alice at t3, received at t3 + tau_a

#include <algorithm>
#include <cmath>
#include <limits>

#include "htlc/baseline.hpp"

namespace htlc {

struct CollateralScenario {
    Scenario base;
    double q = 0.0;  ///< deposit per agent, Token_a

    void validate() const {
        base.validate();
        if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("collateral.q must be >= 0");
    }

    CollateralScenario with_p_star(double p) const { return {base.with_p_star(p), q}; }
    bool operator==(const CollateralScenario&) const = default;
};

/// Alice's t3 threshold with collateral; zero once the deposit alone makes
/// revealing worthwhile.
inline double threshold_t3_collateral(const CollateralScenario& cs) {
    const auto& s = cs.base;
    const auto& tl = s.timeline;
    const double gap = s.p_star * s.alice.discount(tl.eps_b + 2.0 * tl.tau_a) -
                       cs.q * s.alice.discount(tl.eps_b + tl.tau_a);
    return std::exp((s.alice.r - s.market.mu) * tl.tau_b) / (1.0 + s.alice.alpha) * std::max(gap, 0.0);
}

namespace detail {

inline double bob_cont_t2_collateral(double p2, double threshold, const CollateralScenario& cs,
                                     const IntegrationConfig& cfg) {
    const auto& s = cs.base;
    const auto& tl = s.timeline;
    const StageUtilities at3 = utilities_t3(1.0, s);
    const double refund_factor = std::exp(2.0 * s.market.mu * tl.tau_b) * s.bob.discount(2.0 * tl.tau_b);
    const double forfeit = cs.q * s.bob.discount(tl.eps_b + tl.tau_a);
    const double withhold = price_cdf(threshold, p2, tl.tau_b, s.market);
    const double refund = threshold > 0.0
                              ? expect_between([&](double x) { return refund_factor * x; }, 0.0, threshold, p2,
                                               tl.tau_b, s.market, cfg)
                              : 0.0;
    const double own_deposit = cs.q * s.bob.discount(tl.tau_a);
    return (own_deposit + (1.0 - withhold) * at3.bob_cont + refund + withhold * forfeit) * s.bob.discount(tl.tau_b);
}

inline double alice_cont_t2_collateral(double p2, double threshold, const CollateralScenario& cs,
                                       const IntegrationConfig& cfg) {
    const auto& s = cs.base;
    const auto& tl = s.timeline;
    const StageUtilities at3 = utilities_t3(1.0, s);
    const double swap_factor =
        (1.0 + s.alice.alpha) * std::exp(s.market.mu * tl.tau_b) * s.alice.discount(tl.tau_b);
    const double own_deposit = cs.q * s.alice.discount(tl.eps_b + tl.tau_a);
    const double withhold = price_cdf(threshold, p2, tl.tau_b, s.market);
    const double swap = expect_between([&](double x) { return swap_factor * x; }, threshold,
                                       std::numeric_limits<double>::infinity(), p2, tl.tau_b, s.market, cfg);
    return (swap + (1.0 - withhold) * own_deposit + withhold * at3.alice_stop) * s.alice.discount(tl.tau_b);
}

inline double alice_stop_t2_collateral(const CollateralScenario& cs) {
    const auto& s = cs.base;
    const auto& tl = s.timeline;
    return s.p_star * s.alice.discount(tl.tau_b + tl.eps_b + 2.0 * tl.tau_a) +
           2.0 * cs.q * s.alice.discount(tl.tau_b + tl.tau_a);
}

}  // namespace detail

/// Stage-2 utilities with collateral. Bob's stop keeps Token_b and forfeits
/// his deposit; Alice then collects both deposits.
inline StageUtilities utilities_t2_collateral(double p2, const CollateralScenario& cs,
                                              const IntegrationConfig& cfg = {}) {
    if (!(p2 > 0.0)) throw DomainError("p2 must be > 0");
    const double threshold = threshold_t3_collateral(cs);
    StageUtilities u;
    u.alice_cont = detail::alice_cont_t2_collateral(p2, threshold, cs, cfg);
    u.bob_cont = detail::bob_cont_t2_collateral(p2, threshold, cs, cfg);
    u.alice_stop = detail::alice_stop_t2_collateral(cs);
    u.bob_stop = p2;
    return u;
}

/// Bob's t2 cont set. For Q > 0 Bob continues near p2 = 0, so the number of
/// indifference points must be odd; Q = 0 falls back to the baseline pattern.
inline IntervalSet feasible_set_t2_collateral(const CollateralScenario& cs, const SolverConfig& cfg = {}) {
    if (cs.q == 0.0) {
        const auto range = feasible_range_t2(cs.base, cfg);
        return range ? IntervalSet({*range}) : IntervalSet{};
    }
    const double threshold = threshold_t3_collateral(cs);
    auto advantage = [&](double p2) {
        return detail::bob_cont_t2_collateral(p2, threshold, cs, cfg.integration) - p2;
    };
    const Interval window = bob_t2_window(advantage, cs.base, +1.0);
    const auto region =
        continuation_region(advantage, window, cfg.t2_scan_points, cfg.root_tol, GridSpacing::log, OpenEnds::extend);
    if (region.root_count % 2 == 0)
        throw NumericalError("even number of indifference points for Bob at t2 with collateral (" +
                             std::to_string(region.root_count) + ")");
    return region.set;
}

namespace detail {

inline StageUtilities utilities_t1_collateral_given(double p1, const CollateralScenario& cs, const IntervalSet& set2,
                                                    const SolverConfig& cfg) {
    const auto& s = cs.base;
    const auto& tl = s.timeline;
    const double forward = expected_price(p1, tl.tau_a, s.market);
    const double alice_stop2 = alice_stop_t2_collateral(cs);
    const auto e = expect_over_region([&](double p2) { return utilities_t2_collateral(p2, cs, cfg.integration); },
                                      set2, p1, s, cfg);
    StageUtilities u;
    u.alice_cont = (e.alice + (1.0 - e.probability) * alice_stop2) * s.alice.discount(tl.tau_a);
    u.bob_cont = (e.bob + (forward - e.price_mass)) * s.bob.discount(tl.tau_a);
    u.alice_stop = s.p_star + cs.q;
    u.bob_stop = p1 + cs.q;
    return u;
}

}  // namespace detail

/// Stage-1 utilities with collateral. Both agents decide at t1; stopping
/// keeps the original asset and the deposit.
inline StageUtilities utilities_t1_collateral(double p1, const CollateralScenario& cs, const SolverConfig& cfg = {}) {
    if (!(p1 > 0.0)) throw DomainError("p1 must be > 0");
    CollateralScenario at = cs;
    at.base.market.p0 = p1;
    return detail::utilities_t1_collateral_given(p1, at, feasible_set_t2_collateral(at, cfg), cfg);
}

/// Each agent's set of agreed rates at which they prefer to engage, and the
/// rates at which both do.
struct CollateralPstarSets {
    IntervalSet alice;
    IntervalSet bob;
    IntervalSet both;
};

namespace detail {

/// With Q = 0 Bob commits nothing at t1 and has no decision there, so he is
/// treated as continuing.
inline bool bob_engages_t1(const StageUtilities& u, double q) { return q == 0.0 || u.bob_cont > u.bob_stop; }

}  // namespace detail

/// Scans P* over [0.1 p1, 5 p1]; a swap starts only where both agents engage.
inline CollateralPstarSets feasible_set_pstar_collateral(const CollateralScenario& cs, double p1,
                                                         const SolverConfig& cfg = {}) {
    if (!(p1 > 0.0)) throw DomainError("p1 must be > 0");
    const Interval window(0.1 * p1, 5.0 * p1);
    const std::size_t n = cfg.pstar_scan_points;

    // One t1 solve per grid node serves both agents' scans.
    std::vector<double> grid(n), adv_a(n), adv_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = window.lo + window.width() * double(i) / double(n - 1);
        const StageUtilities u = utilities_t1_collateral(p1, cs.with_p_star(grid[i]), cfg);
        adv_a[i] = u.alice_cont - u.alice_stop;
        adv_b[i] = u.bob_cont - u.bob_stop;
    }
    auto lookup_or_solve = [&](const std::vector<double>& table, bool alice) {
        return [&, alice](double p) {
            const auto it = std::lower_bound(grid.begin(), grid.end(), p);
            if (it != grid.end() && *it == p) return table[std::size_t(it - grid.begin())];
            const StageUtilities u = utilities_t1_collateral(p1, cs.with_p_star(p), cfg);
            return alice ? u.alice_cont - u.alice_stop : u.bob_cont - u.bob_stop;
        };
    };

    CollateralPstarSets out;
    out.alice = continuation_region(lookup_or_solve(adv_a, true), window, n, cfg.root_tol, GridSpacing::linear,
                                    OpenEnds::clip)
                    .set;
    if (cs.q == 0.0) {
        out.bob = IntervalSet({window});
    } else {
        out.bob = continuation_region(lookup_or_solve(adv_b, false), window, n, cfg.root_tol, GridSpacing::linear,
                                      OpenEnds::clip)
                      .set;
    }
    out.both = out.alice.intersect(out.bob);
    return out;
}

/// Success rate with collateral; throws NotInitiatedError unless both agents
/// engage at the agreed rate.
inline double success_rate_collateral(double p_star, const CollateralScenario& cs, const SolverConfig& cfg = {},
                                      Feasibility check = Feasibility::verify) {
    const CollateralScenario at = cs.with_p_star(p_star);
    const double p1 = at.base.market.p0;
    const IntervalSet set2 = feasible_set_t2_collateral(at, cfg);
    if (check == Feasibility::verify) {
        const StageUtilities u = detail::utilities_t1_collateral_given(p1, at, set2, cfg);
        if (!(u.alice_cont > u.alice_stop) || !detail::bob_engages_t1(u, at.q))
            throw NotInitiatedError("an agent prefers not to engage at P* = " + std::to_string(p_star));
    }
    const double threshold = threshold_t3_collateral(at);
    const auto& tl = at.base.timeline;
    double sr = 0.0;
    for (const auto& iv : set2)
        sr += expect_between([&](double x) { return 1.0 - price_cdf(threshold, x, tl.tau_b, at.base.market); },
                             iv.lo, iv.hi, p1, tl.tau_a, at.base.market, cfg.integration);
    return sr;
}

struct CollateralPolicy {
    CollateralScenario cscenario;
    double p3_lower = 0.0;
    IntervalSet p2_set;
    bool initiated = false;

    const Scenario& scenario_ref() const { return cscenario.base; }
    double collateral() const { return cscenario.q; }
    double lock_amount(double p2) const { return p2_set.contains(p2) ? 1.0 : 0.0; }
    double alice_threshold(double /*lock*/) const { return p3_lower; }
};

inline CollateralPolicy make_collateral_policy(const CollateralScenario& cs, const SolverConfig& cfg = {}) {
    cs.validate();
    CollateralPolicy pol;
    pol.cscenario = cs;
    pol.p3_lower = threshold_t3_collateral(cs);
    pol.p2_set = feasible_set_t2_collateral(cs, cfg);
    const StageUtilities u = detail::utilities_t1_collateral_given(cs.base.market.p0, cs, pol.p2_set, cfg);
    pol.initiated = u.alice_cont > u.alice_stop && detail::bob_engages_t1(u, cs.q);
    return pol;
}

}  // namespace htlc
