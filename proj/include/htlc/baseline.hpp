#pragma once

// Backward induction for the standard HTLC swap, and its success rate.
//
//   t4  Bob redeems Token_a once the secret is public (always).
//   t3  Alice reveals iff P_t3 exceeds a closed-form threshold.
//   t2  Bob locks Token_b iff P_t2 lies in an interval found numerically.
//   t1  Alice initiates iff the agreed rate lies in a feasible interval.

#include <cmath>
#include <optional>

#include "htlc/errors.hpp"
#include "htlc/expectation.hpp"
#include "htlc/numerics.hpp"
#include "htlc/scenario.hpp"
#include "htlc/stage.hpp"

namespace htlc {

/// Closed-form stage-3 utilities at Token_b price p3.
inline StageUtilities utilities_t3(double p3, const Scenario& s) {
    if (!(p3 > 0.0)) throw DomainError("p3 must be > 0");
    const auto& tl = s.timeline;
    const auto& m = s.market;
    StageUtilities u;
    // cont: Alice gets Token_b at t3 + tau_b, Bob gets P* at t3 + eps_b + tau_a.
    u.alice_cont = (1.0 + s.alice.alpha) * expected_price(p3, tl.tau_b, m) * s.alice.discount(tl.tau_b);
    u.bob_cont = (1.0 + s.bob.alpha) * s.p_star * s.bob.discount(tl.eps_b + tl.tau_a);
    // stop: both refunds, at t8 and t7 respectively.
    u.alice_stop = s.p_star * s.alice.discount(tl.eps_b + 2.0 * tl.tau_a);
    u.bob_stop = expected_price(p3, 2.0 * tl.tau_b, m) * s.bob.discount(2.0 * tl.tau_b);
    return u;
}

/// Price at which Alice is indifferent at t3. Proportional to P*.
inline double threshold_t3(const Scenario& s) {
    const auto& tl = s.timeline;
    const double ra = s.alice.r;
    return std::exp((ra - s.market.mu) * tl.tau_b - ra * (tl.eps_b + 2.0 * tl.tau_a)) * s.p_star /
           (1.0 + s.alice.alpha);
}

/// Alice continues strictly above the threshold; a tie stops.
inline Action alice_decision_t3(double p3, const Scenario& s) {
    if (!(p3 > 0.0)) throw DomainError("p3 must be > 0");
    return p3 > threshold_t3(s) ? Action::cont : Action::stop;
}

/// Once the secret is public Bob always redeems.
constexpr Action bob_decision_t4() { return Action::cont; }

namespace detail {

/// Bob's t2 continuation utility when Alice reveals above `threshold`.
inline double bob_cont_t2(double p2, double threshold, const Scenario& s, const IntegrationConfig& cfg) {
    const auto& tl = s.timeline;
    const StageUtilities at3 = utilities_t3(1.0, s);
    const double refund_factor = std::exp(2.0 * s.market.mu * tl.tau_b) * s.bob.discount(2.0 * tl.tau_b);
    const double reveal = 1.0 - price_cdf(threshold, p2, tl.tau_b, s.market);
    const double refund =
        expect_between([&](double x) { return refund_factor * x; }, 0.0, threshold, p2, tl.tau_b, s.market, cfg);
    return (reveal * at3.bob_cont + refund) * s.bob.discount(tl.tau_b);
}

inline double alice_cont_t2(double p2, double threshold, const Scenario& s, const IntegrationConfig& cfg) {
    const auto& tl = s.timeline;
    const StageUtilities at3 = utilities_t3(1.0, s);
    const double swap_factor =
        (1.0 + s.alice.alpha) * std::exp(s.market.mu * tl.tau_b) * s.alice.discount(tl.tau_b);
    const double withhold = price_cdf(threshold, p2, tl.tau_b, s.market);
    const double swap = expect_between([&](double x) { return swap_factor * x; }, threshold,
                                       std::numeric_limits<double>::infinity(), p2, tl.tau_b, s.market, cfg);
    return (swap + withhold * at3.alice_stop) * s.alice.discount(tl.tau_b);
}

}  // namespace detail

/// Stage-2 utilities: continuation values are expectations over the t3
/// price with Alice's threshold rule applied, discounted over tau_b.
inline StageUtilities utilities_t2(double p2, const Scenario& s, const IntegrationConfig& cfg = {}) {
    if (!(p2 > 0.0)) throw DomainError("p2 must be > 0");
    const auto& tl = s.timeline;
    const double threshold = threshold_t3(s);
    StageUtilities u;
    u.alice_cont = detail::alice_cont_t2(p2, threshold, s, cfg);
    u.bob_cont = detail::bob_cont_t2(p2, threshold, s, cfg);
    u.alice_stop = s.p_star * s.alice.discount(tl.tau_b + tl.eps_b + 2.0 * tl.tau_a);
    u.bob_stop = p2;
    return u;
}

/// Bob's cont region at t2 for the given scenario, as found by the scan.
inline ContinuationRegion bob_region_t2(const Scenario& s, const SolverConfig& cfg = {}) {
    const double threshold = threshold_t3(s);
    auto advantage = [&](double p2) { return detail::bob_cont_t2(p2, threshold, s, cfg.integration) - p2; };
    const Interval window = bob_t2_window(advantage, s, -1.0);
    return continuation_region(advantage, window, cfg.t2_scan_points, cfg.root_tol, GridSpacing::log,
                               OpenEnds::extend);
}

/// The interval of t2 prices at which Bob locks Token_b; empty when he
/// never does. Any other root pattern is a NumericalError.
inline std::optional<Interval> feasible_range_t2(const Scenario& s, const SolverConfig& cfg = {}) {
    const ContinuationRegion region = bob_region_t2(s, cfg);
    if (region.set.empty()) return std::nullopt;
    if (region.root_count != 2 || region.set.size() != 1 || std::isinf(region.set[0].hi) ||
        region.set[0].lo == 0.0)
        throw NumericalError("unexpected indifference pattern for Bob at t2 (" +
                             std::to_string(region.root_count) + " roots)");
    return region.set[0];
}

namespace detail {

inline StageUtilities utilities_t1_given(double p1, const Scenario& s, const std::optional<Interval>& range2,
                                         const SolverConfig& cfg) {
    const auto& tl = s.timeline;
    const auto& m = s.market;
    const double alice_stop2 = s.p_star * s.alice.discount(tl.tau_b + tl.eps_b + 2.0 * tl.tau_a);
    const double forward = expected_price(p1, tl.tau_a, m);
    StageUtilities u;
    u.alice_stop = s.p_star;
    u.bob_stop = p1;
    if (!range2) {
        u.alice_cont = alice_stop2 * s.alice.discount(tl.tau_a);
        u.bob_cont = forward * s.bob.discount(tl.tau_a);
        return u;
    }
    const IntervalSet region({*range2});
    const auto e = detail::expect_over_region([&](double p2) { return utilities_t2(p2, s, cfg.integration); },
                                              region, p1, s, cfg);
    u.alice_cont = (e.alice + (1.0 - e.probability) * alice_stop2) * s.alice.discount(tl.tau_a);
    u.bob_cont = (e.bob + (forward - e.price_mass)) * s.bob.discount(tl.tau_a);
    return u;
}

}  // namespace detail

/// Stage-1 utilities at Token_b price p1 (= P_t0). Bob's stop branch keeps
/// Token_b; his cont branch values the t2 refusals at the t2 price.
inline StageUtilities utilities_t1(double p1, const Scenario& s, const SolverConfig& cfg = {}) {
    if (!(p1 > 0.0)) throw DomainError("p1 must be > 0");
    Scenario at = s;
    at.market.p0 = p1;
    return detail::utilities_t1_given(p1, at, feasible_range_t2(at, cfg), cfg);
}

/// Alice's t1 advantage A_cont - P* for agreed rate `p_star`.
inline double alice_advantage_t1(double p_star, const Scenario& s, double p1, const SolverConfig& cfg = {}) {
    const StageUtilities u = utilities_t1(p1, s.with_p_star(p_star), cfg);
    return u.alice_cont - u.alice_stop;
}

/// Agreed rates at which Alice initiates, scanning P* over [0.1 p1, 5 p1].
inline std::optional<Interval> feasible_range_pstar(const Scenario& s, double p1, const SolverConfig& cfg = {}) {
    if (!(p1 > 0.0)) throw DomainError("p1 must be > 0");
    auto advantage = [&](double p) { return alice_advantage_t1(p, s, p1, cfg); };
    const Interval window(0.1 * p1, 5.0 * p1);
    const auto region =
        continuation_region(advantage, window, cfg.pstar_scan_points, cfg.root_tol, GridSpacing::linear, OpenEnds::clip);
    if (region.set.empty()) return std::nullopt;
    if (region.set.size() != 1)
        throw NumericalError("feasible agreed-rate set is not a single interval (" +
                             std::to_string(region.set.size()) + " parts)");
    return region.set[0];
}

enum class Feasibility { verify, assume };

/// Probability that an initiated swap completes: Bob locks at t2 and Alice
/// reveals at t3. Throws NotInitiatedError when Alice would not initiate.
inline double success_rate(double p_star, const Scenario& s, const SolverConfig& cfg = {},
                           Feasibility check = Feasibility::verify) {
    const Scenario at = s.with_p_star(p_star);
    const double p1 = at.market.p0;
    const auto range2 = feasible_range_t2(at, cfg);
    if (check == Feasibility::verify) {
        const StageUtilities u = detail::utilities_t1_given(p1, at, range2, cfg);
        if (!(u.alice_cont > u.alice_stop))
            throw NotInitiatedError("Alice prefers not to initiate at P* = " + std::to_string(p_star));
    }
    if (!range2) return 0.0;
    const double threshold = threshold_t3(at);
    const auto& tl = at.timeline;
    return expect_between([&](double x) { return 1.0 - price_cdf(threshold, x, tl.tau_b, at.market); },
                          range2->lo, range2->hi, p1, tl.tau_a, at.market, cfg.integration);
}

struct RateChoice {
    double p_star = 0.0;
    double sr = 0.0;
};

/// SR-maximizing agreed rate within the feasible range; nullopt when the
/// range is empty.
inline std::optional<RateChoice> max_success_rate(const Scenario& s, const SolverConfig& cfg = {}) {
    const auto range = feasible_range_pstar(s, s.market.p0, cfg);
    if (!range) return std::nullopt;
    const Maximum m = maximize_1d([&](double p) { return success_rate(p, s, cfg, Feasibility::assume); }, *range,
                                  kMaximizeTol, 32);
    return RateChoice{m.argmax, m.value};
}

/// Derived strategy profile for one scenario.
struct BaselinePolicy {
    Scenario scenario;
    double p3_lower = 0.0;
    std::optional<Interval> p2_range;
    std::optional<Interval> pstar_range;  ///< filled by solve_baseline only
    bool initiated = false;               ///< Alice initiates at the scenario's P*

    const Scenario& scenario_ref() const { return scenario; }
    double collateral() const { return 0.0; }
    double lock_amount(double p2) const { return p2_range && p2_range->contains(p2) ? 1.0 : 0.0; }
    double alice_threshold(double /*lock*/) const { return p3_lower; }
};

/// Thresholds and t2 range for the scenario's P*, plus Alice's t1 choice.
inline BaselinePolicy make_baseline_policy(const Scenario& s, const SolverConfig& cfg = {}) {
    s.validate();
    BaselinePolicy pol;
    pol.scenario = s;
    pol.p3_lower = threshold_t3(s);
    pol.p2_range = feasible_range_t2(s, cfg);
    const StageUtilities u1 = detail::utilities_t1_given(s.market.p0, s, pol.p2_range, cfg);
    pol.initiated = u1.alice_cont > u1.alice_stop;
    return pol;
}

/// Full solution including the feasible agreed-rate range.
inline BaselinePolicy solve_baseline(const Scenario& s, const SolverConfig& cfg = {}) {
    BaselinePolicy pol = make_baseline_policy(s, cfg);
    pol.pstar_range = feasible_range_pstar(s, s.market.p0, cfg);
    return pol;
}

}  // namespace htlc
