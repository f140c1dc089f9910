#pragma once

// Flexible lock amounts: Alice locks P* Token_a at t1, Bob then chooses how
// much Token_b (X) to lock at t2, and the effective exchange rate P*/X is
// only known once he has chosen.

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "htlc/baseline.hpp"

namespace htlc {

/// How Bob picks X at t2.
enum class LockRule {
    optimal,  ///< maximizer of his excess utility over X >= 0
    unit,     ///< X in {0, 1}: lock exactly one token or decline (reproduces the baseline)
};

/// Alice's t3 threshold when Bob has locked x Token_b; +inf for x = 0.
inline double threshold_t3_flexible(double x, const Scenario& s) {
    if (!(x >= 0.0)) throw DomainError("lock amount must be >= 0");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    return threshold_t3(s) / x;
}

/// Bob's excess utility at t2 from locking x Token_b: the value of the swap
/// lottery less the value of keeping the x tokens. Zero at x = 0.
inline double bob_excess_utility_t2_flexible(double x, double p2, const Scenario& s,
                                             const IntegrationConfig& cfg = {}) {
    if (!(p2 > 0.0)) throw DomainError("p2 must be > 0");
    if (!(x >= 0.0)) throw DomainError("lock amount must be >= 0");
    if (x == 0.0) return 0.0;
    const auto& tl = s.timeline;
    const double threshold = threshold_t3_flexible(x, s);
    const StageUtilities at3 = utilities_t3(1.0, s);
    const double refund_factor = std::exp(2.0 * s.market.mu * tl.tau_b) * s.bob.discount(2.0 * tl.tau_b);
    const double reveal = 1.0 - price_cdf(threshold, p2, tl.tau_b, s.market);
    const double refund =
        expect_between([&](double v) { return refund_factor * v; }, 0.0, threshold, p2, tl.tau_b, s.market, cfg);
    return (reveal * at3.bob_cont + x * refund) * s.bob.discount(tl.tau_b) - x * p2;
}

/// Alice's t2 utility when Bob has locked x Token_b.
inline double alice_utility_t2_flexible(double x, double p2, const Scenario& s, const IntegrationConfig& cfg = {}) {
    if (!(p2 > 0.0)) throw DomainError("p2 must be > 0");
    if (!(x >= 0.0)) throw DomainError("lock amount must be >= 0");
    const auto& tl = s.timeline;
    const StageUtilities at3 = utilities_t3(1.0, s);
    if (x == 0.0) return at3.alice_stop * s.alice.discount(tl.tau_b);
    const double threshold = threshold_t3_flexible(x, s);
    const double swap_factor =
        (1.0 + s.alice.alpha) * std::exp(s.market.mu * tl.tau_b) * s.alice.discount(tl.tau_b);
    const double withhold = price_cdf(threshold, p2, tl.tau_b, s.market);
    const double swap = expect_between([&](double v) { return swap_factor * v; }, threshold,
                                       std::numeric_limits<double>::infinity(), p2, tl.tau_b, s.market, cfg);
    return (x * swap + withhold * at3.alice_stop) * s.alice.discount(tl.tau_b);
}

/// Bob's lock amount at t2 given Alice locked `p_star`. The optimal rule
/// scans X over [0, 10 p_star / p2] on 256 points and refines in the best
/// cell; ties with declining resolve to X = 0.
inline double optimal_lock_amount(double p2, double p_star, const Scenario& s, const SolverConfig& cfg = {},
                                  LockRule rule = LockRule::optimal) {
    if (!(p2 > 0.0)) throw DomainError("p2 must be > 0");
    const Scenario at = s.with_p_star(p_star);
    auto excess = [&](double x) { return bob_excess_utility_t2_flexible(x, p2, at, cfg.integration); };
    if (rule == LockRule::unit) return excess(1.0) > 0.0 ? 1.0 : 0.0;
    const Maximum best = maximize_1d(excess, Interval(0.0, 10.0 * p_star / p2), kMaximizeTol * 1e-2, 256);
    return best.value > 0.0 ? best.argmax : 0.0;
}

/// Bob's lock rule tabulated for one (scenario, P*) on 513 log-price nodes
/// spanning +-8 sd of the t2 price, with monotone interpolation in between.
class FlexiblePolicy {
public:
    FlexiblePolicy(const Scenario& s, const SolverConfig& cfg = {}, LockRule rule = LockRule::optimal,
                   std::size_t nodes = 513)
        : scenario_(s), rule_(rule), p3_lower_unit_(threshold_t3(s)) {
        s.validate();
        const auto& m = s.market;
        const double tau = s.timeline.tau_a;
        const double centre = std::log(m.p0) + m.log_drift(tau);
        const double half = cfg.t1_grid_halfwidth * m.log_stddev(tau);
        std::vector<double> u(nodes), lock(nodes), alice(nodes);
        for (std::size_t i = 0; i < nodes; ++i) {
            u[i] = centre - half + 2.0 * half * double(i) / double(nodes - 1);
            const double p2 = std::exp(u[i]);
            lock[i] = optimal_lock_amount(p2, s.p_star, s, cfg, rule);
            alice[i] = alice_utility_t2_flexible(lock[i], p2, s, cfg.integration);
        }
        if (rule == LockRule::unit) {
            // Bob's {0, 1} choice is a step at his indifference points; keep
            // it exact rather than interpolating across the jump.
            unit_range_ = feasible_range_t2(s, cfg);
        }
        lock_ = std::make_shared<MonotoneCubic>(u, std::move(lock));
        alice_ = std::make_shared<MonotoneCubic>(std::move(u), std::move(alice));
    }

    const Scenario& scenario_ref() const { return scenario_; }
    double collateral() const { return 0.0; }
    LockRule rule() const { return rule_; }

    double lock_amount(double p2) const {
        if (rule_ == LockRule::unit) return unit_range_ && unit_range_->contains(p2) ? 1.0 : 0.0;
        const double x = (*lock_)(std::log(p2));
        return x > 0.0 ? x : 0.0;
    }

    double alice_threshold(double lock) const { return lock > 0.0 ? p3_lower_unit_ / lock : std::numeric_limits<double>::infinity(); }

    /// Alice's t2 utility under Bob's tabulated response.
    double alice_utility_t2(double p2) const {
        if (rule_ == LockRule::unit) return alice_utility_t2_flexible(lock_amount(p2), p2, scenario_);
        return (*alice_)(std::log(p2));
    }

private:
    Scenario scenario_;
    LockRule rule_;
    double p3_lower_unit_;
    std::optional<Interval> unit_range_;
    std::shared_ptr<MonotoneCubic> lock_;
    std::shared_ptr<MonotoneCubic> alice_;
};

/// Alice's excess utility at t1 from locking P* Token_a, anticipating Bob's
/// lock rule.
inline double alice_excess_utility_t1_flexible(const FlexiblePolicy& pol, const SolverConfig& cfg = {}) {
    const Scenario& s = pol.scenario_ref();
    const auto& tl = s.timeline;
    const double p1 = s.market.p0;
    const double value = expect_between([&](double p2) { return pol.alice_utility_t2(p2); }, 0.0,
                                        std::numeric_limits<double>::infinity(), p1, tl.tau_a, s.market, cfg.integration);
    return value * s.alice.discount(tl.tau_a) - s.p_star;
}

inline double alice_excess_utility_t1_flexible(double p_star, const Scenario& s, const SolverConfig& cfg = {},
                                               LockRule rule = LockRule::optimal) {
    if (!(p_star > 0.0)) throw DomainError("p_star must be > 0");
    return alice_excess_utility_t1_flexible(FlexiblePolicy(s.with_p_star(p_star), cfg, rule), cfg);
}

/// Probability the swap completes, integrating over the t2 price with Bob's
/// lock amount and Alice's resulting threshold.
inline double success_rate_flexible(const FlexiblePolicy& pol, const SolverConfig& cfg = {}) {
    const Scenario& s = pol.scenario_ref();
    const auto& tl = s.timeline;
    auto completes = [&](double p2) {
        const double x = pol.lock_amount(p2);
        if (x <= 0.0) return 0.0;
        return 1.0 - price_cdf(pol.alice_threshold(x), p2, tl.tau_b, s.market);
    };
    if (pol.rule() == LockRule::unit) {
        const auto range = feasible_range_t2(s, cfg);
        if (!range) return 0.0;
        return expect_between(completes, range->lo, range->hi, s.market.p0, tl.tau_a, s.market, cfg.integration);
    }
    return expect_between(completes, 0.0, std::numeric_limits<double>::infinity(), s.market.p0, tl.tau_a, s.market,
                          cfg.integration);
}

inline double success_rate_flexible(double p_star, const Scenario& s, const SolverConfig& cfg = {},
                                    LockRule rule = LockRule::optimal) {
    if (!(p_star > 0.0)) throw DomainError("p_star must be > 0");
    return success_rate_flexible(FlexiblePolicy(s.with_p_star(p_star), cfg, rule), cfg);
}

/// Entry bounds for Alice's lock amount over [0.1 p1, 5 p1]: `lower` is the
/// smallest P* with non-negative excess utility (absent when the excess is
/// non-negative across the whole window), `best` the excess maximizer
/// (absent when it sits on the window edge).
struct FlexibleEntry {
    std::optional<double> lower;
    std::optional<double> best;
    double best_excess = 0.0;
};

inline FlexibleEntry flexible_entry_range(const Scenario& s, const SolverConfig& cfg = {}, std::size_t scan_points = 64) {
    const double p1 = s.market.p0;
    const Interval window(0.1 * p1, 5.0 * p1);
    // The root scan and the maximizer's coarse scan share grid nodes.
    std::map<double, double> memo;
    auto excess = [&](double p) {
        const auto it = memo.find(p);
        if (it != memo.end()) return it->second;
        const double v = alice_excess_utility_t1_flexible(p, s, cfg);
        memo.emplace(p, v);
        return v;
    };
    scan_points = std::max<std::size_t>(scan_points, 64);
    FlexibleEntry out;
    const auto roots = find_sign_changes(excess, window, scan_points, cfg.root_tol);
    if (!roots.empty()) out.lower = roots.front();
    const Maximum m = maximize_1d(excess, window, kMaximizeTol, scan_points);
    out.best_excess = m.value;
    const double edge_tol = window.width() / double(scan_points - 1);
    if (m.argmax - window.lo > edge_tol && window.hi - m.argmax > edge_tol) out.best = m.argmax;
    return out;
}

}  // namespace htlc
