#pragma once

// Forward-play Monte Carlo of the swap under a derived policy. Prices are
// drawn exactly at t2 and t3 (the only instants where decisions depend on
// them); payoffs received later are valued at their expected Token_a value
// at receipt, discounted to t0.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "htlc/collateral.hpp"
#include "htlc/flexible.hpp"
#include "htlc/random.hpp"

namespace htlc {

enum class Variant { baseline, collateral, flexible };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::baseline: return "baseline";
        case Variant::collateral: return "collateral";
        case Variant::flexible: return "flexible";
    }
    return "?";
}

struct SimConfig {
    std::size_t n_replications = 1'000'000;
    std::uint64_t seed = 42;
    unsigned workers = 1;  ///< threads; results do not depend on this

    void validate() const {
        if (n_replications < 1) throw DomainError("sim.n must be >= 1");
    }
};

struct SimEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    /// (reference - mean) / std_error; 0 when both agree exactly.
    double z_score(double reference) const {
        const double d = reference - mean;
        if (std_error > 0.0) return d / std_error;
        return d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
    }
};

enum class Asset { token_a, token_b };

struct AgentOutcome {
    Asset asset = Asset::token_a;  ///< swap asset received (Token_a for Alice's refund)
    double value = 0.0;            ///< expected Token_a value of that asset at receipt
    double receipt_time = 0.0;     ///< hours after t0
    double collateral = 0.0;       ///< Token_a collateral received back or awarded
    double utility = 0.0;          ///< realized utility discounted to t0
};

struct GameOutcome {
    bool success = false;
    double p2 = 0.0;
    double p3 = 0.0;  ///< NaN when the game stopped at t2
    double lock = 0.0;
    Action bob_t2 = Action::stop;
    Action alice_t3 = Action::stop;
    Action bob_t4 = Action::stop;
    AgentOutcome alice;
    AgentOutcome bob;
};

/// Plays the game from t2 at price p2 with Bob locking `lock` Token_b (0
/// means he stops), then Alice's threshold rule at t3 and Bob's certain
/// redemption at t4. Bob's outcome covers the locked tokens only, so in the
/// baseline a stop leaves him his one token valued at p2.
template <class Policy, class Rng>
GameOutcome play_from_t2(const Policy& pol, double p2, double lock, Rng& rng) {
    const Scenario& s = pol.scenario_ref();
    const auto& tl = s.timeline;
    const auto& m = s.market;
    const double q = pol.collateral();
    GameOutcome g;
    g.p2 = p2;
    g.lock = lock;
    g.p3 = std::numeric_limits<double>::quiet_NaN();

    if (!(lock > 0.0)) {
        g.bob_t2 = Action::stop;
        g.alice.asset = Asset::token_a;
        g.alice.value = s.p_star;
        g.alice.receipt_time = tl.t2() + tl.tau_b + tl.eps_b + 2.0 * tl.tau_a;
        g.alice.collateral = 2.0 * q;
        g.alice.utility = g.alice.value * s.alice.discount(g.alice.receipt_time) +
                          2.0 * q * s.alice.discount(tl.t3() + tl.tau_a);
        g.bob.asset = Asset::token_b;
        g.bob.value = p2;
        g.bob.receipt_time = tl.t2();
        g.bob.utility = p2 * s.bob.discount(tl.t2());
        return g;
    }

    g.bob_t2 = Action::cont;
    g.p3 = sample_price(p2, tl.tau_b, m, rng);
    g.alice_t3 = g.p3 > pol.alice_threshold(lock) ? Action::cont : Action::stop;
    if (g.alice_t3 == Action::cont) {
        g.bob_t4 = bob_decision_t4();
        g.success = true;
        g.alice.asset = Asset::token_b;
        g.alice.value = lock * expected_price(g.p3, tl.tau_b, m);
        g.alice.receipt_time = tl.t5();
        g.alice.collateral = q;
        g.alice.utility = (1.0 + s.alice.alpha) * g.alice.value * s.alice.discount(g.alice.receipt_time) +
                          q * s.alice.discount(tl.t4() + tl.tau_a);
        g.bob.asset = Asset::token_a;
        g.bob.value = s.p_star;
        g.bob.receipt_time = tl.t6();
        g.bob.collateral = q;
        g.bob.utility = (1.0 + s.bob.alpha) * s.p_star * s.bob.discount(g.bob.receipt_time) +
                        q * s.bob.discount(tl.t3() + tl.tau_a);
    } else {
        g.alice.asset = Asset::token_a;
        g.alice.value = s.p_star;
        g.alice.receipt_time = tl.t8();
        g.alice.utility = s.p_star * s.alice.discount(g.alice.receipt_time);
        g.bob.asset = Asset::token_b;
        g.bob.value = lock * expected_price(g.p3, 2.0 * tl.tau_b, m);
        g.bob.receipt_time = tl.t7();
        g.bob.collateral = 2.0 * q;
        g.bob.utility = g.bob.value * s.bob.discount(g.bob.receipt_time) + q * s.bob.discount(tl.t3() + tl.tau_a) +
                        q * s.bob.discount(tl.t4() + tl.tau_a);
    }
    return g;
}

/// One replication from t1 with Alice initiating: P_t2 is drawn, Bob
/// applies the policy's lock rule, and play continues from t2.
template <class Policy, class Rng>
GameOutcome simulate_swap(const Scenario& s, const Policy& pol, Rng& rng) {
    if (!(pol.scenario_ref() == s)) throw DomainError("policy was derived for a different scenario");
    const double p2 = sample_price(s.market.p0, s.timeline.tau_a, s.market, rng);
    return play_from_t2(pol, p2, pol.lock_amount(p2), rng);
}

namespace detail {

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

/// Runs body(index) -> value over all replications in fixed blocks of 4096,
/// merging block sums in index order so the total is independent of the
/// worker count.
template <class Body>
Moments replicate(std::size_t n, unsigned workers, Body&& body) {
    constexpr std::size_t block = 4096;
    const std::size_t n_blocks = (n + block - 1) / block;
    std::vector<Moments> partial(n_blocks);
    auto run_block = [&](std::size_t b) {
        Moments acc;
        const std::size_t end = std::min(n, (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            const double v = body(i);
            acc.sum += v;
            acc.sum_sq += v * v;
        }
        partial[b] = acc;
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));
    if (workers == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < n_blocks; b = next++) run_block(b);
            });
        for (auto& t : pool) t.join();
    }
    Moments total;
    for (const auto& p : partial) {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
    }
    return total;
}

inline SimEstimate sample_estimate(const Moments& mo, std::size_t n) {
    SimEstimate e;
    e.n = n;
    e.mean = mo.sum / double(n);
    if (n > 1) {
        const double var = std::max(0.0, (mo.sum_sq - mo.sum * e.mean) / double(n - 1));
        e.std_error = std::sqrt(var / double(n));
    }
    return e;
}

/// Binomial standard error; zero when n = 1 or the proportion is 0 or 1.
inline SimEstimate binomial_estimate(double successes, std::size_t n) {
    SimEstimate e;
    e.n = n;
    e.mean = successes / double(n);
    if (n > 1 && e.mean > 0.0 && e.mean < 1.0) e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / double(n));
    return e;
}

}  // namespace detail

/// Monte Carlo success rate of an initiated swap under `pol`.
template <class Policy>
SimEstimate estimate_success_rate(const Policy& pol, const SimConfig& cfg) {
    cfg.validate();
    if (!pol.initiated) throw NotInitiatedError("policy's agreed rate is outside the feasible set");
    const Scenario& s = pol.scenario_ref();
    const auto mo = detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return simulate_swap(s, pol, rng).success ? 1.0 : 0.0;
    });
    return detail::binomial_estimate(mo.sum, cfg.n_replications);
}

/// Flexible policies carry no feasibility flag: Alice's entry is governed
/// by her excess utility, which the caller checks.
inline SimEstimate estimate_success_rate(const FlexiblePolicy& pol, const SimConfig& cfg) {
    cfg.validate();
    const Scenario& s = pol.scenario_ref();
    const auto mo = detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return simulate_swap(s, pol, rng).success ? 1.0 : 0.0;
    });
    return detail::binomial_estimate(mo.sum, cfg.n_replications);
}

struct UtilityEstimate {
    SimEstimate alice;
    SimEstimate bob;
};

/// Both agents' expected utility at t2 when Bob locks `lock` at price p2,
/// discounted to t2. Estimates the cont branch of the stage-2 utilities.
template <class Policy>
UtilityEstimate estimate_utilities_t2(const Policy& pol, double p2, double lock, const SimConfig& cfg) {
    cfg.validate();
    const Scenario& s = pol.scenario_ref();
    const double t2 = s.timeline.t2();
    const double ka = std::exp(s.alice.r * t2);
    const double kb = std::exp(s.bob.r * t2);
    UtilityEstimate out;
    out.alice = detail::sample_estimate(detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return ka * play_from_t2(pol, p2, lock, rng).alice.utility;
    }), cfg.n_replications);
    out.bob = detail::sample_estimate(detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return kb * play_from_t2(pol, p2, lock, rng).bob.utility;
    }), cfg.n_replications);
    return out;
}

/// Both agents' expected utility at t1 given that Alice initiates.
template <class Policy>
UtilityEstimate estimate_utilities_t1(const Policy& pol, const SimConfig& cfg) {
    cfg.validate();
    const Scenario& s = pol.scenario_ref();
    UtilityEstimate out;
    out.alice = detail::sample_estimate(detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return simulate_swap(s, pol, rng).alice.utility;
    }), cfg.n_replications);
    out.bob = detail::sample_estimate(detail::replicate(cfg.n_replications, cfg.workers, [&](std::size_t i) {
        auto rng = substream(cfg.seed, i);
        return simulate_swap(s, pol, rng).bob.utility;
    }), cfg.n_replications);
    return out;
}

}  // namespace htlc
