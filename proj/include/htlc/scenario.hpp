#pragma once

// Agents, idealized zero-waiting timeline, and the swap scenario.

#include <cmath>
#include <string>

#include "htlc/errors.hpp"
#include "htlc/price_model.hpp"

namespace htlc {

/// Utility parameters of one agent.
struct AgentParams {
    double alpha = 0.3;  ///< success premium
    double r = 0.01;     ///< discount rate per hour

    void validate(const std::string& who) const {
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError(who + ".alpha must be >= 0");
        if (!(r > 0.0) || !std::isfinite(r)) throw DomainError(who + ".r must be > 0");
    }

    /// e^{-r t}
    double discount(double hours) const { return std::exp(-r * hours); }

    bool operator==(const AgentParams&) const = default;
};

/// Confirmation times and the zero-waiting schedule. All instants are hours
/// after t0, and t1 = t0.
struct SwapTimeline {
    double tau_a = 3.0;  ///< confirmation time on Chain_a
    double tau_b = 4.0;  ///< confirmation time on Chain_b
    double eps_b = 1.0;  ///< delay until a Chain_b transaction is visible in the mempool

    void validate() const {
        if (!(tau_a > 0.0) || !std::isfinite(tau_a)) throw DomainError("chain.tau_a must be > 0");
        if (!(tau_b > 0.0) || !std::isfinite(tau_b)) throw DomainError("chain.tau_b must be > 0");
        if (!(eps_b >= 0.0)) throw DomainError("chain.eps_b must be >= 0");
        if (!(eps_b < tau_b)) throw DomainError("chain.eps_b must be < chain.tau_b");
    }

    double t1() const { return 0.0; }
    double t2() const { return t1() + tau_a; }            // Bob locks Token_b
    double t3() const { return t2() + tau_b; }            // Alice reveals the secret
    double t4() const { return t3() + eps_b; }            // Bob unlocks Token_a
    double tb() const { return t3() + tau_b; }            // Chain_b lock expiry
    double ta() const { return t4() + tau_a; }            // Chain_a lock expiry
    double t5() const { return tb(); }                    // Alice receives Token_b
    double t6() const { return ta(); }                    // Bob receives Token_a
    double t7() const { return tb() + tau_b; }            // Bob's refund
    double t8() const { return ta() + tau_a; }            // Alice's refund

    bool operator==(const SwapTimeline&) const = default;
};

struct Scenario {
    MarketModel market;
    AgentParams alice;
    AgentParams bob;
    SwapTimeline timeline;
    double p_star = 2.0;  ///< agreed rate, Token_a per Token_b

    /// Default parameter table; the agreed rate defaults to the initial price.
    static Scenario defaults() { return Scenario{}; }

    void validate() const {
        market.validate();
        alice.validate("alice");
        bob.validate("bob");
        timeline.validate();
        if (!(p_star > 0.0) || !std::isfinite(p_star)) throw DomainError("swap.p_star must be > 0");
    }

    Scenario with_p_star(double p) const {
        Scenario s = *this;
        s.p_star = p;
        return s;
    }

    bool operator==(const Scenario&) const = default;
};

/// Both agents' utilities for each action at one decision stage.
struct StageUtilities {
    double alice_cont = 0.0;
    double alice_stop = 0.0;
    double bob_cont = 0.0;
    double bob_stop = 0.0;
};

enum class Action { cont, stop };

}  // namespace htlc
