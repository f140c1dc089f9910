#pragma once

// Lognormal price mathematics for Token_b quoted in Token_a under geometric
// Brownian motion: ln(P_{t+tau}/P_t) ~ N((mu - sigma^2/2) tau, sigma^2 tau).

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/special_functions/erf.hpp>

#include "htlc/errors.hpp"

namespace htlc {

struct MarketModel {
    double mu = 0.002;    ///< drift per hour
    double sigma = 0.1;   ///< volatility per sqrt-hour
    double p0 = 2.0;      ///< initial price, Token_a per Token_b

    void validate() const {
        if (!std::isfinite(mu)) throw DomainError("market.mu must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw DomainError("market.sigma must be > 0");
        if (!(p0 > 0.0) || !std::isfinite(p0)) throw DomainError("market.p0 must be > 0");
    }

    bool operator==(const MarketModel&) const = default;

    /// Mean of ln(P_{t+tau}/P_t).
    double log_drift(double tau) const { return (mu - 0.5 * sigma * sigma) * tau; }
    /// Standard deviation of ln(P_{t+tau}/P_t).
    double log_stddev(double tau) const { return sigma * std::sqrt(tau); }
};

namespace detail {

inline void require_price(double p, const char* name) {
    if (!(p > 0.0)) throw DomainError(std::string(name) + " must be > 0");
}

inline void require_horizon(double tau, bool allow_zero) {
    if (allow_zero ? !(tau >= 0.0) : !(tau > 0.0))
        throw DomainError(allow_zero ? "tau must be >= 0" : "tau must be > 0");
}

/// Standard normal CDF, Phi(z) = erfc(-z/sqrt 2)/2.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Standard normal quantile.
inline double normal_quantile(double prob) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * prob);
}

}  // namespace detail

/// E[P_{t+tau} | P_t = p] = p e^{mu tau}.
inline double expected_price(double p, double tau, const MarketModel& m) {
    detail::require_price(p, "p");
    detail::require_horizon(tau, true);
    return p * std::exp(m.mu * tau);
}

/// Lognormal transition density of P_{t+tau} at x given P_t = p.
inline double price_pdf(double x, double p, double tau, const MarketModel& m) {
    detail::require_price(x, "x");
    detail::require_price(p, "p");
    detail::require_horizon(tau, false);
    const double s = m.log_stddev(tau);
    const double z = (std::log(x / p) - m.log_drift(tau)) / s;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * s * x);
}

/// Prob[P_{t+tau} <= x | P_t = p]. Zero for x <= 0, one for x = +inf.
inline double price_cdf(double x, double p, double tau, const MarketModel& m) {
    detail::require_price(p, "p");
    detail::require_horizon(tau, false);
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double z = (std::log(x / p) - m.log_drift(tau)) / m.log_stddev(tau);
    return detail::normal_cdf(z);
}

/// Inverse of price_cdf in x, for prob in (0, 1).
inline double price_quantile(double prob, double p, double tau, const MarketModel& m) {
    detail::require_price(p, "p");
    detail::require_horizon(tau, false);
    if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
    return p * std::exp(m.log_drift(tau) + m.log_stddev(tau) * detail::normal_quantile(prob));
}

/// Exact GBM transition draw p exp((mu - sigma^2/2) tau + sigma sqrt(tau) Z).
template <class Rng>
double sample_price(double p, double tau, const MarketModel& m, Rng& rng) {
    detail::require_price(p, "p");
    detail::require_horizon(tau, true);
    if (tau == 0.0) return p;
    std::normal_distribution<double> normal(0.0, 1.0);
    return p * std::exp(m.log_drift(tau) + m.log_stddev(tau) * normal(rng));
}

}  // namespace htlc
