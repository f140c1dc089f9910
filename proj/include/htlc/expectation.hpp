#pragma once

// Expectations of functions of the future price under the lognormal
// transition, over the support truncated at `tail_mass` in each tail.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "htlc/numerics.hpp"
#include "htlc/price_model.hpp"

namespace htlc {

/// [q(tail_mass), q(1 - tail_mass)] of P_{t+tau} given P_t = p.
inline Interval truncated_support(double p, double tau, const MarketModel& m, double tail_mass) {
    const double z = -detail::normal_quantile(tail_mass);
    const double c = std::log(p) + m.log_drift(tau);
    const double s = m.log_stddev(tau);
    return {std::exp(c - z * s), std::exp(c + z * s)};
}

/// Integral of price_pdf(x; p, tau) g(x) over x in (a, b), with (a, b)
/// clipped to the truncated support. Integrates in the standardized log
/// price z, where the density is the standard normal.
template <class G>
double expect_between(G&& g, double a, double b, double p, double tau, const MarketModel& m,
                      const IntegrationConfig& cfg = {}) {
    const double z_tail = -detail::normal_quantile(cfg.tail_mass);
    const double c = std::log(p) + m.log_drift(tau);
    const double s = m.log_stddev(tau);
    const double za = a > 0.0 ? std::max(-z_tail, (std::log(a) - c) / s) : -z_tail;
    const double zb = std::isinf(b) ? z_tail : std::min(z_tail, (std::log(b) - c) / s);
    if (!(za < zb)) return 0.0;
    constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    return integrate(
        [&](double z) { return inv_sqrt_2pi * std::exp(-0.5 * z * z) * g(std::exp(c + s * z)); }, za,
        zb, cfg);
}

/// Integral of price_pdf over (a, b) in closed form.
inline double probability_between(double a, double b, double p, double tau, const MarketModel& m) {
    return price_cdf(b, p, tau, m) - price_cdf(a, p, tau, m);
}

}  // namespace htlc
