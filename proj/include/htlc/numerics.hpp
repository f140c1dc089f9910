#pragma once

// Deterministic numerical kernels shared by the game solvers: adaptive
// quadrature, sign-change root search, bounded 1-D maximization, and the
// interval-set algebra used to describe feasible price regions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "htlc/errors.hpp"

namespace htlc {

struct IntegrationConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    unsigned max_depth = 30;
    double tail_mass = 1e-12;  ///< probability mass cut from each tail of a lognormal support

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("tolerances must be > 0");
        if (!(tail_mass > 0.0 && tail_mass < 1e-6)) throw DomainError("tail_mass must lie in (0, 1e-6)");
        if (max_depth < 10) throw DomainError("max_depth must be >= 10");
    }
};

/// Tolerances for root refinement and maximization, in the argument's units.
inline constexpr double kRootTol = 1e-6;
inline constexpr double kMaximizeTol = 1e-5;

/// Half-open price range (lo, hi) with 0 <= lo < hi; hi may be +inf.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo >= 0.0) || !(lo < hi) || std::isnan(hi))
            throw DomainError("interval requires 0 <= lo < hi");
    }

    bool contains(double x) const { return x > lo && x < hi; }
    double width() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

/// Sorted, disjoint, non-adjacent union of intervals.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts) {
        for (const auto& iv : parts) add(iv);
    }

    /// Insert an interval, merging anything it overlaps or touches.
    void add(Interval iv) {
        std::vector<Interval> out;
        out.reserve(parts_.size() + 1);
        bool placed = false;
        for (const auto& p : parts_) {
            if (p.hi < iv.lo) {
                out.push_back(p);
            } else if (iv.hi < p.lo) {
                if (!placed) {
                    out.push_back(iv);
                    placed = true;
                }
                out.push_back(p);
            } else {
                iv = Interval(std::min(iv.lo, p.lo), std::max(iv.hi, p.hi));
            }
        }
        if (!placed) out.push_back(iv);
        parts_ = std::move(out);
    }

    bool contains(double x) const {
        return std::any_of(parts_.begin(), parts_.end(),
                           [x](const Interval& iv) { return iv.contains(x); });
    }

    IntervalSet intersect(const IntervalSet& other) const {
        IntervalSet out;
        for (const auto& a : parts_)
            for (const auto& b : other.parts_) {
                const double lo = std::max(a.lo, b.lo);
                const double hi = std::min(a.hi, b.hi);
                if (lo < hi) out.add(Interval(lo, hi));
            }
        return out;
    }

    /// Restriction to [lo, hi].
    IntervalSet clip(double lo, double hi) const { return intersect(IntervalSet({Interval(lo, hi)})); }

    bool empty() const { return parts_.empty(); }
    std::size_t size() const { return parts_.size(); }
    const Interval& operator[](std::size_t i) const { return parts_[i]; }
    auto begin() const { return parts_.begin(); }
    auto end() const { return parts_.end(); }
    bool operator==(const IntervalSet&) const = default;

private:
    std::vector<Interval> parts_;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature of f over a finite
/// interval: the panel with the largest error estimate is bisected until the
/// summed estimate is within max(abs_tol, rel_tol*|I|). A panel is never
/// split below 2^-max_depth of the interval. Throws NumericalError (carrying
/// the estimate and error bound) when the budget runs out first.
template <class F>
double integrate(F&& f, double lo, double hi, const IntegrationConfig& cfg = {}) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("integrate requires finite bounds");
    if (lo == hi) return 0.0;
    if (lo > hi) return -integrate(f, hi, lo, cfg);

    struct Panel {
        double a, b, value, error;
        unsigned depth;
        bool operator<(const Panel& o) const { return error < o.error; }
    };
    auto rule = [&f](double a, double b, unsigned depth) {
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
        // Boost reports the non-adaptive error on the reference interval [-1, 1].
        return Panel{a, b, v, 0.5 * (b - a) * err, depth};
    };

    std::vector<Panel> heap{rule(lo, hi, 0)};
    double total = heap.front().value;
    double total_err = heap.front().error;
    const std::size_t max_panels = 4096;
    while (total_err > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        if (worst.depth >= cfg.max_depth || heap.size() >= max_panels) {
            std::push_heap(heap.begin(), heap.end());
            std::ostringstream msg;
            msg << "quadrature did not converge on [" << lo << ", " << hi << "]: estimate " << total
                << ", error bound " << total_err;
            throw NumericalError(msg.str(), total, total_err);
        }
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        const Panel left = rule(worst.a, mid, worst.depth + 1);
        const Panel right = rule(mid, worst.b, worst.depth + 1);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end());
        // Re-sum occasionally to shed accumulated rounding in the running totals.
        if (heap.size() % 64 == 0) {
            total = total_err = 0.0;
            for (const auto& p : heap) {
                total += p.value;
                total_err += p.error;
            }
        }
    }
    if (!std::isfinite(total)) throw NumericalError("integrand is not finite on the interval", total, total_err);
    return total;
}

template <class F>
double integrate(F&& f, const Interval& iv, const IntegrationConfig& cfg = {}) {
    return integrate(std::forward<F>(f), iv.lo, iv.hi, cfg);
}

enum class GridSpacing { linear, log };

namespace detail {

inline std::vector<double> make_grid(const Interval& scan, std::size_t n, GridSpacing spacing) {
    std::vector<double> xs(n);
    if (spacing == GridSpacing::log) {
        if (!(scan.lo > 0.0)) throw DomainError("log grid requires lo > 0");
        const double a = std::log(scan.lo);
        const double b = std::log(scan.hi);
        for (std::size_t i = 0; i < n; ++i) xs[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
    } else {
        for (std::size_t i = 0; i < n; ++i) xs[i] = scan.lo + scan.width() * double(i) / double(n - 1);
    }
    xs.front() = scan.lo;
    xs.back() = scan.hi;
    return xs;
}

}  // namespace detail

/// Scans f on an n_grid-point grid over `scan`, and refines every bracketed
/// sign change to `tol`. Roots are returned in ascending order; an exact zero
/// on a grid node is reported once.
template <class F>
std::vector<double> find_sign_changes(F&& f, const Interval& scan, std::size_t n_grid,
                                      double tol = kRootTol,
                                      GridSpacing spacing = GridSpacing::linear) {
    if (n_grid < 64) throw DomainError("find_sign_changes requires n_grid >= 64");
    if (!std::isfinite(scan.hi)) throw DomainError("scan window must be finite");
    const auto xs = detail::make_grid(scan, n_grid, spacing);
    std::vector<double> ys(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) ys[i] = f(xs[i]);

    // Bracket width well below tol, so |f(root)| is tiny for smooth f.
    const double width_tol = std::min(tol, 1e-3) * 1e-4;
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < n_grid; ++i) {
        const double ya = ys[i];
        const double yb = ys[i + 1];
        if (ya == 0.0) {
            const bool left_crossing = i > 0 && ys[i - 1] != 0.0;
            if (i == 0 || left_crossing) roots.push_back(xs[i]);
            continue;
        }
        if (yb == 0.0) continue;
        if ((ya < 0.0) == (yb < 0.0)) continue;
        std::uintmax_t max_iter = 200;
        auto done = [width_tol](double a, double b) {
            return std::abs(b - a) <= width_tol * std::max(1.0, std::abs(a));
        };
        const auto [a, b] =
            boost::math::tools::toms748_solve(f, xs[i], xs[i + 1], ya, yb, done, max_iter);
        roots.push_back(std::abs(f(a)) <= std::abs(f(b)) ? a : b);
    }
    if (ys.back() == 0.0 && n_grid > 1 && ys[n_grid - 2] != 0.0) roots.push_back(xs.back());
    return roots;
}

struct Maximum {
    double argmax;
    double value;
};

/// Maximizes f on `iv`: coarse scan over n_scan points, then Brent/golden
/// section inside the best cell. The result never falls below the best grid
/// value. A plateau of equal grid maxima returns the plateau midpoint.
template <class F>
Maximum maximize_1d(F&& f, const Interval& iv, double tol = kMaximizeTol, std::size_t n_scan = 64) {
    if (!(iv.width() > 0.0) || !std::isfinite(iv.hi)) throw DomainError("maximize_1d requires a finite, non-degenerate interval");
    if (n_scan < 3) n_scan = 3;
    const auto xs = detail::make_grid(iv, n_scan, GridSpacing::linear);
    std::vector<double> ys(n_scan);
    for (std::size_t i = 0; i < n_scan; ++i) ys[i] = f(xs[i]);

    const std::size_t best = static_cast<std::size_t>(std::max_element(ys.begin(), ys.end()) - ys.begin());
    std::size_t last = best;
    while (last + 1 < n_scan && ys[last + 1] == ys[best]) ++last;
    if (last > best) {
        const double mid = 0.5 * (xs[best] + xs[last]);
        return {mid, f(mid)};
    }

    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[std::min(best + 1, n_scan - 1)];
    // Brent's bits argument sets relative precision; tighten until the
    // absolute bracket is below tol.
    const int bits = std::clamp(static_cast<int>(-std::log2(tol / std::max(1.0, std::abs(b)))) + 2, 8,
                                std::numeric_limits<double>::digits / 2);
    std::uintmax_t max_iter = 200;
    const auto [x, neg] = boost::math::tools::brent_find_minima(
        [&f](double x) { return -f(x); }, a, b, bits, max_iter);
    if (-neg > ys[best]) return {x, -neg};
    return {xs[best], ys[best]};
}

/// Shape-preserving (Fritsch-Carlson) cubic Hermite interpolant on strictly
/// increasing nodes. Evaluation outside the node range clamps to the end
/// values.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw DomainError("MonotoneCubic needs >= 2 matching nodes");
        std::vector<double> h(n - 1), delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            if (!(h[i] > 0.0)) throw DomainError("MonotoneCubic nodes must be strictly increasing");
            delta[i] = (y_[i + 1] - y_[i]) / h[i];
        }
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = delta[0];
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) continue;
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
        d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        const std::size_t i =
            static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * d_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
               (t3 - t2) * h * d_[i + 1];
    }

private:
    // Three-point end condition, limited to keep monotonicity.
    static double end_slope(double h0, double h1, double del0, double del1) {
        double d = ((2 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
        if (d * del0 <= 0.0) return 0.0;
        if (del0 * del1 <= 0.0 && std::abs(d) > std::abs(3 * del0)) return 3 * del0;
        return d;
    }

    std::vector<double> x_, y_, d_;
};

}  // namespace htlc
