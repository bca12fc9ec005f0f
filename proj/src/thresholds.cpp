#include "aov/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aov {

namespace {

void require_content(const ContentParams& c, double beta) {
    auto r = validate(c);
    if (!std::isfinite(beta) || beta <= 0.0) r.errors.push_back({"beta", "must be finite and > 0"});
    if (!r.ok()) throw DomainError(r.str());
}

// x + e^-x - 1, accurate for small x.
double exp_gap(double x) {
    if (x < 1e-4) {
        double x2 = x * x;
        return x2 * (0.5 - x / 6.0 + x2 / 24.0 - x2 * x / 120.0);
    }
    return x + std::expm1(-x);
}

// Positive root of a t^2 + b t - k = 0 with a > 0, b > 0, k >= 0.
double positive_root(double a, double b, double k) {
    if (k <= 0.0) return 0.0;
    return 2.0 * k / (b + std::sqrt(b * b + 4.0 * a * k));
}

}  // namespace

InfiniteCapacitySolution solve_infinite_capacity(double rate, double lambda, const CostModel& costs) {
    require_content(ContentParams{lambda, 1.0, costs}, rate);
    const double u = costs.c_a * lambda;
    const double cw = costs.c_w;
    const double k = 2.0 * rate * costs.c_f / cw;
    // g(q) <= 0 exactly when the root for q satisfies floor(rate u tau / c_w) >= q.
    auto g = [&](double q) { return (cw / u + 1.0) * q * q + q - k; };
    const auto bound = static_cast<std::uint64_t>(std::ceil(std::sqrt(1.0 + 8.0 * rate * costs.c_f / cw))) + 2;
    for (std::uint64_t q = 0; q <= bound; ++q) {
        const double qd = double(q);
        if (g(qd + 1.0) <= 0.0) continue;
        if (g(qd) > 0.0) break;
        const double konst = costs.c_f + cw * qd * (qd + 1.0) / (2.0 * rate);
        const double tau = positive_root(rate * u / 2.0, (qd + 1.0) * u, konst);
        return {tau, q, rate * u * tau};
    }
    throw InternalError("solve_infinite_capacity: no floor-consistent queue threshold");
}

DiscardSolution solve_q_hat(const ContentParams& c, double beta) {
    require_content(c, beta);
    const double pb = c.p * beta;
    const double cw = c.costs.c_w;
    const double k2 = 2.0 * pb * c.costs.c_f / cw;
    double q = std::floor((std::sqrt(1.0 + 4.0 * k2) - 1.0) / 2.0);
    if (q < 0.0) q = 0.0;
    while ((q + 1.0) * (q + 2.0) <= k2) q += 1.0;
    while (q > 0.0 && q * (q + 1.0) > k2) q -= 1.0;
    DiscardSolution d;
    d.q_hat = static_cast<std::uint64_t>(q);
    d.theta = (2.0 * pb * c.costs.c_f + cw * q * (q + 1.0)) / (2.0 * (q + 1.0));
    // Fixed-point check: floor(theta / c_w) must reproduce q_hat.
    const double fp = std::floor(d.theta / cw * (1.0 + 1e-14));
    if (fp != q && std::abs(d.theta / cw - q) > 1e-9 && std::abs(d.theta / cw - q - 1.0) > 1e-9)
        throw InternalError("solve_q_hat: fixed point check failed");
    d.tau0 = d.theta / (pb * c.ageing_rate());
    return d;
}

double holding_cost_limit(const ContentParams& c, double beta) {
    auto d = solve_q_hat(c, beta);
    return d.theta + c.p * c.ageing_rate() * std::expm1(-beta * d.tau0);
}

double solve_exp_gap(double y) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("solve_exp_gap: argument must be finite and >= 0");
    if (y == 0.0) return 0.0;
    double lo = 0.0, hi = y + 1.0;
    // Small y: x ~ sqrt(2y), start from a tight bracket.
    if (y < 1e-3) hi = std::min(hi, 2.0 * std::sqrt(2.0 * y));
    for (int it = 0; it < 400; ++it) {
        double mid = 0.5 * (lo + hi);
        if (exp_gap(mid) < y) lo = mid; else hi = mid;
        if (hi - lo <= 1e-12 * std::min(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

struct MixedEq {
    double beta, p, u, cf, cw, holding, d;
    // Stationarity residual as a function of tau_tilde for a given queue threshold.
    double h(double q, double tt) const {
        double tb = tt - d;
        return beta * p * u * (tt * tb - tb * tb / 2.0) - holding * tb + (q + 1.0) * u * tt - cf -
               cw * q * (q + 1.0) / (2.0 * p * beta);
    }
};

}  // namespace

double mixed_tau_bar(const ContentParams& c, double beta, double holding, double x, std::uint64_t q) {
    const double u = c.ageing_rate();
    const double pb = c.p * beta;
    const double d = x / beta;
    const double qd = double(q);
    const double a = pb * u / 2.0;
    const double b = pb * u * d - holding + (qd + 1.0) * u;
    const double k = -((qd + 1.0) * u * d - c.costs.c_f - c.costs.c_w * qd * (qd + 1.0) / (2.0 * pb));
    return positive_root(a, b, k);
}

ThresholdSet solve_mixed(const ContentParams& c, double beta, double holding,
                         const ContentThresholds& pre) {
    const double limit = pre.limit;
    if (!(holding >= 0.0)) throw DomainError("solve_mixed: holding cost must be >= 0");
    if (holding > limit * (1.0 + 1e-9) + 1e-9)
        throw DomainError("solve_mixed: holding cost " + std::to_string(holding) + " exceeds limit " +
                          std::to_string(limit));
    const double u = c.ageing_rate();
    const double pb = c.p * beta;
    const double cw = c.costs.c_w;
    const double x = solve_exp_gap(holding / (c.p * u));
    const MixedEq eq{beta, c.p, u, c.costs.c_f, cw, holding, x / beta};

    // The stationarity residual is continuous and increasing in tau_tilde across
    // queue-threshold changes, so walk the floor intervals until the sign flips.
    const double per_step = cw / (pb * u);
    auto q = static_cast<std::uint64_t>(std::floor(eq.d / per_step));
    const std::uint64_t q_cap = pre.discard.q_hat + 64;
    for (;; ++q) {
        if (q > q_cap) throw InternalError("solve_mixed: queue threshold search did not terminate");
        const double edge = (double(q) + 1.0) * per_step;
        if (eq.h(double(q), edge) > 0.0) break;
    }
    ThresholdSet t;
    t.regime = holding > 0.0 ? HoldingRegime::Mixed : HoldingRegime::Free;
    t.holding = holding;
    t.x = x;
    t.tau_bar = mixed_tau_bar(c, beta, holding, x, q);  // clamps to 0 at the limit
    t.tau_tilde = t.tau_bar + eq.d;
    t.q_bar = q;
    t.theta = pb * u * t.tau_tilde;
    return t;
}

ContentThresholds content_thresholds(const ContentParams& c, double beta) {
    ContentThresholds pre;
    pre.free = solve_infinite_capacity(c.p * beta, c.lambda, c.costs);
    pre.discard = solve_q_hat(c, beta);
    pre.limit = pre.discard.theta + c.p * c.ageing_rate() * std::expm1(-beta * pre.discard.tau0);
    return pre;
}

ThresholdSet solve_thresholds(const ContentParams& c, double beta, double holding,
                              const ContentThresholds& pre) {
    if (!(holding >= 0.0) || std::isnan(holding)) throw DomainError("holding cost must be >= 0");
    ThresholdSet t;
    t.holding = holding;
    if (holding == 0.0) {
        t.regime = HoldingRegime::Free;
        t.tau_bar = t.tau_tilde = pre.free.tau_star;
        t.q_bar = pre.free.q_star;
        t.theta = pre.free.theta;
        return t;
    }
    if (holding > pre.limit) {
        t.regime = HoldingRegime::NeverCache;
        t.tau_bar = 0.0;
        t.tau_tilde = pre.discard.tau0;
        t.q_bar = pre.discard.q_hat;
        t.theta = pre.discard.theta;
        t.x = beta * pre.discard.tau0;
        return t;
    }
    return solve_mixed(c, beta, holding, pre);
}

ThresholdSet solve_mixed(const ContentParams& c, double beta, double holding) {
    return solve_mixed(c, beta, holding, content_thresholds(c, beta));
}

ThresholdSet solve_thresholds(const ContentParams& c, double beta, double holding) {
    return solve_thresholds(c, beta, holding, content_thresholds(c, beta));
}

MixedResiduals mixed_residuals(const ContentParams& c, double beta, const ThresholdSet& t) {
    const double u = c.ageing_rate();
    const MixedEq eq{beta, c.p, u, c.costs.c_f, c.costs.c_w, t.holding, t.x / beta};
    MixedResiduals r;
    r.exp_gap = exp_gap(t.x) - t.holding / (c.p * u);
    r.stationarity = eq.h(double(t.q_bar), t.tau_tilde);
    r.floor_gap = double(t.q_bar) - std::floor(c.p * beta * u * t.tau_tilde / c.costs.c_w);
    return r;
}

}  // namespace aov
