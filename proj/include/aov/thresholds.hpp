#pragma once

#include <cstdint>

#include "aov/model.hpp"

namespace aov {

// Optimal threshold pair without any holding cost. `rate` is the request
// rate seen by the content (p * beta in a multi-content system).
struct InfiniteCapacitySolution {
    double tau_star = 0.0;
    std::uint64_t q_star = 0;
    double theta = 0.0;  // average cost per unit time
};

InfiniteCapacitySolution solve_infinite_capacity(double rate, double lambda, const CostModel& costs);

// Best policy when the content is never cached: wait for q_hat requests
// then fetch and discard.
struct DiscardSolution {
    std::uint64_t q_hat = 0;
    double theta = 0.0;  // cost of that policy
    double tau0 = 0.0;   // theta / (p beta c_a lambda)
};

DiscardSolution solve_q_hat(const ContentParams& c, double beta);

// Holding cost above which caching this content never pays off.
double holding_cost_limit(const ContentParams& c, double beta);

// Solution of x + exp(-x) = 1 + y for x >= 0 (bisection).
double solve_exp_gap(double y);

enum class HoldingRegime { Free, Mixed, NeverCache };

// Thresholds of the optimal single-content policy under holding cost C_h.
struct ThresholdSet {
    HoldingRegime regime = HoldingRegime::Free;
    double holding = 0.0;
    double tau_bar = 0.0;    // evict/keep boundary
    double tau_tilde = 0.0;  // refresh boundary
    std::uint64_t q_bar = 0;
    double theta = 0.0;      // optimal average cost (holding charge included)
    double x = 0.0;          // beta (tau_tilde - tau_bar)
};

// Stationarity root tau_bar for a fixed queue threshold q, given
// x = solve_exp_gap(C_h / (p c_a lambda)). Clamped at 0.
double mixed_tau_bar(const ContentParams& c, double beta, double holding, double x, std::uint64_t q);

// Everything needed to evaluate the optimal single-content policy.
struct ContentThresholds {
    InfiniteCapacitySolution free;  // at rate p * beta
    DiscardSolution discard;
    double limit = 0.0;             // I
};

ContentThresholds content_thresholds(const ContentParams& c, double beta);

// Mixed regime solve; valid for 0 <= C_h <= I (tiny overshoot is clamped).
ThresholdSet solve_mixed(const ContentParams& c, double beta, double holding);
ThresholdSet solve_mixed(const ContentParams& c, double beta, double holding,
                         const ContentThresholds& pre);

// Dispatches on the regime; C_h must be >= 0.
ThresholdSet solve_thresholds(const ContentParams& c, double beta, double holding);
ThresholdSet solve_thresholds(const ContentParams& c, double beta, double holding,
                              const ContentThresholds& pre);

// Residuals of the mixed-regime equations at a computed solution.
struct MixedResiduals {
    double exp_gap = 0.0;    // x + e^-x - 1 - C_h/(p c_a lambda)
    double stationarity = 0.0;
    double floor_gap = 0.0;  // 0 when q_bar == floor(p beta c_a lambda tau_tilde / c_w)
};

MixedResiduals mixed_residuals(const ContentParams& c, double beta, const ThresholdSet& t);

}  // namespace aov
