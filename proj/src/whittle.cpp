#include "aov/whittle.hpp"

#include <algorithm>
#include <cmath>

namespace aov {

namespace {

constexpr int kBisectionSteps = 60;
constexpr double kBracketSlack = 1e-9;

SingleAction uncached_rule(std::uint64_t q, std::uint64_t q_thr, SingleAction fetch) {
    return q < q_thr ? SingleAction::WaitEvict : fetch;
}

}  // namespace

std::optional<SingleAction> optimal_action(const ContentParams& c, double beta, double holding,
                                           const SingleContentState& s, const ContentThresholds& pre) {
    const auto t = solve_thresholds(c, beta, holding, pre);
    const bool never = t.regime == HoldingRegime::NeverCache;
    const auto fetch = never ? SingleAction::FetchEvict : SingleAction::FetchKeep;

    if (!s.cached) {
        if (!s.requested) return std::nullopt;
        return uncached_rule(s.queue, t.q_bar, fetch);
    }
    // Queued cached states follow the extension rule.
    if (s.queue > 0) {
        if (!s.requested) return SingleAction::WaitEvict;
        return uncached_rule(s.queue, t.q_bar, fetch);
    }
    if (never) {
        if (!s.requested) return SingleAction::WaitEvict;
        return uncached_rule(0, t.q_bar, fetch);
    }
    if (!s.requested) {
        if (t.regime == HoldingRegime::Free) return SingleAction::ServeKeep;
        return s.tau >= t.tau_bar ? SingleAction::WaitEvict : SingleAction::ServeKeep;
    }
    if (s.tau <= t.tau_bar) return SingleAction::ServeKeep;
    if (t.regime == HoldingRegime::Mixed && s.tau <= t.tau_tilde) return SingleAction::ServeEvict;
    return t.q_bar > 0 ? SingleAction::WaitEvict : SingleAction::FetchKeep;
}

std::optional<SingleAction> optimal_action(const ContentParams& c, double beta, double holding,
                                           const SingleContentState& s) {
    return optimal_action(c, beta, holding, s, content_thresholds(c, beta));
}

bool passive_set_member(const ContentParams& c, double beta, double holding, const SingleContentState& s,
                        const ContentThresholds& pre) {
    auto a = optimal_action(c, beta, holding, s, pre);
    if (!a) return true;
    return *a == SingleAction::WaitEvict || *a == SingleAction::FetchEvict || *a == SingleAction::ServeEvict;
}

bool passive_set_member(const ContentParams& c, double beta, double holding, const SingleContentState& s) {
    return passive_set_member(c, beta, holding, s, content_thresholds(c, beta));
}

double whittle_cached(const ContentParams& c, double beta, std::uint64_t q, double tau,
                      const ContentThresholds& pre) {
    if (!(tau >= 0.0)) throw DomainError("whittle_cached: tau must be >= 0");
    if (q > 0 || tau >= pre.free.tau_star) return 0.0;
    // Smallest C_h with tau_bar(C_h) <= tau; tau_bar is decreasing in C_h.
    double lo = 0.0, hi = pre.limit + kBracketSlack;
    for (int i = 0; i < kBisectionSteps; ++i) {
        double mid = 0.5 * (lo + hi);
        if (solve_thresholds(c, beta, mid, pre).tau_bar <= tau) hi = mid; else lo = mid;
    }
    return std::min(hi, pre.limit);
}

double whittle_cached(const ContentParams& c, double beta, std::uint64_t q, double tau) {
    return whittle_cached(c, beta, q, tau, content_thresholds(c, beta));
}

double whittle_uncached(const ContentParams& c, double beta, std::uint64_t q, const ContentThresholds& pre) {
    if (q < pre.free.q_star) return 0.0;
    if (q >= pre.discard.q_hat) return pre.limit;
    // Smallest C_h whose queue threshold exceeds q.
    double lo = 0.0, hi = pre.limit;
    for (int i = 0; i < kBisectionSteps; ++i) {
        double mid = 0.5 * (lo + hi);
        if (solve_thresholds(c, beta, mid, pre).q_bar > q) hi = mid; else lo = mid;
    }
    return hi;
}

double whittle_uncached(const ContentParams& c, double beta, std::uint64_t q) {
    return whittle_uncached(c, beta, q, content_thresholds(c, beta));
}

double cached_index_residual(const ContentParams& c, double beta, double tau, double w) {
    ThresholdSet t;
    t.holding = w;
    t.x = solve_exp_gap(w / (c.p * c.ageing_rate()));
    t.tau_bar = tau;
    t.tau_tilde = tau + t.x / beta;
    t.q_bar = static_cast<std::uint64_t>(std::floor(c.p * beta * c.ageing_rate() * t.tau_tilde / c.costs.c_w));
    return mixed_residuals(c, beta, t).stationarity;
}

double uncached_index_residual(const ContentParams& c, double beta, std::uint64_t q, double w) {
    const double x = solve_exp_gap(w / (c.p * c.ageing_rate()));
    const double tt = mixed_tau_bar(c, beta, w, x, q) + x / beta;
    return c.p * beta * c.ageing_rate() * tt / c.costs.c_w - (double(q) + 1.0);
}

std::vector<IndexabilityViolation> verify_indexability(const ContentParams& c, double beta,
                                                       const std::vector<double>& holding_grid,
                                                       const std::vector<SingleContentState>& states) {
    auto grid = holding_grid;
    std::sort(grid.begin(), grid.end());
    const auto pre = content_thresholds(c, beta);
    std::vector<IndexabilityViolation> out;
    for (const auto& s : states) {
        std::optional<double> first_passive;
        for (double h : grid) {
            bool passive = passive_set_member(c, beta, h, s, pre);
            if (passive && !first_passive) first_passive = h;
            if (!passive && first_passive) {
                out.push_back({s, *first_passive, h});
                break;
            }
        }
    }
    return out;
}

std::vector<SingleContentState> default_state_grid(const ContentParams& c, double beta, std::size_t tau_points,
                                                   std::uint64_t extra_q) {
    const auto pre = content_thresholds(c, beta);
    std::vector<SingleContentState> states;
    const double span = 1.5 * pre.free.tau_star;
    for (std::size_t i = 0; i < tau_points; ++i) {
        double tau = tau_points > 1 ? span * double(i) / double(tau_points - 1) : 0.0;
        for (bool req : {false, true}) {
            states.push_back({0, tau, true, req});
            states.push_back({1, tau, true, req});
        }
    }
    for (std::uint64_t q = 0; q <= pre.discard.q_hat + extra_q; ++q) {
        states.push_back({q, 0.0, false, true});
        states.push_back({q, 0.0, false, false});
    }
    return states;
}

// ---- IndexTable ----

IndexTable::IndexTable(const ContentParams& c, double beta, std::size_t nodes) : pre_(content_thresholds(c, beta)) {
    if (nodes < 2) throw DomainError("IndexTable needs at least two nodes");
    holding_.resize(nodes + 1);
    tau_bar_.resize(nodes + 1);
    for (std::size_t j = 0; j <= nodes; ++j) {
        double f = double(j) / double(nodes);
        holding_[j] = pre_.limit * f * f;
    }
    tau_bar_[0] = pre_.free.tau_star;
    tau_bar_[nodes] = 0.0;
    for (std::size_t j = 1; j < nodes; ++j) tau_bar_[j] = solve_mixed(c, beta, holding_[j], pre_).tau_bar;
    for (auto q = pre_.free.q_star; q < pre_.discard.q_hat; ++q) uncached_.push_back(whittle_uncached(c, beta, q, pre_));
}

double IndexTable::cached(std::uint64_t q, double tau) const {
    if (q > 0 || tau >= tau_bar_.front()) return 0.0;
    // First node with tau_bar <= tau (tau_bar is decreasing).
    auto it = std::partition_point(tau_bar_.begin(), tau_bar_.end(), [&](double tb) { return tb > tau; });
    auto j = static_cast<std::size_t>(it - tau_bar_.begin());
    if (j == 0) return 0.0;
    if (j >= tau_bar_.size()) return pre_.limit;
    const double t0 = tau_bar_[j - 1], t1 = tau_bar_[j];
    const double w = t0 > t1 ? (t0 - tau) / (t0 - t1) : 1.0;
    return holding_[j - 1] + w * (holding_[j] - holding_[j - 1]);
}

double IndexTable::uncached(std::uint64_t q) const {
    if (q < pre_.free.q_star) return 0.0;
    if (q >= pre_.discard.q_hat) return pre_.limit;
    return uncached_[q - pre_.free.q_star];
}

}  // namespace aov
