#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aov/model.hpp"
#include "aov/thresholds.hpp"

namespace aov {

// Actions of the single-content problem with holding cost.
enum class SingleAction : int {
    ServeKeep = 0,   // serve the cached copy, keep it
    FetchKeep = 1,   // fetch, serve, cache
    WaitEvict = 2,   // hold requests, content not cached afterwards
    FetchEvict = 3,  // fetch, serve, do not cache
    ServeEvict = 4,  // serve the cached copy, then evict
};

// Optimal action under holding cost C_h. Empty for an uncached content
// that is not requested (nothing to decide).
std::optional<SingleAction> optimal_action(const ContentParams& c, double beta, double holding,
                                           const SingleContentState& s, const ContentThresholds& pre);
std::optional<SingleAction> optimal_action(const ContentParams& c, double beta, double holding,
                                           const SingleContentState& s);

// True when the optimal action leaves the content uncached.
bool passive_set_member(const ContentParams& c, double beta, double holding, const SingleContentState& s,
                        const ContentThresholds& pre);
bool passive_set_member(const ContentParams& c, double beta, double holding, const SingleContentState& s);

// Index of a cached, non-requested content with queue q and age tau.
double whittle_cached(const ContentParams& c, double beta, std::uint64_t q, double tau,
                      const ContentThresholds& pre);
double whittle_cached(const ContentParams& c, double beta, std::uint64_t q, double tau);

// Index of an uncached content with q requests already waiting.
double whittle_uncached(const ContentParams& c, double beta, std::uint64_t q, const ContentThresholds& pre);
double whittle_uncached(const ContentParams& c, double beta, std::uint64_t q);

// Residual of the stationarity equation with tau_bar pinned to tau at C_h = w.
double cached_index_residual(const ContentParams& c, double beta, double tau, double w);
// p beta c_a lambda tau_tilde / c_w - (q + 1) at C_h = w with the queue threshold pinned to q.
double uncached_index_residual(const ContentParams& c, double beta, std::uint64_t q, double w);

struct IndexabilityViolation {
    SingleContentState state;
    double passive_at = 0.0;  // first grid C_h where the state was passive
    double active_at = 0.0;   // later grid C_h where it was active again
};

// Scans each state along the (sorted) C_h grid.
std::vector<IndexabilityViolation> verify_indexability(const ContentParams& c, double beta,
                                                       const std::vector<double>& holding_grid,
                                                       const std::vector<SingleContentState>& states);

// Cached states on an even tau grid over [0, 1.5 tau*], uncached states up to q_hat + extra_q,
// plus the queued cached states covered by the extension rule.
std::vector<SingleContentState> default_state_grid(const ContentParams& c, double beta, std::size_t tau_points,
                                                   std::uint64_t extra_q);

// Precomputed index lookups for the simulator. The cached family is stored as a
// forward table tau_bar(C_h) on a quadratically spaced C_h grid and inverted by
// binary search plus linear interpolation; uncached indices are exact.
class IndexTable {
public:
    IndexTable(const ContentParams& c, double beta, std::size_t nodes = 2048);

    double cached(std::uint64_t q, double tau) const;
    double uncached(std::uint64_t q) const;
    const ContentThresholds& thresholds() const { return pre_; }

private:
    ContentThresholds pre_;
    std::vector<double> holding_;  // increasing
    std::vector<double> tau_bar_;  // decreasing
    std::vector<double> uncached_;  // indices for q in [q*, q_hat)
};

}  // namespace aov
