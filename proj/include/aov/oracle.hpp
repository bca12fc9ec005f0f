#pragma once

// Brute-force reference solutions on a discretized age grid. Nothing here
// calls into the threshold or index code; tests compare the two.

#include <cstdint>
#include <vector>

#include "aov/model.hpp"

namespace aov::oracle {

struct Grid {
    double tau_step = 0.0;
    double tau_max = 0.0;
    std::uint64_t q_max = 0;
    std::size_t nodes() const;  // tau nodes 0..n inclusive
    double tau(std::size_t i) const { return tau_step * double(i); }
};

// Renewal-reward estimates used only to size grids.
struct Scales {
    double tau_serve = 0.0;   // best age threshold among threshold policies
    std::uint64_t q_serve = 0;
    double tau_discard = 0.0; // cost of the best never-cache policy / (rate c_a lambda)
    std::uint64_t q_discard = 0;
};

Scales renewal_scales(double rate, double lambda, const CostModel& costs);

// Step = tau_serve / (100 * refine), horizon 4 x the larger scale, q_max = q_discard + 10.
Grid default_grid(double rate, double lambda, const CostModel& costs, double refine = 1.0);
Grid default_grid(const ContentParams& c, double beta, double refine = 1.0);

// Single content, unlimited cache. Actions: 0 serve, 1 wait, 2 fetch.
struct InfiniteTable {
    Grid grid;
    double rate = 0.0;
    double theta = 0.0;
    std::vector<double> h;             // (q, i) -> h[q * nodes + i]
    std::vector<std::uint8_t> action;  // same layout
    double tau_star = 0.0;  // last grid age served at q = 0
    std::uint64_t q_star = 0;  // first q that fetches at the top age
    double residual = 0.0;  // max |T h - h| after convergence
    int iterations = 0;
};

InfiniteTable value_iterate_infinite(double rate, double lambda, const CostModel& costs, const Grid& grid);

// Single content inside a cache with holding cost C_h per unit time while cached.
// Action codes follow SingleAction: 0 serve-keep, 1 fetch-keep, 2 wait-evict,
// 3 fetch-evict, 4 serve-evict.
struct HoldingTable {
    Grid grid;
    double beta = 0.0, holding = 0.0;
    ContentParams content;
    double theta = 0.0;
    std::vector<double> hc1, hc0, hu1, hu0;  // cached/uncached x requested/not
    std::vector<double> mix, ahead;          // p hc1 + (1-p) hc0 and its age expectation
    double reset_cached = 0.0, reset_uncached = 0.0;
    std::vector<std::uint8_t> act1, act0, actu;
    double tau_bar = 0.0, tau_tilde = 0.0;
    std::uint64_t q_bar = 0;
    double residual = 0.0;
    int iterations = 0;

    // Greedy action at any state (ages between nodes are integrated exactly).
    // Returns 255 for an uncached, non-requested state.
    std::uint8_t greedy(const SingleContentState& s) const;
    bool passive(const SingleContentState& s) const;
};

HoldingTable value_iterate_holding(const ContentParams& c, double beta, double holding, const Grid& grid,
                                   const HoldingTable* warm = nullptr);

// First C_h of the sorted grid at which each state is passive (+inf if never).
std::vector<double> whittle_by_sweep(const ContentParams& c, double beta, const std::vector<SingleContentState>& states,
                                     const std::vector<double>& holding_grid, const Grid& grid);

}  // namespace aov::oracle
