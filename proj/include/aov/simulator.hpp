#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aov/model.hpp"
#include "aov/policies.hpp"

namespace aov {

// Expected: charge (Q+1) c_a lambda tau per cached serve.
// Realized: charge (Q+1) c_a V with V the sampled number of missed updates.
enum class AgeingMode { Expected, Realized };

std::string to_string(AgeingMode m);
AgeingMode parse_ageing_mode(const std::string& s);

struct SimConfig {
    SystemParams system;
    PolicyKind policy = PolicyKind::Whittle;
    std::uint64_t events = 1'000'000;
    double warmup = 0.1;  // fraction of events discarded before measuring
    std::uint64_t seed = 1;
    AgeingMode ageing = AgeingMode::Expected;
};

struct SimMetrics {
    double avg_cost = 0.0;  // per unit time over the measurement window
    double avg_fetch_cost = 0.0;
    double avg_ageing_cost = 0.0;
    double avg_waiting_cost = 0.0;
    double avg_wait_time = 0.0;  // mean time a request spends waiting
    double fetch_rate = 0.0;     // fetches per unit time
    double measured_time = 0.0;
    std::uint64_t events = 0;
    std::uint64_t measured_requests = 0;
    std::uint64_t fetches = 0;
    std::uint64_t waits = 0;
    std::uint64_t cached_serves = 0;
    std::uint64_t evictions = 0;
    // Largest relative mismatch between the waiting-cost integral accumulated
    // globally and the same integral accumulated per content.
    double reconciliation_error = 0.0;
    // Cached serves of a content whose previous action was a wait with no fetch in
    // between. Counted over the whole run, warmup included.
    std::uint64_t serve_after_wait = 0;
    std::uint64_t occupancy_checks = 0;
};

struct TraceEvent {
    std::uint64_t index = 0;
    double time = 0.0;
    ContentId content = 0;
    std::uint64_t queue = 0;  // before the action
    double tau = 0.0;         // age before the action (cached contents)
    bool cached = false;
    Action action;
};

using TraceSink = std::function<void(const TraceEvent&)>;

// Tables may be shared across runs of the same system; built on demand otherwise.
SimMetrics simulate(const SimConfig& cfg, std::shared_ptr<const PolicyTables> tables = nullptr,
                    const TraceSink& trace = {});

// ---- sweeps ----

enum class SweepAxis { Capacity, WaitingCost, Policy };

SweepAxis parse_axis(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepPoint {
    std::string label;
    SimConfig config;
};

std::vector<SweepPoint> expand_sweep(const SimConfig& base, SweepAxis axis, const std::vector<std::string>& values);

struct ReplicationResult {
    std::size_t point = 0;
    std::uint64_t replication = 0;
    std::uint64_t seed = 0;
    SimMetrics metrics;
};

// Replication k of every point uses seed base_seed + k. Results are ordered
// by (point, replication) whatever the thread count.
std::vector<ReplicationResult> run_sweep(const std::vector<SweepPoint>& points, std::uint64_t reps,
                                         unsigned threads = 0);

struct Summary {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

Summary summarize(const std::vector<double>& xs);

}  // namespace aov
