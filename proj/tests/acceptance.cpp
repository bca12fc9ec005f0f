// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aov/oracle.hpp"
#include "aov/policies.hpp"
#include "aov/simulator.hpp"
#include "aov/thresholds.hpp"
#include "aov/whittle.hpp"

using namespace aov;

namespace {

// Pinned tolerances.
constexpr double kThetaRel = 5e-3;        // closed form vs value iteration
constexpr double kCellSlack = 1.01;       // "within one grid cell"
constexpr double kSingleRel = 0.02;       // single-content simulation vs theta
constexpr double kIndexAbs = 1e-3;        // index vs brute-force sweep, floor
constexpr double kSweepRefine = 4.0;      // age-grid refinement for the sweep oracle
constexpr int kSweepPoints = 600;         // spacing 1.1 I / 600 < I / 500
constexpr double kBoundRel = 0.10;        // Whittle vs relaxed lower bound
constexpr double kSeMultiple = 2.0;       // ordering and monotonicity margins
constexpr double kObliviousRel = 0.01;    // c_w = 0.1 vs c_w = 1.0
constexpr double kReconcile = 1e-9;
constexpr double kBudget1 = 120.0, kBudget2 = 30.0, kBudget6 = 300.0;  // seconds

constexpr std::uint64_t kDeskEvents = 1'000'000;
constexpr std::uint64_t kDeskReps = 5;
const std::vector<std::string> kDeskCapacities{"20", "22", "24", "26", "28", "30"};
const std::vector<std::string> kWaitingCosts{"0.005", "0.01", "0.1", "1.0"};
constexpr std::size_t kFixedCapacity = 25;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o, double seconds) {
    std::printf("criterion %d %s: %s (%.1fs) %s\n", id, o.pass ? "PASS" : "FAIL", title, seconds, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void run(int id, const char* title, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Draw {
    ContentParams c;
    double beta;
};

Draw random_draw(std::mt19937_64& rng) {
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    Draw d;
    d.c.p = uni(0.01, 1.0);
    d.beta = uni(0.5, 50.0);
    d.c.lambda = uni(0.005, 1.0);
    d.c.costs = {uni(0.1, 2.0), uni(0.1, 2.0), uni(0.005, 1.0)};
    return d;
}

std::vector<Draw> draws(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::vector<Draw> out;
    for (int i = 0; i < n; ++i) out.push_back(random_draw(rng));
    return out;
}

std::vector<double> holding_grid(const ContentThresholds& pre, int points, double top_factor) {
    std::vector<double> g;
    for (int j = 0; j < points; ++j) g.push_back(top_factor * pre.limit * double(j + 1) / double(points));
    return g;
}

// ---- 1 ----
Outcome closed_form_vs_oracle() {
    auto t0 = std::chrono::steady_clock::now();
    double worst_theta = 0.0, worst_cell = 0.0;
    int bad = 0, sets = 0;
    for (const auto& d : draws(101, 20)) {
        ++sets;
        const auto grid = oracle::default_grid(d.c, d.beta);
        const auto pre = content_thresholds(d.c, d.beta);
        const double rate = d.c.p * d.beta;

        auto inf = oracle::value_iterate_infinite(rate, d.c.lambda, d.c.costs, grid);
        double rel = std::abs(inf.theta - pre.free.theta) / pre.free.theta;
        double cell = std::abs(inf.tau_star - pre.free.tau_star) / grid.tau_step;
        // The grid reports its last serving node, so the closed form sits in the next cell.
        bool ok = rel <= kThetaRel && pre.free.tau_star >= inf.tau_star - 1e-12 && cell <= kCellSlack &&
                  inf.q_star == pre.free.q_star;

        const double h = 0.5 * pre.limit;
        auto closed = solve_thresholds(d.c, d.beta, h, pre);
        auto ref = oracle::value_iterate_holding(d.c, d.beta, h, grid);
        double rel_h = std::abs(ref.theta - closed.theta) / closed.theta;
        double cell_bar = std::abs(ref.tau_bar - closed.tau_bar) / grid.tau_step;
        double cell_tilde = std::abs(ref.tau_tilde - closed.tau_tilde) / grid.tau_step;
        ok = ok && rel_h <= kThetaRel && cell_bar <= kCellSlack && cell_tilde <= kCellSlack && ref.q_bar == closed.q_bar;

        worst_theta = std::max({worst_theta, rel, rel_h});
        worst_cell = std::max({worst_cell, cell, cell_bar, cell_tilde});
        if (!ok) {
            ++bad;
            std::printf("  set %d: p=%g beta=%g lambda=%g c=(%g,%g,%g) rel=%.2e/%.2e cells=%.2f/%.2f/%.2f q=%llu/%llu qbar=%llu/%llu\n",
                        sets, d.c.p, d.beta, d.c.lambda, d.c.costs.c_a, d.c.costs.c_f, d.c.costs.c_w, rel, rel_h, cell,
                        cell_bar, cell_tilde, (unsigned long long)inf.q_star, (unsigned long long)pre.free.q_star,
                        (unsigned long long)ref.q_bar, (unsigned long long)closed.q_bar);
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = bad == 0 && secs < kBudget1;
    o.detail = std::to_string(sets) + " sets, " + std::to_string(bad) + " mismatches, worst theta rel " +
               fmt("%.2e", worst_theta) + ", worst threshold offset " + fmt("%.2f", worst_cell) + " cells";
    return o;
}

// ---- 2 ----
Outcome single_content_simulation() {
    auto t0 = std::chrono::steady_clock::now();
    SimConfig cfg;
    cfg.system.beta = 1.0;
    cfg.system.capacity = 1;
    cfg.system.contents = {{1.0, 1.0, {1.0, 1.0, 0.5}}};
    cfg.policy = PolicyKind::InfiniteCapacity;
    cfg.events = 10'000'000;
    cfg.seed = 2024;
    auto m = simulate(cfg);
    const double theta = solve_infinite_capacity(1.0, 1.0, cfg.system.contents[0].costs).theta;
    const double rel = std::abs(m.avg_cost - theta) / theta;
    const double secs = seconds_since(t0);
    return {rel <= kSingleRel && secs < kBudget2,
            "avg cost " + fmt("%.5f", m.avg_cost) + " vs theta " + fmt("%.5f", theta) + ", rel " + fmt("%.2e", rel)};
}

// ---- 3 ----
Outcome index_vs_sweep() {
    int bad = 0, states_checked = 0;
    double worst = 0.0;
    for (const auto& d : draws(303, 5)) {
        const auto pre = content_thresholds(d.c, d.beta);
        // Refined age grid: the sweep's passive switch is only as sharp as its age grid.
        const auto grid = oracle::default_grid(d.c, d.beta, kSweepRefine);
        std::vector<double> hg{0.0};
        for (double h : holding_grid(pre, kSweepPoints, 1.1)) hg.push_back(h);
        const double step = hg[1] - hg[0];
        std::vector<SingleContentState> states;
        for (int i = 0; i < 20; ++i) states.push_back({0, pre.free.tau_star * i / 19.0, true, false});
        for (std::uint64_t q = 0; q <= pre.discard.q_hat + 2; ++q) states.push_back({q, 0.0, false, true});
        auto ref = oracle::whittle_by_sweep(d.c, d.beta, states, hg, grid);
        const double tol = std::max(kIndexAbs, step);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const auto& s = states[i];
            const double w = s.cached ? whittle_cached(d.c, d.beta, s.queue, s.tau, pre)
                                      : whittle_uncached(d.c, d.beta, s.queue, pre);
            const double err = std::abs(ref[i] - w);
            worst = std::max(worst, err / tol);
            ++states_checked;
            if (!(err <= tol)) {
                ++bad;
                std::printf("  state (q=%llu tau=%g cached=%d): index %.6g sweep %.6g tol %.3g\n",
                            (unsigned long long)s.queue, s.tau, int(s.cached), w, ref[i], tol);
            }
        }
    }
    return {bad == 0, std::to_string(states_checked) + " states over 5 sets, " + std::to_string(bad) +
                          " outside tolerance, worst error " + fmt("%.4f", worst) + " x tolerance"};
}

// ---- 4 ----
Outcome indexability() {
    std::size_t violations = 0, states = 0;
    for (const auto& d : draws(404, 20)) {
        const auto pre = content_thresholds(d.c, d.beta);
        auto grid_states = default_state_grid(d.c, d.beta, 20, 2);
        states += grid_states.size();
        std::vector<double> hg{0.0};
        for (double h : holding_grid(pre, 199, 1.2)) hg.push_back(h);
        violations += verify_indexability(d.c, d.beta, hg, grid_states).size();
    }
    return {violations == 0, "20 contents, " + std::to_string(states) + " states, 200-point grids, " +
                                 std::to_string(violations) + " violations"};
}

// ---- 5 ----
Outcome threshold_ordering() {
    std::size_t violations = 0, points = 0;
    for (const auto& d : draws(404, 20)) {
        const auto pre = content_thresholds(d.c, d.beta);
        ThresholdSet prev = solve_thresholds(d.c, d.beta, 0.0, pre);
        auto check = [&](bool ok) { violations += ok ? 0 : 1; };
        for (double h : holding_grid(pre, 200, 1.0)) {
            ++points;
            auto t = solve_mixed(d.c, d.beta, h, pre);
            check(t.tau_bar < prev.tau_bar);
            check(t.tau_tilde > prev.tau_tilde);
            check(t.q_bar >= prev.q_bar);
            check(t.tau_bar <= pre.free.tau_star);
            check(pre.free.tau_star <= t.tau_tilde);
            check(t.tau_tilde <= pre.discard.tau0 * (1.0 + 1e-12));
            check(pre.free.q_star <= t.q_bar);
            check(t.q_bar <= pre.discard.q_hat);
            prev = t;
        }
    }
    return {violations == 0, std::to_string(points) + " (content, C_h) points, " + std::to_string(violations) + " violations"};
}

// ---- 6, 8, 9 share the desk sweep ----
SimConfig desk_config() {
    SimConfig cfg;
    cfg.system = make_zipf_system(100, 1.0, 4.0, 0.01, {0.1, 1.0, 0.01}, kFixedCapacity);
    cfg.events = kDeskEvents;
    cfg.seed = 1;
    return cfg;
}

struct DeskSweep {
    std::vector<SweepPoint> points;  // policy-major, capacity-minor
    std::vector<ReplicationResult> results;
    double seconds = 0.0;
};

DeskSweep run_desk_sweep() {
    auto t0 = std::chrono::steady_clock::now();
    DeskSweep ds;
    for (auto k : {PolicyKind::Whittle, PolicyKind::Myopic, PolicyKind::StaticTopM}) {
        auto base = desk_config();
        base.policy = k;
        for (auto& p : expand_sweep(base, SweepAxis::Capacity, kDeskCapacities)) ds.points.push_back(std::move(p));
    }
    ds.results = run_sweep(ds.points, kDeskReps);
    ds.seconds = seconds_since(t0);
    return ds;
}

Summary point_summary(const DeskSweep& ds, std::size_t point, double SimMetrics::*field) {
    std::vector<double> xs;
    for (const auto& r : ds.results)
        if (r.point == point) xs.push_back(r.metrics.*field);
    return summarize(xs);
}

Outcome desk_figure(const DeskSweep& ds) {
    const std::size_t nm = kDeskCapacities.size();
    std::vector<std::string> names{"whittle", "myopic", "static"};
    std::vector<std::vector<Summary>> cost(3);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t i = 0; i < nm; ++i) cost[p].push_back(point_summary(ds, p * nm + i, &SimMetrics::avg_cost));

    bool a = true, b = true, c = true;
    std::string detail;
    double worst_gap = 0.0;
    auto sys = desk_config().system;
    for (std::size_t i = 0; i < nm; ++i) {
        sys.capacity = ds.points[i].config.system.capacity;
        const double bound = relaxed_lower_bound(sys).bound;
        const double gap = (cost[0][i].mean - bound) / bound;
        worst_gap = std::max(worst_gap, gap);
        if (!(gap <= kBoundRel && gap >= -kBoundRel)) a = false;
        for (std::size_t p = 1; p < 3; ++p) {
            const double margin = kSeMultiple * std::hypot(cost[0][i].se, cost[p][i].se);
            if (!(cost[p][i].mean - cost[0][i].mean > margin)) b = false;
        }
        std::printf("  M=%zu bound %.5f whittle %.5f (se %.1e) myopic %.3f (se %.1e) static %.5f (se %.1e)\n",
                    sys.capacity, bound, cost[0][i].mean, cost[0][i].se, cost[1][i].mean, cost[1][i].se,
                    cost[2][i].mean, cost[2][i].se);
    }
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t i = 1; i < nm; ++i) {
            const double margin = kSeMultiple * std::hypot(cost[p][i].se, cost[p][i - 1].se);
            if (!(cost[p][i].mean <= cost[p][i - 1].mean + margin)) {
                c = false;
                detail += " " + names[p] + " rises at M=" + kDeskCapacities[i] + ";";
            }
        }
    detail = std::string("(a) ") + (a ? "ok" : "fail") + " worst gap " + fmt("%.2f%%", 100 * worst_gap) + ", (b) " +
             (b ? "ok" : "fail") + ", (c) " + (c ? "ok" : "fail") + ", " + std::to_string(ds.results.size()) +
             " runs of " + std::to_string(kDeskEvents) + " events" + detail;
    return {a && b && c && ds.seconds < kBudget6, detail};
}

bool identical(const SimMetrics& x, const SimMetrics& y) { return std::memcmp(&x, &y, sizeof x) == 0; }

Outcome conservation(const DeskSweep& ds) {
    std::size_t reconcile = 0, occupancy = 0, mismatched = 0;
    double worst = 0.0;
    for (const auto& r : ds.results) {
        worst = std::max(worst, r.metrics.reconciliation_error);
        if (!(r.metrics.reconciliation_error <= kReconcile)) ++reconcile;
        if (r.metrics.occupancy_checks != r.metrics.events) ++occupancy;
    }
    // Rerun every point and replication with the same seeds.
    auto again = run_sweep(ds.points, kDeskReps, 1);
    for (std::size_t i = 0; i < ds.results.size(); ++i)
        if (!identical(ds.results[i].metrics, again[i].metrics)) ++mismatched;
    return {reconcile == 0 && occupancy == 0 && mismatched == 0,
            std::to_string(ds.results.size()) + " runs: " + std::to_string(reconcile) + " reconciliation failures (worst " +
                fmt("%.1e", worst) + "), " + std::to_string(occupancy) + " occupancy failures, " +
                std::to_string(mismatched) + " rerun mismatches"};
}

Outcome serve_after_wait(const DeskSweep& ds) {
    std::uint64_t total = 0, events = 0;
    for (const auto& r : ds.results) {
        total += r.metrics.serve_after_wait;
        events += r.metrics.events;
    }
    return {total == 0, std::to_string(total) + " occurrences over " + std::to_string(events) + " decisions"};
}

// ---- 7 ----
Outcome waiting_cost_sweep() {
    auto base = desk_config();
    base.policy = PolicyKind::Whittle;
    auto pts = expand_sweep(base, SweepAxis::WaitingCost, kWaitingCosts);
    auto res = run_sweep(pts, kDeskReps);
    DeskSweep ds{pts, res, 0.0};
    std::vector<Summary> wait, cost;
    std::string detail = "M=" + std::to_string(kFixedCapacity) + ", wait times";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        wait.push_back(point_summary(ds, i, &SimMetrics::avg_wait_time));
        cost.push_back(point_summary(ds, i, &SimMetrics::avg_cost));
        detail += " " + fmt("%.4g", wait.back().mean);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < wait.size(); ++i)
        if (!(wait[i].mean < wait[i - 1].mean)) decreasing = false;
    const double diff = std::abs(cost[2].mean - cost[3].mean) / cost[3].mean;
    detail += "; strictly decreasing " + std::string(decreasing ? "yes" : "no") + "; cost gap 0.1 vs 1.0 " +
              fmt("%.3f%%", 100 * diff);
    return {decreasing && diff < kObliviousRel, detail};
}

}  // namespace

int main() {
    run(1, "closed-form thresholds vs value iteration", closed_form_vs_oracle);
    run(2, "single-content simulation vs theta", single_content_simulation);
    run(3, "Whittle indices vs holding-cost sweep", index_vs_sweep);
    run(4, "indexability", indexability);
    run(5, "threshold monotonicity and ordering", threshold_ordering);

    DeskSweep ds;
    bool have_sweep = true;
    try {
        ds = run_desk_sweep();
    } catch (const std::exception& e) {
        have_sweep = false;
        std::printf("desk sweep aborted: %s\n", e.what());
    }
    auto with_sweep = [&](std::function<Outcome(const DeskSweep&)> f) {
        return [&, f]() { return have_sweep ? f(ds) : Outcome{false, "desk sweep unavailable"}; };
    };
    report(6, "desk-scale cost comparison", have_sweep ? desk_figure(ds) : Outcome{false, "desk sweep unavailable"},
           ds.seconds);
    run(7, "desk-scale waiting-cost sweep", waiting_cost_sweep);
    run(8, "conservation and determinism", with_sweep(conservation));
    run(9, "no cached serve right after a wait", with_sweep(serve_after_wait));

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
