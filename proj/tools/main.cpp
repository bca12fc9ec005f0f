// aovcache command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "aov/config.hpp"
#include "aov/oracle.hpp"
#include "aov/policies.hpp"
#include "aov/simulator.hpp"
#include "aov/thresholds.hpp"
#include "aov/whittle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aov;

namespace {

constexpr int kOk = 0, kConfigError = 2, kRuntimeError = 3, kVerifyFailed = 4;

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed, reps, events;
    std::optional<std::string> axis, values, mode;
    std::vector<double> holding;
    std::size_t tau_points = 20;
    std::string metrics;
    double tolerance = 5e-3;
};

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

RunConfig load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    auto rc = load_config(o.config);
    if (o.seed) rc.sim.seed = *o.seed;
    if (o.events) rc.sim.events = *o.events;
    if (o.reps) rc.reps = *o.reps;
    if (o.mode) rc.sim.ageing = parse_ageing_mode(*o.mode);
    if (o.axis) rc.axis = parse_axis(*o.axis);
    if (o.values) rc.values = split_csv(*o.values);
    if (rc.reps == 0) throw ConfigError("--reps must be positive");
    return rc;
}

class Csv {
public:
    Csv(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string num(double x) { return fmt_num(x); }
std::string num(std::uint64_t x) { return std::to_string(x); }

void write_manifest(const Options& o, const RunConfig& rc, const std::string& command,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["config"] = o.config;
    m["config_digest"] = config_digest(rc.source);
    m["seed"] = rc.sim.seed;
    m["reps"] = rc.reps;
    m["ageing_mode"] = to_string(rc.sim.ageing);
    m["outputs"] = outputs;
    std::ofstream(fs::path(o.out) / "manifest.json") << m.dump(2) << '\n';
}

std::string regime_name(HoldingRegime r) {
    switch (r) {
        case HoldingRegime::Free: return "free";
        case HoldingRegime::Mixed: return "mixed";
        case HoldingRegime::NeverCache: return "never-cache";
    }
    return "?";
}

int cmd_solve(const Options& o) {
    auto rc = load(o);
    const auto& s = rc.sim.system;
    Csv csv(fs::path(o.out) / "thresholds.csv",
            {"content", "p", "holding", "regime", "tau_star", "q_star", "q_hat", "tau0", "limit", "tau_bar", "tau_tilde",
             "q_bar", "theta"});
    auto holding = o.holding.empty() ? std::vector<double>{0.0} : o.holding;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const auto pre = content_thresholds(s.contents[n], s.beta);
        for (double h : holding) {
            const auto t = solve_thresholds(s.contents[n], s.beta, h, pre);
            csv.row({num(std::uint64_t(n)), num(s.contents[n].p), num(h), regime_name(t.regime),
                     num(pre.free.tau_star), num(pre.free.q_star), num(pre.discard.q_hat), num(pre.discard.tau0),
                     num(pre.limit), num(t.tau_bar), num(t.tau_tilde), num(t.q_bar), num(t.theta)});
        }
    }
    write_manifest(o, rc, "solve", {"thresholds.csv"});
    return kOk;
}

int cmd_whittle(const Options& o) {
    auto rc = load(o);
    const auto& s = rc.sim.system;
    Csv csv(fs::path(o.out) / "whittle.csv", {"content", "family", "q", "tau", "index"});
    for (std::size_t n = 0; n < s.size(); ++n) {
        const auto& c = s.contents[n];
        const auto pre = content_thresholds(c, s.beta);
        const std::size_t pts = std::max<std::size_t>(o.tau_points, 2);
        for (std::size_t k = 0; k < pts; ++k) {
            const double tau = pre.free.tau_star * double(k) / double(pts - 1);
            csv.row({num(std::uint64_t(n)), "cached", "0", num(tau), num(whittle_cached(c, s.beta, 0, tau, pre))});
        }
        for (std::uint64_t q = 0; q <= pre.discard.q_hat; ++q)
            csv.row({num(std::uint64_t(n)), "uncached", num(q), "", num(whittle_uncached(c, s.beta, q, pre))});
    }
    write_manifest(o, rc, "whittle", {"whittle.csv"});
    return kOk;
}

const std::vector<std::string> kMetricColumns = {
    "avg_cost", "avg_fetch_cost", "avg_ageing_cost", "avg_waiting_cost", "avg_wait_time", "fetch_rate",
    "measured_time", "measured_requests", "fetches", "waits", "cached_serves", "evictions", "serve_after_wait",
    "reconciliation_error"};

std::vector<std::string> metric_cells(const SimMetrics& m) {
    return {num(m.avg_cost), num(m.avg_fetch_cost), num(m.avg_ageing_cost), num(m.avg_waiting_cost),
            num(m.avg_wait_time), num(m.fetch_rate), num(m.measured_time), num(m.measured_requests),
            num(m.fetches), num(m.waits), num(m.cached_serves), num(m.evictions), num(m.serve_after_wait),
            num(m.reconciliation_error)};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

int cmd_simulate(const Options& o) {
    auto rc = load(o);
    auto m = simulate(rc.sim);
    Csv csv(fs::path(o.out) / "metrics.csv", concat({"policy", "M", "seed", "events", "mode"}, kMetricColumns));
    csv.row(concat({to_string(rc.sim.policy), num(std::uint64_t(rc.sim.system.capacity)), num(rc.sim.seed),
                    num(rc.sim.events), to_string(rc.sim.ageing)},
                   metric_cells(m)));
    write_manifest(o, rc, "simulate", {"metrics.csv"});
    std::cout << "avg_cost " << num(m.avg_cost) << "\n";
    return kOk;
}

struct SweepOutput {
    std::vector<SweepPoint> points;
    std::vector<ReplicationResult> results;
};

SweepOutput run_configured_sweep(const RunConfig& rc) {
    auto values = rc.values;
    if (values.empty()) {
        if (rc.axis != SweepAxis::Capacity) throw ConfigError("sweep needs values (--values or sweep.values)");
        values = {std::to_string(rc.sim.system.capacity)};
    }
    SweepOutput so;
    so.points = expand_sweep(rc.sim, rc.axis, values);
    so.results = run_sweep(so.points, rc.reps);
    return so;
}

void write_sweep(const Options& o, const RunConfig& rc, const SweepOutput& so) {
    Csv reps(fs::path(o.out) / "replications.csv",
             concat({"axis", "value", "policy", "M", "replication", "seed"}, kMetricColumns));
    for (const auto& r : so.results) {
        const auto& pt = so.points[r.point];
        reps.row(concat({to_string(rc.axis), pt.label, to_string(pt.config.policy),
                         num(std::uint64_t(pt.config.system.capacity)), num(r.replication), num(r.seed)},
                        metric_cells(r.metrics)));
    }
    Csv sum(fs::path(o.out) / "summary.csv",
            {"axis", "value", "policy", "M", "reps", "mean_cost", "se_cost", "mean_wait_time", "se_wait_time",
             "mean_fetch_rate"});
    for (std::size_t i = 0; i < so.points.size(); ++i) {
        std::vector<double> cost, wait, fr;
        for (const auto& r : so.results)
            if (r.point == i) {
                cost.push_back(r.metrics.avg_cost);
                wait.push_back(r.metrics.avg_wait_time);
                fr.push_back(r.metrics.fetch_rate);
            }
        auto c = summarize(cost), w = summarize(wait), f = summarize(fr);
        const auto& pt = so.points[i];
        sum.row({to_string(rc.axis), pt.label, to_string(pt.config.policy), num(std::uint64_t(pt.config.system.capacity)),
                 num(std::uint64_t(cost.size())), num(c.mean), num(c.se), num(w.mean), num(w.se), num(f.mean)});
    }
}

int cmd_sweep(const Options& o) {
    auto rc = load(o);
    auto so = run_configured_sweep(rc);
    write_sweep(o, rc, so);
    write_manifest(o, rc, "sweep", {"replications.csv", "summary.csv"});
    return kOk;
}

std::vector<std::size_t> capacities(const RunConfig& rc) {
    std::vector<std::size_t> out;
    if (rc.axis == SweepAxis::Capacity && !rc.values.empty()) {
        for (const auto& pt : expand_sweep(rc.sim, SweepAxis::Capacity, rc.values))
            out.push_back(pt.config.system.capacity);
    } else {
        out.push_back(rc.sim.system.capacity);
    }
    return out;
}

int cmd_lower_bound(const Options& o) {
    auto rc = load(o);
    auto s = rc.sim.system;
    std::vector<ContentThresholds> pre;
    for (const auto& c : s.contents) pre.push_back(content_thresholds(c, s.beta));
    Csv csv(fs::path(o.out) / "lower_bound.csv", {"M", "holding_star", "bound"});
    for (auto m : capacities(rc)) {
        s.capacity = m;
        auto lb = relaxed_lower_bound(s, pre);
        csv.row({num(std::uint64_t(m)), num(lb.holding_star), num(lb.bound)});
    }
    write_manifest(o, rc, "lower-bound", {"lower_bound.csv"});
    return kOk;
}

// Reads summary.csv rows keyed by column name.
std::vector<std::map<std::string, std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open metrics file '" + path + "'");
    std::string line;
    std::getline(in, line);
    auto header = split_csv(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_compare(const Options& o) {
    auto rc = load(o);
    struct Row {
        std::string policy;
        std::size_t m;
        double mean, se;
    };
    std::vector<Row> rows;
    if (!o.metrics.empty()) {
        for (auto& r : read_csv(o.metrics)) {
            try {
                rows.push_back({r.at("policy"), std::stoul(r.at("M")), std::stod(r.at("mean_cost")), std::stod(r.at("se_cost"))});
            } catch (const std::exception&) {
                throw ConfigError("metrics file lacks policy/M/mean_cost/se_cost columns");
            }
        }
    } else {
        auto so = run_configured_sweep(rc);
        for (std::size_t i = 0; i < so.points.size(); ++i) {
            std::vector<double> cost;
            for (const auto& r : so.results)
                if (r.point == i) cost.push_back(r.metrics.avg_cost);
            auto c = summarize(cost);
            rows.push_back({to_string(so.points[i].config.policy), so.points[i].config.system.capacity, c.mean, c.se});
        }
    }
    auto s = rc.sim.system;
    std::vector<ContentThresholds> pre;
    for (const auto& c : s.contents) pre.push_back(content_thresholds(c, s.beta));
    std::map<std::size_t, double> bound;
    Csv csv(fs::path(o.out) / "compare.csv", {"policy", "M", "mean_cost", "se_cost", "bound", "relative_gap"});
    for (const auto& r : rows) {
        if (!bound.count(r.m)) {
            s.capacity = r.m;
            bound[r.m] = relaxed_lower_bound(s, pre).bound;
        }
        const double b = bound[r.m];
        csv.row({r.policy, num(std::uint64_t(r.m)), num(r.mean), num(r.se), num(b), num((r.mean - b) / b)});
    }
    write_manifest(o, rc, "compare", {"compare.csv"});
    return kOk;
}

int cmd_verify(const Options& o) {
    auto rc = load(o);
    const auto& s = rc.sim.system;
    Csv csv(fs::path(o.out) / "verify.csv", {"property", "content", "status", "detail"});
    bool all_ok = true;
    auto record = [&](const std::string& prop, std::size_t n, bool ok, const std::string& detail) {
        csv.row({prop, num(std::uint64_t(n)), ok ? "pass" : "fail", detail});
        if (!ok) {
            all_ok = false;
            std::cerr << "verify: " << prop << " failed for content " << n << ": " << detail << "\n";
        }
    };
    std::vector<std::size_t> sample{0};
    if (s.size() > 2) sample.push_back(s.size() / 2);
    if (s.size() > 1) sample.push_back(s.size() - 1);

    for (auto n : sample) {
        const auto& c = s.contents[n];
        const auto pre = content_thresholds(c, s.beta);
        const auto grid = oracle::default_grid(c, s.beta, 2.0);
        // Thresholds against the brute-force solution at C_h = 0, I/2.
        for (double h : {0.0, 0.5 * pre.limit}) {
            const auto closed = solve_thresholds(c, s.beta, h, pre);
            const auto ref = oracle::value_iterate_holding(c, s.beta, h, grid);
            const double rel = std::abs(closed.theta - ref.theta) / ref.theta;
            record("threshold_cost", n, rel <= o.tolerance,
                   "C_h=" + num(h) + " rel_err=" + num(rel) + " tol=" + num(o.tolerance));
        }
        // Index consistency: passive just above the index, active just below.
        bool consistent = true;
        std::string where;
        for (int k = 0; k < 10; ++k) {
            const double tau = pre.free.tau_star * (0.05 + 0.09 * k);
            const double w = whittle_cached(c, s.beta, 0, tau, pre);
            const SingleContentState st{0, tau, true, false};
            const double eps = 1e-6 * pre.limit;
            if ((w - eps > 0.0 && passive_set_member(c, s.beta, w - eps, st, pre)) ||
                !passive_set_member(c, s.beta, w + eps, st, pre)) {
                consistent = false;
                where = "tau=" + num(tau);
            }
        }
        record("index_consistency", n, consistent, where);
        // Index against the brute-force holding-cost sweep.
        std::vector<SingleContentState> states;
        for (int k = 0; k < 10; ++k) states.push_back({0, pre.free.tau_star * k / 9.0, true, false});
        for (std::uint64_t q = 0; q <= pre.discard.q_hat + 1; ++q) states.push_back({q, 0.0, false, true});
        std::vector<double> sweep_grid;
        for (int k = 0; k <= 600; ++k) sweep_grid.push_back(1.1 * pre.limit * k / 600.0);
        const double tol = std::max(1e-3, sweep_grid[1]);
        auto ref = oracle::whittle_by_sweep(c, s.beta, states, sweep_grid, oracle::default_grid(c, s.beta, 4.0));
        double worst = 0.0;
        for (std::size_t k = 0; k < states.size(); ++k) {
            const auto& st = states[k];
            const double w = st.cached ? whittle_cached(c, s.beta, st.queue, st.tau, pre)
                                       : whittle_uncached(c, s.beta, st.queue, pre);
            worst = std::max(worst, std::abs(ref[k] - w));
        }
        record("index_vs_sweep", n, worst <= tol, "max_err=" + num(worst) + " tol=" + num(tol));
        std::vector<double> hg;
        for (int k = 0; k <= 200; ++k) hg.push_back(1.2 * pre.limit * k / 200.0);
        auto viol = verify_indexability(c, s.beta, hg, default_state_grid(c, s.beta, 20, 2));
        record("indexability", n, viol.empty(), std::to_string(viol.size()) + " violations");
    }
    if (rc.sim.policy != PolicyKind::InfiniteCapacity) {
        auto cfg = rc.sim;
        cfg.events = std::min<std::uint64_t>(cfg.events, 200000);
        auto m = simulate(cfg);
        record("cost_conservation", 0, m.reconciliation_error <= 1e-9, "rel_err=" + num(m.reconciliation_error));
        record("occupancy", 0, m.occupancy_checks == cfg.events, num(m.occupancy_checks) + " checks");
    }
    write_manifest(o, rc, "verify", {"verify.csv"});
    return all_ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Age-of-version aware caching: thresholds, indices, simulation"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file")->required();
        sub->add_option("--out", o.out, "output directory");
    };
    auto sim_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--events", o.events, "events per run");
        sub->add_option("--mode", o.mode, "ageing cost: expected | realized")
            ->check(CLI::IsMember({"expected", "realized"}));
    };
    auto sweep_flags = [&](CLI::App* sub) {
        sub->add_option("--reps", o.reps, "replications per point");
        sub->add_option("--axis", o.axis, "M | c_w | policy")->check(CLI::IsMember({"M", "c_w", "policy"}));
        sub->add_option("--values", o.values, "comma-separated axis values");
    };

    std::map<std::string, std::function<int(const Options&)>> handlers;
    auto add = [&](const std::string& name, const std::string& desc, std::function<int(const Options&)> fn) {
        auto* sub = app.add_subcommand(name, desc);
        common(sub);
        handlers[name] = std::move(fn);
        return sub;
    };

    auto* solve = add("solve", "per-content thresholds", cmd_solve);
    solve->add_option("--holding", o.holding, "holding costs to evaluate (default 0)")->delimiter(',');
    auto* whittle = add("whittle", "index tables", cmd_whittle);
    whittle->add_option("--tau-points", o.tau_points, "ages per content in [0, tau*]");
    sim_flags(add("simulate", "one simulation run", cmd_simulate));
    auto* sweep = add("sweep", "replicated sweep over one axis", cmd_sweep);
    sim_flags(sweep);
    sweep_flags(sweep);
    auto* lb = add("lower-bound", "relaxed lower bound", cmd_lower_bound);
    lb->add_option("--values", o.values, "comma-separated capacities");
    auto* cmp = add("compare", "policy cost against the lower bound", cmd_compare);
    sim_flags(cmp);
    sweep_flags(cmp);
    cmp->add_option("--metrics", o.metrics, "summary.csv from a previous sweep");
    auto* ver = add("verify", "verification battery on the configured system", cmd_verify);
    ver->add_option("--tolerance", o.tolerance, "relative tolerance for the cost checks");
    sim_flags(ver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        fs::create_directories(o.out);
        for (auto* sub : app.get_subcommands()) return handlers.at(sub->get_name())(o);
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kRuntimeError;
}
