#include "aov/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

#include "aov/cache_state.hpp"

namespace aov {

std::string to_string(AgeingMode m) { return m == AgeingMode::Expected ? "expected" : "realized"; }

AgeingMode parse_ageing_mode(const std::string& s) {
    if (s == "expected") return AgeingMode::Expected;
    if (s == "realized") return AgeingMode::Realized;
    throw DomainError("unknown ageing mode '" + s + "'");
}

namespace {

// Neumaier-compensated running sum.
struct Accumulator {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, 0x5eedu};
    return std::mt19937_64(seq);
}

class Run {
public:
    Run(const SimConfig& cfg, std::shared_ptr<const PolicyTables> tables, const TraceSink& trace)
        : cfg_(cfg), s_(cfg.system), infinite_(cfg.policy == PolicyKind::InfiniteCapacity),
          st_(s_.size(), infinite_ ? s_.size() : s_.capacity), trace_(trace),
          arrivals_(make_stream(cfg.seed, 1)), choice_(make_stream(cfg.seed, 2)), aov_(make_stream(cfg.seed, 3)),
          inter_(s_.beta), waited_(s_.size(), false), v_(s_.size(), 0), v_time_(s_.size(), 0.0),
          acc_(s_.size()), last_change_(s_.size(), 0.0) {
        std::vector<double> p;
        p.reserve(s_.size());
        for (const auto& c : s_.contents) p.push_back(c.p);
        pick_ = std::discrete_distribution<std::size_t>(p.begin(), p.end());
        if (!tables) tables = build_policy_tables(s_, cfg.policy == PolicyKind::Whittle);
        policy_ = make_policy(cfg.policy, s_, std::move(tables));
        auto order = popularity_order(s_);
        order.resize(st_.capacity());
        st_.preload(order);
    }

    SimMetrics go() {
        const auto warm = static_cast<std::uint64_t>(std::floor(cfg_.warmup * double(cfg_.events)));
        if (warm == 0) start_window();
        for (std::uint64_t k = 0; k < cfg_.events; ++k) {
            const double dt = inter_(arrivals_);
            if (measuring_) {
                waiting_.add(waiting_rate_ * dt);
                queue_time_.add(double(st_.total_queue()) * dt);
            }
            st_.advance(dt);
            step(k, static_cast<ContentId>(pick_(choice_)));
            if (st_.occupancy() != st_.capacity())
                throw InternalError("cache occupancy drifted from capacity");
            ++m_.occupancy_checks;
            if (k + 1 == warm) start_window();
        }
        return finish();
    }

private:
    void start_window() {
        measuring_ = true;
        t0_ = st_.clock();
        for (std::size_t n = 0; n < s_.size(); ++n) {
            acc_[n] = Accumulator{};
            last_change_[n] = t0_;
        }
    }

    // Per-content waiting integral, charged whenever Q^n changes.
    void touch_queue(ContentId n) {
        if (measuring_)
            acc_[n].add(s_.contents[n].costs.c_w * double(st_.queue(n)) * (st_.clock() - last_change_[n]));
        last_change_[n] = st_.clock();
    }

    std::uint64_t release(ContentId n) {
        touch_queue(n);
        auto q = st_.release(n);
        waiting_rate_ -= s_.contents[n].costs.c_w * double(q);
        if (st_.total_queue() == 0) waiting_rate_ = 0.0;  // drop accumulated rounding
        return q;
    }

    double missed_updates(ContentId n) {
        const double t = st_.clock();
        const double mean = s_.contents[n].lambda * (t - v_time_[n]);
        if (mean > 0.0) v_[n] += std::poisson_distribution<std::uint64_t>(mean)(aov_);
        v_time_[n] = t;
        return double(v_[n]);
    }

    void fetched(ContentId n) {
        v_[n] = 0;
        v_time_[n] = st_.clock();
        waited_[n] = false;
        if (measuring_) ++m_.fetches;
    }

    void charge(Accumulator& a, double x) {
        if (measuring_) a.add(x);
    }

    void step(std::uint64_t k, ContentId r) {
        const auto& c = s_.contents[r];
        if (measuring_) ++m_.measured_requests;
        const Action a = policy_->decide(st_, r);
        if (trace_) trace_({k, st_.clock(), r, st_.queue(r), st_.cached(r) ? st_.tau(r) : 0.0, st_.cached(r), a});

        switch (a.kind) {
            case ActionKind::ServeCached: {
                if (!st_.cached(r)) throw InternalError("policy served a content that is not cached");
                if (waited_[r]) ++m_.serve_after_wait;  // whole trajectory, warmup included
                waited_[r] = false;
                const double age = cfg_.ageing == AgeingMode::Expected ? c.lambda * st_.tau(r) : missed_updates(r);
                const double served = double(release(r)) + 1.0;
                charge(ageing_, served * c.costs.c_a * age);
                if (measuring_) ++m_.cached_serves;
                break;
            }
            case ActionKind::Wait:
                touch_queue(r);
                st_.enqueue(r);
                waiting_rate_ += c.costs.c_w;
                waited_[r] = true;
                if (measuring_) ++m_.waits;
                break;
            case ActionKind::FetchServeCache:
                if (!st_.cached(r)) {
                    if (!a.evict || !st_.cached(*a.evict))
                        throw InternalError("admission without a valid eviction victim");
                    st_.swap_in(r, *a.evict);
                    if (measuring_) ++m_.evictions;
                } else {
                    st_.refresh(r);
                }
                release(r);
                charge(fetch_, c.costs.c_f);
                fetched(r);
                break;
            case ActionKind::FetchServeDiscard:
                if (st_.cached(r)) throw InternalError("discarding fetch for a cached content");
                release(r);
                charge(fetch_, c.costs.c_f);
                fetched(r);
                break;
        }
    }

    SimMetrics finish() {
        for (std::size_t n = 0; n < s_.size(); ++n) touch_queue(n);
        const double T = st_.clock() - t0_;
        m_.events = cfg_.events;
        m_.measured_time = T;
        if (T <= 0.0) return m_;
        const double w = waiting_.value();
        Accumulator per;
        for (const auto& x : acc_) per.add(x.value());
        const double total = fetch_.value() + ageing_.value() + w;
        m_.reconciliation_error = std::abs(per.value() - w) / std::max(total, 1e-300);
        m_.avg_fetch_cost = fetch_.value() / T;
        m_.avg_ageing_cost = ageing_.value() / T;
        m_.avg_waiting_cost = w / T;
        m_.avg_cost = total / T;
        m_.fetch_rate = double(m_.fetches) / T;
        m_.avg_wait_time = m_.measured_requests ? queue_time_.value() / double(m_.measured_requests) : 0.0;
        return m_;
    }

    const SimConfig& cfg_;
    const SystemParams& s_;
    bool infinite_;
    CacheSystemState st_;
    TraceSink trace_;
    std::unique_ptr<Policy> policy_;
    std::mt19937_64 arrivals_, choice_, aov_;
    std::exponential_distribution<double> inter_;
    std::discrete_distribution<std::size_t> pick_;

    std::vector<bool> waited_;
    std::vector<std::uint64_t> v_;
    std::vector<double> v_time_;
    std::vector<Accumulator> acc_;
    std::vector<double> last_change_;

    bool measuring_ = false;
    double t0_ = 0.0;
    double waiting_rate_ = 0.0;
    Accumulator fetch_, ageing_, waiting_, queue_time_;
    SimMetrics m_;
};

}  // namespace

SimMetrics simulate(const SimConfig& cfg, std::shared_ptr<const PolicyTables> tables, const TraceSink& trace) {
    require_valid(cfg.system, cfg.policy != PolicyKind::InfiniteCapacity);
    if (cfg.events == 0) throw DomainError("events must be positive");
    if (!(cfg.warmup >= 0.0 && cfg.warmup < 1.0)) throw DomainError("warmup must lie in [0, 1)");
    Run run(cfg, std::move(tables), trace);
    return run.go();
}

// ---- sweeps ----

SweepAxis parse_axis(const std::string& s) {
    if (s == "M" || s == "capacity") return SweepAxis::Capacity;
    if (s == "c_w") return SweepAxis::WaitingCost;
    if (s == "policy") return SweepAxis::Policy;
    throw DomainError("unknown sweep axis '" + s + "'");
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Capacity: return "M";
        case SweepAxis::WaitingCost: return "c_w";
        case SweepAxis::Policy: return "policy";
    }
    return "?";
}

std::vector<SweepPoint> expand_sweep(const SimConfig& base, SweepAxis axis, const std::vector<std::string>& values) {
    if (values.empty()) throw DomainError("sweep needs at least one value");
    std::vector<SweepPoint> out;
    for (const auto& v : values) {
        SweepPoint pt{v, base};
        try {
            switch (axis) {
                case SweepAxis::Capacity: {
                    std::size_t used = 0;
                    long long m = std::stoll(v, &used);
                    if (used != v.size() || m < 0) throw DomainError("");
                    pt.config.system.capacity = static_cast<std::size_t>(m);
                    break;
                }
                case SweepAxis::WaitingCost: {
                    std::size_t used = 0;
                    double cw = std::stod(v, &used);
                    if (used != v.size()) throw DomainError("");
                    for (auto& c : pt.config.system.contents) c.costs.c_w = cw;
                    break;
                }
                case SweepAxis::Policy: pt.config.policy = parse_policy(v); break;
            }
        } catch (const std::exception&) {
            throw DomainError("bad sweep value '" + v + "' for axis " + to_string(axis));
        }
        require_valid(pt.config.system, pt.config.policy != PolicyKind::InfiniteCapacity);
        out.push_back(std::move(pt));
    }
    return out;
}

namespace {

bool same_contents(const SystemParams& a, const SystemParams& b) {
    if (a.beta != b.beta || a.size() != b.size()) return false;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const auto &x = a.contents[n], &y = b.contents[n];
        if (x.lambda != y.lambda || x.p != y.p || x.costs.c_a != y.costs.c_a || x.costs.c_f != y.costs.c_f ||
            x.costs.c_w != y.costs.c_w)
            return false;
    }
    return true;
}

}  // namespace

std::vector<ReplicationResult> run_sweep(const std::vector<SweepPoint>& points, std::uint64_t reps, unsigned threads) {
    if (reps == 0) throw DomainError("reps must be positive");
    // Index tables do not depend on the capacity or the policy, so points share them.
    std::vector<std::shared_ptr<const PolicyTables>> tables(points.size());
    bool any_whittle = false;
    for (const auto& p : points) any_whittle |= p.config.policy == PolicyKind::Whittle;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < i && !tables[i]; ++j)
            if (same_contents(points[i].config.system, points[j].config.system)) tables[i] = tables[j];
        if (!tables[i]) tables[i] = build_policy_tables(points[i].config.system, any_whittle);
    }

    std::vector<ReplicationResult> out(points.size() * reps);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::uint64_t k = 0; k < reps; ++k) {
            auto& r = out[i * reps + k];
            r.point = i;
            r.replication = k;
            r.seed = points[i].config.seed + k;
        }

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(out.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t job; (job = next++) < out.size();) {
            try {
                auto cfg = points[out[job].point].config;
                cfg.seed = out[job].seed;
                out[job].metrics = simulate(cfg, tables[out[job].point]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / double(xs.size());
    if (xs.size() < 2) return s;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
    return s;
}

}  // namespace aov
