#include "aov/policies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace aov {

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Whittle: return "whittle";
        case PolicyKind::Myopic: return "myopic";
        case PolicyKind::StaticTopM: return "static-top-m";
        case PolicyKind::InfiniteCapacity: return "infinite";
    }
    return "?";
}

std::string to_string(ActionKind k) {
    switch (k) {
        case ActionKind::ServeCached: return "serve-cached";
        case ActionKind::FetchServeCache: return "fetch-serve-cache";
        case ActionKind::Wait: return "wait";
        case ActionKind::FetchServeDiscard: return "fetch-serve-discard";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "whittle") return PolicyKind::Whittle;
    if (name == "myopic") return PolicyKind::Myopic;
    if (name == "static-top-m" || name == "static") return PolicyKind::StaticTopM;
    if (name == "infinite") return PolicyKind::InfiniteCapacity;
    throw DomainError("unknown policy '" + name + "'");
}

std::shared_ptr<const PolicyTables> build_policy_tables(const SystemParams& s, bool with_index,
                                                        std::size_t index_nodes) {
    auto tab = std::make_shared<PolicyTables>();
    tab->thresholds.reserve(s.size());
    for (const auto& c : s.contents) tab->thresholds.push_back(content_thresholds(c, s.beta));
    if (with_index) {
        tab->index.reserve(s.size());
        for (const auto& c : s.contents) tab->index.emplace_back(c, s.beta, index_nodes);
    }
    return tab;
}

Action infinite_capacity_decide(std::uint64_t q, double tau, const InfiniteCapacitySolution& sol) {
    if (tau <= sol.tau_star) return {ActionKind::ServeCached, {}};
    if (q < sol.q_star) return {ActionKind::Wait, {}};
    return {ActionKind::FetchServeCache, {}};
}

Action whittle_decide(const CacheSystemState& st, ContentId r, const PolicyTables& tab) {
    const auto& pre = tab.thresholds[r];
    const auto q = st.queue(r);
    if (st.cached(r)) return infinite_capacity_decide(q, st.tau(r), pre.free);
    if (q < pre.free.q_star) return {ActionKind::Wait, {}};

    const double w_r = tab.index[r].uncached(q);
    double w_min = std::numeric_limits<double>::infinity();
    ContentId victim = 0;
    for (auto n : st.cached_ids()) {
        double w = tab.index[n].cached(st.queue(n), st.tau(n));
        if (w < w_min || (w == w_min && n < victim)) {
            w_min = w;
            victim = n;
        }
    }
    if (w_r > w_min) return {ActionKind::FetchServeCache, victim};
    if (q < pre.discard.q_hat) return {ActionKind::Wait, {}};
    return {ActionKind::FetchServeDiscard, {}};
}

namespace {

// Cost of serving a content at the next slot: fetch or use the copy aged one more slot.
double next_slot_cost(const ContentParams& c, double beta, double q, double tau) {
    return std::min(c.costs.c_f, (q + 1.0) * c.ageing_rate() * (tau + 1.0 / beta));
}

template <std::size_t N>
std::size_t argmin_first(const std::array<double, N>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < N; ++i)
        if (v[i] < v[best]) best = i;
    return best;
}

}  // namespace

Action myopic_decide(const CacheSystemState& st, ContentId r, const SystemParams& s) {
    const double beta = s.beta;
    const auto& cr = s.contents[r];
    const double u = cr.ageing_rate();
    const double cf = cr.costs.c_f, cw = cr.costs.c_w, p = cr.p;
    const double q = double(st.queue(r));

    if (st.cached(r)) {
        const double tau = st.tau(r);
        // Lookahead over the other cached contents (identical for all three actions).
        double w = 0.0;
        for (auto l : st.cached_ids()) {
            if (l == r) continue;
            const auto& cl = s.contents[l];
            const double ql = double(st.queue(l));
            w += ql * cl.costs.c_w / beta +
                 cl.p * std::min(next_slot_cost(cl, beta, ql, st.tau(l)), (ql + 1.0) * cl.costs.c_w / beta);
        }
        std::array<double, 3> cost{
            u * tau * (q + 1.0) + p * std::min(cf, u * (tau + 1.0 / beta)) + w,
            cf + p * std::min(cf, u / beta) + w,
            cw * (q + 1.0) / beta + p * std::min(cf, (q + 2.0) * u * (tau + 1.0 / beta)) +
                (1.0 - p) * next_slot_cost(cr, beta, q, tau) + w,
        };
        switch (argmin_first(cost)) {
            case 0: return {ActionKind::ServeCached, {}};
            case 1: return {ActionKind::FetchServeCache, {}};
            default: return {ActionKind::Wait, {}};
        }
    }

    double lookahead = 0.0;
    double best_gain = std::numeric_limits<double>::infinity();
    ContentId victim = 0;
    for (auto n : st.cached_ids()) {
        const auto& cn = s.contents[n];
        const double m = next_slot_cost(cn, beta, double(st.queue(n)), st.tau(n));
        lookahead += cn.p * m;
        const double gain = cn.p * (cn.costs.c_f - m);
        if (gain < best_gain || (gain == best_gain && n < victim)) {
            best_gain = gain;
            victim = n;
        }
    }
    std::array<double, 3> cost{
        cf + lookahead + best_gain + p * std::min(cf, u / beta),
        cw * (q + 1.0) / beta + lookahead,
        cf + p * cf + lookahead,
    };
    switch (argmin_first(cost)) {
        case 0: return {ActionKind::FetchServeCache, victim};
        case 1: return {ActionKind::Wait, {}};
        default: return {ActionKind::FetchServeDiscard, {}};
    }
}

Action static_topm_decide(const CacheSystemState& st, ContentId r, const PolicyTables& tab) {
    if (!st.cached(r)) return {ActionKind::FetchServeDiscard, {}};
    if (st.tau(r) <= tab.thresholds[r].free.tau_star) return {ActionKind::ServeCached, {}};
    return {ActionKind::FetchServeCache, {}};
}

namespace {

class WhittlePolicy final : public Policy {
public:
    explicit WhittlePolicy(std::shared_ptr<const PolicyTables> t) : tab_(std::move(t)) {}
    Action decide(const CacheSystemState& st, ContentId r) override { return whittle_decide(st, r, *tab_); }
    PolicyKind kind() const override { return PolicyKind::Whittle; }

private:
    std::shared_ptr<const PolicyTables> tab_;
};

class MyopicPolicy final : public Policy {
public:
    explicit MyopicPolicy(const SystemParams& s) : s_(s) {}
    Action decide(const CacheSystemState& st, ContentId r) override { return myopic_decide(st, r, s_); }
    PolicyKind kind() const override { return PolicyKind::Myopic; }

private:
    SystemParams s_;
};

class StaticPolicy final : public Policy {
public:
    explicit StaticPolicy(std::shared_ptr<const PolicyTables> t) : tab_(std::move(t)) {}
    Action decide(const CacheSystemState& st, ContentId r) override { return static_topm_decide(st, r, *tab_); }
    PolicyKind kind() const override { return PolicyKind::StaticTopM; }

private:
    std::shared_ptr<const PolicyTables> tab_;
};

class InfinitePolicy final : public Policy {
public:
    explicit InfinitePolicy(std::shared_ptr<const PolicyTables> t) : tab_(std::move(t)) {}
    Action decide(const CacheSystemState& st, ContentId r) override {
        return infinite_capacity_decide(st.queue(r), st.tau(r), tab_->thresholds[r].free);
    }
    PolicyKind kind() const override { return PolicyKind::InfiniteCapacity; }

private:
    std::shared_ptr<const PolicyTables> tab_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(PolicyKind kind, const SystemParams& s,
                                    std::shared_ptr<const PolicyTables> tables) {
    if (!tables) tables = build_policy_tables(s, kind == PolicyKind::Whittle);
    switch (kind) {
        case PolicyKind::Whittle:
            if (tables->index.size() != s.size()) throw DomainError("Whittle policy needs index tables");
            return std::make_unique<WhittlePolicy>(std::move(tables));
        case PolicyKind::Myopic: return std::make_unique<MyopicPolicy>(s);
        case PolicyKind::StaticTopM: return std::make_unique<StaticPolicy>(std::move(tables));
        case PolicyKind::InfiniteCapacity: return std::make_unique<InfinitePolicy>(std::move(tables));
    }
    throw DomainError("unknown policy kind");
}

// ---- relaxed lower bound ----

double relaxed_dual(const SystemParams& s, const std::vector<ContentThresholds>& pre, double holding) {
    double total = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) total += solve_thresholds(s.contents[n], s.beta, holding, pre[n]).theta;
    return total - holding * double(s.capacity);
}

LowerBound relaxed_lower_bound(const SystemParams& s, const std::vector<ContentThresholds>& pre) {
    double top = 0.0;
    for (const auto& t : pre) top = std::max(top, t.limit);
    auto g = [&](double h) { return relaxed_dual(s, pre, h); };

    // Golden-section search on a concave dual.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = top;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(top, 1e-300); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = g(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = g(x1);
        }
    }
    LowerBound best{0.0, g(0.0)};
    auto consider = [&](double h) {
        double v = g(h);
        if (v > best.bound) best = {h, v};
    };
    consider(top);
    consider(0.5 * (a + b));
    // Local refinement in case the dual has flat or kinked stretches.
    const double mid = 0.5 * (a + b);
    const double half = std::max(1e-3 * top, 4.0 * (b - a));
    for (int k = -20; k <= 20; ++k) {
        double h = mid + half * double(k) / 20.0;
        if (h >= 0.0 && h <= top) consider(h);
    }
    return best;
}

LowerBound relaxed_lower_bound(const SystemParams& s) {
    std::vector<ContentThresholds> pre;
    pre.reserve(s.size());
    for (const auto& c : s.contents) pre.push_back(content_thresholds(c, s.beta));
    return relaxed_lower_bound(s, pre);
}

}  // namespace aov
