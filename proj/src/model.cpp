#include "aov/model.hpp"
#include "aov/cache_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace aov {

std::string ValidationReport::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) os << "; ";
        os << errors[i].field << ": " << errors[i].message;
    }
    return os.str();
}

namespace {

void check_positive(ValidationReport& r, const std::string& field, double v) {
    if (!std::isfinite(v) || v <= 0.0) r.errors.push_back({field, "must be finite and > 0"});
}

}  // namespace

ValidationReport validate(const ContentParams& c, const std::string& prefix) {
    ValidationReport r;
    check_positive(r, prefix + ".lambda", c.lambda);
    check_positive(r, prefix + ".c_a", c.costs.c_a);
    check_positive(r, prefix + ".c_f", c.costs.c_f);
    check_positive(r, prefix + ".c_w", c.costs.c_w);
    if (!std::isfinite(c.p) || c.p <= 0.0 || c.p > 1.0)
        r.errors.push_back({prefix + ".p", "must lie in (0, 1]"});
    return r;
}

ValidationReport validate(const SystemParams& s, bool finite_cache) {
    ValidationReport r;
    check_positive(r, "beta", s.beta);
    if (s.contents.empty()) {
        r.errors.push_back({"contents", "at least one content is required"});
        return r;
    }
    double total = 0.0;
    for (std::size_t n = 0; n < s.contents.size(); ++n) {
        auto sub = validate(s.contents[n], "contents[" + std::to_string(n) + "]");
        r.errors.insert(r.errors.end(), sub.errors.begin(), sub.errors.end());
        total += s.contents[n].p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        r.errors.push_back({"popularity", "probabilities sum to " + std::to_string(total) + ", expected 1"});
    if (finite_cache && s.capacity >= s.contents.size())
        r.errors.push_back({"capacity", "must be smaller than the number of contents"});
    return r;
}

void require_valid(const SystemParams& s, bool finite_cache) {
    auto r = validate(s, finite_cache);
    if (!r.ok()) throw DomainError(r.str());
}

std::vector<double> zipf_popularity(std::size_t n, double alpha) {
    if (n == 0) throw DomainError("zipf_popularity: n must be positive");
    if (!std::isfinite(alpha) || alpha < 0.0) throw DomainError("zipf_popularity: alpha must be >= 0");
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = std::pow(double(k + 1), -alpha);
    // Sum smallest-first for accuracy.
    double total = 0.0;
    for (std::size_t k = n; k-- > 0;) total += w[k];
    for (auto& x : w) x /= total;
    return w;
}

SystemParams make_zipf_system(std::size_t n, double alpha, double beta, double lambda,
                              const CostModel& costs, std::size_t capacity) {
    SystemParams s;
    s.beta = beta;
    s.capacity = capacity;
    auto p = zipf_popularity(n, alpha);
    s.contents.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.contents[k] = ContentParams{lambda, p[k], costs};
    return s;
}

std::vector<ContentId> popularity_order(const SystemParams& s) {
    std::vector<ContentId> ids(s.size());
    std::iota(ids.begin(), ids.end(), ContentId{0});
    std::stable_sort(ids.begin(), ids.end(), [&](ContentId a, ContentId b) {
        return s.contents[a].p > s.contents[b].p;
    });
    return ids;
}

// ---- CacheSystemState ----

CacheSystemState::CacheSystemState(std::size_t n_contents, std::size_t capacity)
    : capacity_(capacity), queue_(n_contents, 0), fetched_at_(n_contents, 0.0),
      pos_(n_contents, npos) {
    if (capacity > n_contents) throw DomainError("capacity exceeds number of contents");
    cached_ids_.reserve(capacity);
}

void CacheSystemState::preload(const std::vector<ContentId>& ids) {
    if (ids.size() != capacity_) throw DomainError("preload must fill the cache exactly");
    for (auto n : cached_ids_) pos_[n] = npos;
    cached_ids_.clear();
    for (auto n : ids) {
        if (n >= queue_.size()) throw DomainError("preload: content id out of range");
        if (pos_[n] != npos) throw DomainError("preload: duplicate content id");
        pos_[n] = cached_ids_.size();
        cached_ids_.push_back(n);
        fetched_at_[n] = clock_;
    }
}

void CacheSystemState::enqueue(ContentId n) {
    ++queue_[n];
    ++total_queue_;
}

std::uint64_t CacheSystemState::release(ContentId n) {
    auto q = queue_[n];
    total_queue_ -= q;
    queue_[n] = 0;
    return q;
}

void CacheSystemState::refresh(ContentId n) {
    if (!cached(n)) throw InternalError("refresh on a content that is not cached");
    fetched_at_[n] = clock_;
}

void CacheSystemState::swap_in(ContentId in, ContentId out) {
    if (cached(in)) throw InternalError("swap_in: content already cached");
    if (!cached(out)) throw InternalError("swap_in: evicted content is not cached");
    auto slot = pos_[out];
    pos_[out] = npos;
    cached_ids_[slot] = in;
    pos_[in] = slot;
    fetched_at_[in] = clock_;
}

}  // namespace aov
