#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "aov/model.hpp"

namespace aov {

// Multi-content cache state. Occupancy only changes through swap_in, so a
// cache that starts full stays full.
class CacheSystemState {
public:
    CacheSystemState(std::size_t n_contents, std::size_t capacity);

    // Fill the cache with `ids` (fresh copies at the current clock).
    void preload(const std::vector<ContentId>& ids);

    std::size_t contents() const { return queue_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t occupancy() const { return cached_ids_.size(); }

    double clock() const { return clock_; }
    void advance(double dt) { clock_ += dt; }

    bool cached(ContentId n) const { return pos_[n] != npos; }
    std::uint64_t queue(ContentId n) const { return queue_[n]; }
    double tau(ContentId n) const { return clock_ - fetched_at_[n]; }
    double fetched_at(ContentId n) const { return fetched_at_[n]; }
    const std::vector<ContentId>& cached_ids() const { return cached_ids_; }
    std::uint64_t total_queue() const { return total_queue_; }

    void enqueue(ContentId n);
    // Returns how many requests were released.
    std::uint64_t release(ContentId n);
    // Reset the age of a cached copy.
    void refresh(ContentId n);
    // Evict `out` and cache a fresh copy of `in`.
    void swap_in(ContentId in, ContentId out);

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::size_t capacity_;
    double clock_ = 0.0;
    std::vector<std::uint64_t> queue_;
    std::vector<double> fetched_at_;
    std::vector<std::size_t> pos_;  // index into cached_ids_, npos if not cached
    std::vector<ContentId> cached_ids_;
    std::uint64_t total_queue_ = 0;
};

}  // namespace aov
