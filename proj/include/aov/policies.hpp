#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aov/cache_state.hpp"
#include "aov/model.hpp"
#include "aov/thresholds.hpp"
#include "aov/whittle.hpp"

namespace aov {

enum class ActionKind : int {
    ServeCached = 0,
    FetchServeCache = 1,
    Wait = 2,
    FetchServeDiscard = 3,
};

struct Action {
    ActionKind kind = ActionKind::ServeCached;
    std::optional<ContentId> evict;  // set when FetchServeCache admits an uncached content
};

enum class PolicyKind { Whittle, Myopic, StaticTopM, InfiniteCapacity };

std::string to_string(PolicyKind k);
std::string to_string(ActionKind k);
// Accepts "whittle", "myopic", "static-top-m" (or "static"), "infinite".
PolicyKind parse_policy(const std::string& name);

// Per-content data shared (read-only) across simulation runs of one system.
struct PolicyTables {
    std::vector<ContentThresholds> thresholds;
    std::vector<IndexTable> index;  // empty unless built with indices
};

std::shared_ptr<const PolicyTables> build_policy_tables(const SystemParams& s, bool with_index,
                                                        std::size_t index_nodes = 2048);

// Single content with unlimited cache.
Action infinite_capacity_decide(std::uint64_t q, double tau, const InfiniteCapacitySolution& sol);

Action whittle_decide(const CacheSystemState& st, ContentId r, const PolicyTables& tab);
Action myopic_decide(const CacheSystemState& st, ContentId r, const SystemParams& s);
Action static_topm_decide(const CacheSystemState& st, ContentId r, const PolicyTables& tab);

class Policy {
public:
    virtual ~Policy() = default;
    virtual Action decide(const CacheSystemState& st, ContentId r) = 0;
    virtual PolicyKind kind() const = 0;
};

// Tables must have been built with indices for the Whittle policy.
std::unique_ptr<Policy> make_policy(PolicyKind kind, const SystemParams& s,
                                    std::shared_ptr<const PolicyTables> tables);

// Lagrangian relaxation of the cache constraint.
double relaxed_dual(const SystemParams& s, const std::vector<ContentThresholds>& pre, double holding);

struct LowerBound {
    double holding_star = 0.0;
    double bound = 0.0;
};

LowerBound relaxed_lower_bound(const SystemParams& s);
LowerBound relaxed_lower_bound(const SystemParams& s, const std::vector<ContentThresholds>& pre);

}  // namespace aov
