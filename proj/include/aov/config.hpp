#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "aov/simulator.hpp"

namespace aov {

// Config file problems (schema, types, values). Maps to exit code 2.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

struct RunConfig {
    SimConfig sim;
    SweepAxis axis = SweepAxis::Capacity;
    std::vector<std::string> values;
    std::uint64_t reps = 1;
    nlohmann::json source;  // as loaded
};

// Sections: system, costs, policy, sim, sweep. Unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// SHA-256 (hex) of the canonical dump: keys sorted, no whitespace.
std::string config_digest(const nlohmann::json& j);

// Shortest round-trip decimal form used in every CSV.
std::string fmt_num(double x);

}  // namespace aov
