#include "aov/config.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace aov {

using nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double number(const json& obj, const std::string& where, const char* key, std::optional<double> dflt = {}) {
    if (!obj.contains(key)) {
        if (dflt) return *dflt;
        throw ConfigError(where + "." + key + ": missing");
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return v.get<double>();
}

std::uint64_t count(const json& obj, const std::string& where, const char* key, std::optional<std::uint64_t> dflt = {}) {
    if (!obj.contains(key)) {
        if (dflt) return *dflt;
        throw ConfigError(where + "." + key + ": missing");
    }
    const auto& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
}

// Scalar applied to every content, or one value per content.
std::vector<double> per_content(const json& obj, const std::string& where, const char* key, std::size_t n,
                                std::optional<double> dflt = {}) {
    if (obj.contains(key) && obj.at(key).is_array()) {
        const auto& a = obj.at(key);
        if (a.size() != n) throw ConfigError(where + "." + key + ": expected " + std::to_string(n) + " values");
        std::vector<double> out;
        for (const auto& v : a) {
            if (!v.is_number()) throw ConfigError(where + "." + key + ": expected numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    return std::vector<double>(n, number(obj, where, key, dflt));
}

}  // namespace

RunConfig parse_config(const json& j) {
    only_keys(j, "config", {"system", "costs", "policy", "sim", "sweep"});
    if (!j.contains("system")) throw ConfigError("config: missing 'system'");
    if (!j.contains("costs")) throw ConfigError("config: missing 'costs'");
    RunConfig rc;
    rc.source = j;

    const auto& sys = j.at("system");
    only_keys(sys, "system", {"N", "beta", "lambda", "zipf_alpha", "popularity", "capacity"});
    std::vector<double> pop;
    if (sys.contains("popularity")) {
        if (!sys.at("popularity").is_array()) throw ConfigError("system.popularity: expected an array");
        for (const auto& v : sys.at("popularity")) {
            if (!v.is_number()) throw ConfigError("system.popularity: expected numbers");
            pop.push_back(v.get<double>());
        }
        if (sys.contains("N") && count(sys, "system", "N") != pop.size())
            throw ConfigError("system.N: does not match popularity length");
    } else {
        const auto n = count(sys, "system", "N");
        if (n == 0) throw ConfigError("system.N: must be positive");
        try {
            pop = zipf_popularity(n, number(sys, "system", "zipf_alpha", 1.0));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("system.zipf_alpha: ") + e.what());
        }
    }
    const std::size_t n = pop.size();
    auto& s = rc.sim.system;
    s.beta = number(sys, "system", "beta");
    s.capacity = count(sys, "system", "capacity", 0);
    const auto lambda = per_content(sys, "system", "lambda", n);

    const auto& costs = j.at("costs");
    only_keys(costs, "costs", {"c_a", "c_f", "c_w"});
    const auto ca = per_content(costs, "costs", "c_a", n);
    const auto cf = per_content(costs, "costs", "c_f", n);
    const auto cw = per_content(costs, "costs", "c_w", n);
    s.contents.resize(n);
    for (std::size_t k = 0; k < n; ++k) s.contents[k] = ContentParams{lambda[k], pop[k], CostModel{ca[k], cf[k], cw[k]}};

    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        std::string name;
        if (p.is_string()) name = p.get<std::string>();
        else if (p.is_object()) {
            only_keys(p, "policy", {"name"});
            if (!p.contains("name") || !p.at("name").is_string()) throw ConfigError("policy.name: expected a string");
            name = p.at("name").get<std::string>();
        } else throw ConfigError("policy: expected a string or object");
        try {
            rc.sim.policy = parse_policy(name);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("policy: ") + e.what());
        }
    }

    if (j.contains("sim")) {
        const auto& sim = j.at("sim");
        only_keys(sim, "sim", {"events", "warmup", "seed", "mode"});
        rc.sim.events = count(sim, "sim", "events", rc.sim.events);
        rc.sim.warmup = number(sim, "sim", "warmup", rc.sim.warmup);
        rc.sim.seed = count(sim, "sim", "seed", rc.sim.seed);
        if (sim.contains("mode")) {
            if (!sim.at("mode").is_string()) throw ConfigError("sim.mode: expected a string");
            try {
                rc.sim.ageing = parse_ageing_mode(sim.at("mode").get<std::string>());
            } catch (const DomainError& e) {
                throw ConfigError(std::string("sim.mode: ") + e.what());
            }
        }
        if (rc.sim.events == 0) throw ConfigError("sim.events: must be positive");
        if (!(rc.sim.warmup >= 0.0 && rc.sim.warmup < 1.0)) throw ConfigError("sim.warmup: must lie in [0, 1)");
    }

    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        only_keys(sw, "sweep", {"axis", "values", "reps"});
        if (sw.contains("axis")) {
            if (!sw.at("axis").is_string()) throw ConfigError("sweep.axis: expected a string");
            try {
                rc.axis = parse_axis(sw.at("axis").get<std::string>());
            } catch (const DomainError& e) {
                throw ConfigError(std::string("sweep.axis: ") + e.what());
            }
        }
        if (sw.contains("values")) {
            if (!sw.at("values").is_array()) throw ConfigError("sweep.values: expected an array");
            for (const auto& v : sw.at("values")) {
                if (v.is_string()) rc.values.push_back(v.get<std::string>());
                else if (v.is_number_integer()) rc.values.push_back(std::to_string(v.get<long long>()));
                else if (v.is_number()) rc.values.push_back(fmt_num(v.get<double>()));
                else throw ConfigError("sweep.values: expected numbers or strings");
            }
        }
        rc.reps = count(sw, "sweep", "reps", rc.reps);
        if (rc.reps == 0) throw ConfigError("sweep.reps: must be positive");
    }

    auto report = validate(s, rc.sim.policy != PolicyKind::InfiniteCapacity);
    if (!report.ok()) throw ConfigError(report.str());
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::string config_digest(const json& j) {
    const std::string text = j.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw InternalError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string fmt_num(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace aov
