#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aov {

using ContentId = std::size_t;

// Bad caller input (out-of-range parameter, wrong regime).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Something that should be impossible given valid input.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CostModel {
    double c_a = 0.0;  // ageing cost per unit of AoV
    double c_f = 0.0;  // fetch cost
    double c_w = 0.0;  // waiting cost per request per unit time
};

struct ContentParams {
    double lambda = 0.0;  // update rate at the origin
    double p = 0.0;       // request probability
    CostModel costs;

    double ageing_rate() const { return costs.c_a * lambda; }
};

struct SystemParams {
    double beta = 0.0;  // aggregate request rate
    std::vector<ContentParams> contents;
    std::size_t capacity = 0;

    std::size_t size() const { return contents.size(); }
    // Per-content request rate p_n * beta.
    double rate(ContentId n) const { return contents.at(n).p * beta; }
};

struct Diagnostic {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> errors;
    bool ok() const { return errors.empty(); }
    std::string str() const;
};

ValidationReport validate(const ContentParams& c, const std::string& prefix = "content");
// finite_cache=false skips the capacity < N check (infinite-capacity runs).
ValidationReport validate(const SystemParams& s, bool finite_cache = true);
// Throws DomainError carrying every diagnostic.
void require_valid(const SystemParams& s, bool finite_cache = true);

// Normalized Zipf weights 1/k^alpha, k = 1..n.
std::vector<double> zipf_popularity(std::size_t n, double alpha);

// Homogeneous costs and update rates, Zipf popularity.
SystemParams make_zipf_system(std::size_t n, double alpha, double beta, double lambda,
                              const CostModel& costs, std::size_t capacity);

// Content ids sorted by decreasing popularity, ties by lower id.
std::vector<ContentId> popularity_order(const SystemParams& s);

// Single-content view used by the threshold and index machinery.
struct SingleContentState {
    std::uint64_t queue = 0;  // Q: requests waiting
    double tau = 0.0;         // time since last fetch (ignored when uncached)
    bool cached = false;
    bool requested = false;
};

}  // namespace aov
