#include "doctest.h"

#include <numeric>

#include "aov/cache_state.hpp"
#include "aov/model.hpp"

using namespace aov;

namespace {

SystemParams reference_system() {
    return make_zipf_system(1000, 1.0, 40.0, 0.01, CostModel{0.1, 1.0, 0.01}, 200);
}

bool mentions(const ValidationReport& r, const std::string& field) {
    for (const auto& d : r.errors)
        if (d.field.find(field) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("zipf popularity") {
    CHECK(zipf_popularity(1, 1.0) == std::vector<double>{1.0});
    auto two = zipf_popularity(2, 0.0);
    CHECK(two[0] == doctest::Approx(0.5));
    CHECK(two[1] == doctest::Approx(0.5));

    double h = 0.0;
    for (int i = 1; i <= 1000; ++i) h += 1.0 / i;
    auto p = zipf_popularity(1000, 1.0);
    CHECK(p[0] == doctest::Approx(1.0 / h).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.1336).epsilon(1e-3));
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::is_sorted(p.rbegin(), p.rend()));

    for (double alpha : {0.0, 0.7, 3.0}) {
        auto q = zipf_popularity(100000, alpha);
        CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(zipf_popularity(0, 1.0), DomainError);
    CHECK_THROWS_AS(zipf_popularity(3, -1.0), DomainError);
}

TEST_CASE("system validation") {
    auto s = reference_system();
    CHECK(validate(s).ok());

    auto full = s;
    full.capacity = full.size();
    auto r = validate(full);
    CHECK_FALSE(r.ok());
    CHECK(mentions(r, "capacity"));
    CHECK(validate(full, false).ok());

    auto doubled = s;
    for (auto& c : doubled.contents) c.p *= 2.0;
    r = validate(doubled);
    CHECK(mentions(r, "popularity"));
    CHECK(r.errors.size() == 1);

    auto neg = s;
    neg.contents[3].lambda = -0.01;
    r = validate(neg);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].field == "contents[3].lambda");
    CHECK_THROWS_AS(require_valid(neg), DomainError);

    auto bad_beta = s;
    bad_beta.beta = 0.0;
    CHECK(mentions(validate(bad_beta), "beta"));
}

TEST_CASE("popularity order") {
    SystemParams s;
    s.beta = 1.0;
    for (double p : {0.2, 0.5, 0.2, 0.1}) s.contents.push_back({1.0, p, {1, 1, 1}});
    CHECK(popularity_order(s) == std::vector<ContentId>{1, 0, 2, 3});
}

TEST_CASE("cache state keeps occupancy") {
    CacheSystemState st(5, 2);
    st.preload({0, 3});
    CHECK(st.occupancy() == 2);
    CHECK(st.cached(3));
    CHECK_FALSE(st.cached(1));
    st.advance(1.5);
    CHECK(st.tau(0) == doctest::Approx(1.5));
    st.enqueue(1);
    st.enqueue(1);
    st.enqueue(4);
    CHECK(st.total_queue() == 3);
    CHECK(st.release(1) == 2);
    CHECK(st.total_queue() == 1);
    st.swap_in(1, 0);
    CHECK(st.occupancy() == 2);
    CHECK(st.cached(1));
    CHECK_FALSE(st.cached(0));
    CHECK(st.tau(1) == 0.0);
    st.advance(1.0);
    st.refresh(3);
    CHECK(st.tau(3) == 0.0);
    CHECK_THROWS_AS(st.swap_in(2, 0), InternalError);
    CHECK_THROWS_AS(st.swap_in(3, 1), InternalError);
    CHECK_THROWS_AS(st.refresh(0), InternalError);
    CacheSystemState bad(3, 2);
    CHECK_THROWS_AS(bad.preload({0}), DomainError);
    CHECK_THROWS_AS(bad.preload({0, 0}), DomainError);
}
