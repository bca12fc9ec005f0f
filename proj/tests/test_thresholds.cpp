#include "doctest.h"

#include <cmath>
#include <random>

#include "aov/oracle.hpp"
#include "aov/thresholds.hpp"

using namespace aov;

namespace {

const CostModel kUnit{1.0, 1.0, 0.5};
const ContentParams kUnitContent{1.0, 1.0, kUnit};

// Renewal-reward cost of "serve up to age T, then collect Q requests and fetch".
double threshold_policy_cost(double rate, double u, const CostModel& c, double T, int Q) {
    const double cycle_cost = rate * u * T * T / 2.0 + c.c_f + c.c_w * Q * (Q + 1) / (2.0 * rate);
    return cycle_cost / (T + (Q + 1) / rate);
}

struct Best {
    double T, theta;
    int Q;
};

Best brute_force_infinite(double rate, double lambda, const CostModel& c) {
    const double u = c.c_a * lambda;
    Best best{0, INFINITY, 0};
    for (int Q = 0; Q <= 200; ++Q) {
        double a = 0.0, b = 100.0 / (rate * u) + 100.0;
        for (int it = 0; it < 300; ++it) {
            double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
            if (threshold_policy_cost(rate, u, c, m1, Q) < threshold_policy_cost(rate, u, c, m2, Q)) b = m2;
            else a = m1;
        }
        double T = 0.5 * (a + b), th = threshold_policy_cost(rate, u, c, T, Q);
        if (th < best.theta) best = {T, th, Q};
    }
    return best;
}

// Never cache: wait for Q more requests then fetch and discard.
std::pair<int, double> brute_force_discard(double rate, const CostModel& c) {
    int best_q = 0;
    double best = INFINITY;
    for (int Q = 0; Q <= 5000; ++Q) {
        double th = rate * (c.c_f + c.c_w * Q * (Q + 1) / (2.0 * rate)) / (Q + 1);
        if (th < best) best = th, best_q = Q;
    }
    return {best_q, best};
}

double newton_exp_gap(double y) {
    double x = std::max(1.0, std::sqrt(2.0 * y));
    for (int i = 0; i < 100; ++i) x -= (x + std::exp(-x) - 1.0 - y) / (1.0 - std::exp(-x));
    return x;
}

ContentParams random_content(std::mt19937_64& rng, double& beta) {
    auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    beta = uni(0.5, 50.0);
    return {uni(0.005, 1.0), uni(0.01, 1.0), {uni(0.1, 2.0), uni(0.1, 2.0), uni(0.005, 1.0)}};
}

}  // namespace

TEST_CASE("infinite capacity: unit parameters") {
    auto sol = solve_infinite_capacity(1.0, 1.0, kUnit);
    CHECK(sol.tau_star == doctest::Approx(std::sqrt(7.0) - 2.0).epsilon(1e-12));
    CHECK(sol.q_star == 1);
    CHECK(sol.theta == doctest::Approx(0.6458).epsilon(1e-4));
    auto bf = brute_force_infinite(1.0, 1.0, kUnit);
    CHECK(bf.Q == 1);
    CHECK(sol.theta == doctest::Approx(bf.theta).epsilon(1e-9));
}

TEST_CASE("infinite capacity: limits") {
    auto big = solve_infinite_capacity(1.0, 1.0, {1.0, 1.0, 1e9});
    CHECK(big.q_star == 0);
    CHECK(big.tau_star == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-12));
    auto cheap = solve_infinite_capacity(1.0, 1.0, {1.0, 1e-12, 1.0});
    CHECK(cheap.q_star == 0);
    CHECK(cheap.tau_star < 1e-5);
    CHECK(cheap.theta < 1e-5);
    CHECK_THROWS_AS(solve_infinite_capacity(0.0, 1.0, kUnit), DomainError);
}

TEST_CASE("infinite capacity matches renewal brute force") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 25; ++k) {
        double beta;
        auto c = random_content(rng, beta);
        const double rate = c.p * beta;
        auto sol = solve_infinite_capacity(rate, c.lambda, c.costs);
        auto bf = brute_force_infinite(rate, c.lambda, c.costs);
        CHECK(sol.theta == doctest::Approx(bf.theta).epsilon(1e-8));
        CHECK(sol.theta <= bf.theta * (1 + 1e-12));
        CHECK(sol.theta == doctest::Approx(rate * c.ageing_rate() * sol.tau_star).epsilon(1e-12));
    }
}

TEST_CASE("discard threshold") {
    auto d = solve_q_hat(kUnitContent, 1.0);
    CHECK(d.q_hat == 1);
    CHECK(d.theta == doctest::Approx(0.75));
    CHECK(d.tau0 == doctest::Approx(0.75));

    // Most popular content of the 1000-content reference configuration.
    double h = 0.0;
    for (int i = 1; i <= 1000; ++i) h += 1.0 / i;
    ContentParams c1{0.01, 1.0 / h, {0.1, 1.0, 0.01}};
    CHECK(solve_q_hat(c1, 40.0).q_hat == 32);
    CHECK(brute_force_discard(40.0 / h, c1.costs).first == 32);

    std::mt19937_64 rng(5);
    for (int k = 0; k < 25; ++k) {
        double beta;
        auto c = random_content(rng, beta);
        auto bf = brute_force_discard(c.p * beta, c.costs);
        auto s = solve_q_hat(c, beta);
        CHECK(s.theta == doctest::Approx(bf.second).epsilon(1e-12));
    }
    auto tiny = solve_q_hat({1.0, 1.0, {1.0, 1e-12, 1.0}}, 1.0);
    CHECK(tiny.q_hat == 0);
    CHECK(tiny.theta < 1e-9);
}

TEST_CASE("holding cost limit") {
    CHECK(holding_cost_limit(kUnitContent, 1.0) == doctest::Approx(0.75 - (1.0 - std::exp(-0.75))).epsilon(1e-12));
    CHECK(holding_cost_limit(kUnitContent, 1.0) == doctest::Approx(0.2224).epsilon(1e-3));
    CHECK(holding_cost_limit({1.0, 1.0, {1.0, 1e-9, 1.0}}, 1.0) < 1e-8);
}

TEST_CASE("exp gap equation") {
    CHECK(solve_exp_gap(0.0) == 0.0);
    for (double y : {1e-14, 1e-8, 1e-3, 0.1, 1.0, 50.0, 1e4}) {
        double x = solve_exp_gap(y);
        CHECK(x == doctest::Approx(newton_exp_gap(y)).epsilon(1e-9));
    }
    CHECK(solve_exp_gap(0.1) == doctest::Approx(0.4832).epsilon(1e-3));
}

TEST_CASE("mixed regime: unit parameters") {
    const auto pre = content_thresholds(kUnitContent, 1.0);

    auto t0 = solve_thresholds(kUnitContent, 1.0, 0.0, pre);
    CHECK(t0.tau_bar == doctest::Approx(pre.free.tau_star));
    CHECK(t0.tau_tilde == doctest::Approx(pre.free.tau_star));
    CHECK(t0.q_bar == 1);
    auto m0 = solve_mixed(kUnitContent, 1.0, 0.0, pre);
    CHECK(m0.tau_bar == doctest::Approx(pre.free.tau_star).epsilon(1e-9));
    CHECK(m0.theta == doctest::Approx(pre.free.theta).epsilon(1e-9));

    auto tI = solve_mixed(kUnitContent, 1.0, pre.limit, pre);
    CHECK(tI.tau_bar == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(tI.tau_tilde == doctest::Approx(0.75).epsilon(1e-7));
    CHECK(tI.q_bar == 1);

    // Exact quadratic 0.5 t^2 + 2.383183 t - 0.533634 = 0.
    auto t = solve_thresholds(kUnitContent, 1.0, 0.1, pre);
    CHECK(t.regime == HoldingRegime::Mixed);
    CHECK(t.x == doctest::Approx(newton_exp_gap(0.1)).epsilon(1e-10));
    CHECK(t.tau_bar == doctest::Approx(0.214283).epsilon(1e-5));
    CHECK(t.tau_tilde == doctest::Approx(0.697466).epsilon(1e-5));
    CHECK(t.q_bar == 1);
    CHECK(t.theta == doctest::Approx(0.6974).epsilon(2e-4));

    auto r = mixed_residuals(kUnitContent, 1.0, t);
    CHECK(std::abs(r.exp_gap) < 1e-12);
    CHECK(std::abs(r.stationarity) < 1e-12);
    CHECK(r.floor_gap == 0.0);

    auto never = solve_thresholds(kUnitContent, 1.0, 0.3, pre);
    CHECK(never.regime == HoldingRegime::NeverCache);
    CHECK(never.theta == doctest::Approx(0.75));
    CHECK(never.q_bar == 1);

    CHECK_THROWS_AS(solve_mixed(kUnitContent, 1.0, 0.3, pre), DomainError);
    CHECK_THROWS_AS(solve_thresholds(kUnitContent, 1.0, -0.1, pre), DomainError);
}

TEST_CASE("mixed regime agrees with value iteration") {
    const auto grid = oracle::default_grid(kUnitContent, 1.0, 2.0);
    const auto pre = content_thresholds(kUnitContent, 1.0);
    for (double h : {0.05, 0.1, 0.2}) {
        auto t = solve_thresholds(kUnitContent, 1.0, h, pre);
        auto ref = oracle::value_iterate_holding(kUnitContent, 1.0, h, grid);
        CHECK(t.theta == doctest::Approx(ref.theta).epsilon(5e-3));
        CHECK(std::abs(t.tau_bar - ref.tau_bar) <= 1.5 * grid.tau_step);
        CHECK(std::abs(t.tau_tilde - ref.tau_tilde) <= 1.5 * grid.tau_step);
        CHECK(t.q_bar == ref.q_bar);
    }
}

TEST_CASE("threshold monotonicity and ordering on random contents") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 20; ++k) {
        double beta;
        auto c = random_content(rng, beta);
        const auto pre = content_thresholds(c, beta);
        CHECK(pre.free.q_star <= pre.discard.q_hat);
        CHECK(pre.free.tau_star <= pre.discard.tau0 * (1 + 1e-12));
        ThresholdSet prev = solve_thresholds(c, beta, 0.0, pre);
        for (int j = 1; j <= 200; ++j) {
            const double h = pre.limit * j / 200.0;
            auto t = solve_mixed(c, beta, h, pre);
            CHECK(t.tau_bar < prev.tau_bar);
            CHECK(t.tau_tilde > prev.tau_tilde);
            CHECK(t.q_bar >= prev.q_bar);
            CHECK(t.tau_bar <= pre.free.tau_star * (1 + 1e-12));
            CHECK(t.tau_tilde >= pre.free.tau_star * (1 - 1e-12));
            CHECK(t.tau_tilde <= pre.discard.tau0 * (1 + 1e-9) + 1e-12);
            CHECK(t.q_bar >= pre.free.q_star);
            CHECK(t.q_bar <= pre.discard.q_hat);
            prev = t;
        }
    }
}
