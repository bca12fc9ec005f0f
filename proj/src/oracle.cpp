#include "aov/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace aov::oracle {

std::size_t Grid::nodes() const { return static_cast<std::size_t>(std::llround(tau_max / tau_step)) + 1; }

namespace {

constexpr int kMaxPolicyIterations = 500;

// Golden-section minimum of a unimodal function on [lo, hi].
template <class F>
double golden_min(F f, double lo, double hi, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int k = 0; k < iters; ++k) {
        if (f1 > f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = f(x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

// Weights of E[f(tau_i + T)], T ~ Exp(rate), for f linear on [tau_i, tau_i + step]:
// E = a f_i + b f_{i+1} + r E_{i+1}.
struct Kernel {
    double a, b, r;
    Kernel(double rate, double step) {
        const double x = rate * step;
        const double one_minus_r = -std::expm1(-x);
        r = 1.0 - one_minus_r;
        b = one_minus_r / x - r;
        a = one_minus_r - b;
    }
};

// E over T of a function linear on [tau, tau + d] from the value f0 and slope s, plus
// the tail beyond tau + d with expectation `tail`.
double partial_expectation(double rate, double d, double f0, double s, double tail) {
    const double one_minus = -std::expm1(-rate * d);
    const double decay = 1.0 - one_minus;
    return f0 * one_minus + s * (one_minus / rate - d * decay) + decay * tail;
}

template <std::size_t D>
using Aff = std::array<double, D>;

template <std::size_t D>
Aff<D> axpy(double s, const Aff<D>& x, const Aff<D>& y) {
    Aff<D> out;
    for (std::size_t k = 0; k < D; ++k) out[k] = s * x[k] + y[k];
    return out;
}

template <std::size_t D>
double eval(const Aff<D>& f, const Aff<D - 1>& z) {
    double v = f[D - 1];
    for (std::size_t k = 0; k + 1 < D; ++k) v += f[k] * z[k];
    return v;
}

// Solve A x = rhs (3x3) by Gaussian elimination with partial pivoting.
std::array<double, 3> solve3(std::array<std::array<double, 3>, 3> A, std::array<double, 3> rhs) {
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (std::abs(A[piv][c]) < 1e-300) throw InternalError("oracle: singular policy evaluation");
        std::swap(A[piv], A[c]);
        std::swap(rhs[piv], rhs[c]);
        for (int r = c + 1; r < 3; ++r) {
            double f = A[r][c] / A[c][c];
            for (int k = c; k < 3; ++k) A[r][k] -= f * A[c][k];
            rhs[r] -= f * rhs[c];
        }
    }
    std::array<double, 3> x{};
    for (int r = 2; r >= 0; --r) {
        double v = rhs[r];
        for (int k = r + 1; k < 3; ++k) v -= A[r][k] * x[k];
        x[r] = v / A[r][r];
    }
    return x;
}

void require_grid(const Grid& g) {
    if (!(g.tau_step > 0.0) || !(g.tau_max > g.tau_step))
        throw DomainError("oracle grid needs 0 < tau_step < tau_max");
}

void require_costs(double rate, double lambda, const CostModel& c) {
    if (!(rate > 0.0) || !(lambda > 0.0) || !(c.c_a > 0.0) || !(c.c_f > 0.0) || !(c.c_w > 0.0))
        throw DomainError("oracle: rates and costs must be positive");
}

}  // namespace

Scales renewal_scales(double rate, double lambda, const CostModel& costs) {
    require_costs(rate, lambda, costs);
    const double u = costs.c_a * lambda;
    const auto q_lim = static_cast<std::uint64_t>(std::ceil(std::sqrt(2.0 * rate * costs.c_f / costs.c_w))) + 3;
    Scales s;
    // Serve while young, then collect q+1 requests and fetch: cost per cycle over cycle length.
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t q = 0; q <= q_lim; ++q) {
        const double qd = double(q);
        const double fixed = costs.c_f + costs.c_w * qd * (qd + 1.0) / (2.0 * rate);
        auto J = [&](double tau) {
            return (rate * u * tau * tau / 2.0 + fixed) / (tau + (qd + 1.0) / rate);
        };
        const double hi = 2.0 * std::sqrt(2.0 * fixed / (rate * u)) + 1.0 / rate;
        const double tau = golden_min(J, 0.0, hi);
        if (J(tau) < best) {
            best = J(tau);
            s.tau_serve = tau;
            s.q_serve = q;
        }
    }
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint64_t q = 0; q <= q_lim; ++q) {
        const double qd = double(q);
        const double J = (rate * costs.c_f + costs.c_w * qd * (qd + 1.0) / 2.0) / (qd + 1.0);
        if (J < best_d) {
            best_d = J;
            s.q_discard = q;
        }
    }
    s.tau_discard = best_d / (rate * u);
    return s;
}

Grid default_grid(double rate, double lambda, const CostModel& costs, double refine) {
    auto s = renewal_scales(rate, lambda, costs);
    Grid g;
    g.tau_step = s.tau_serve / (100.0 * refine);
    const double horizon = 4.0 * std::max(s.tau_discard, s.tau_serve);
    g.tau_max = g.tau_step * std::ceil(horizon / g.tau_step);
    g.q_max = std::max(s.q_discard, s.q_serve) + 10;
    return g;
}

Grid default_grid(const ContentParams& c, double beta, double refine) {
    return default_grid(c.p * beta, c.lambda, c.costs, refine);
}

// ---------------------------------------------------------------------------
// Unlimited cache: states (q, age). Policy iteration with an exact evaluation
// that sweeps ages downward and carries values as affine forms in the two
// unknowns (theta, R), R being the expected value right after a fetch.

InfiniteTable value_iterate_infinite(double rate, double lambda, const CostModel& costs, const Grid& grid) {
    require_costs(rate, lambda, costs);
    require_grid(grid);
    const std::size_t N = grid.nodes();
    const std::size_t n = N - 1;
    const std::size_t Qn = grid.q_max + 1;
    const double u = costs.c_a * lambda;
    const Kernel K(rate, grid.tau_step);
    const double tol = 1e-10 * std::max(1.0, costs.c_f);
    auto at = [N](std::size_t q, std::size_t i) { return q * N + i; };

    InfiniteTable T;
    T.grid = grid;
    T.rate = rate;
    T.h.assign(Qn * N, 0.0);
    // Start from "always fetch", which is unichain.
    T.action.assign(Qn * N, 2);
    std::vector<double> S(Qn * N);
    double R = 0.0;

    using A3 = Aff<3>;  // (theta, R, 1)
    using A4 = Aff<4>;  // (theta, R, y, 1), y = h(0, i) while solving node i
    std::vector<A3> hA(Qn * N);
    std::vector<A3> prevH(Qn), prevS(Qn), curS(Qn);
    std::vector<A4> cur(Qn);

    auto evaluate = [&] {
        for (std::size_t ii = N; ii-- > 0;) {
            const bool top = ii == n;
            const double a = top ? 1.0 : K.a;
            auto B = [&](std::size_t q) -> A3 {
                if (top) return A3{0, 0, 0};
                return axpy(K.b, prevH[q], axpy(K.r, prevS[q], A3{0, 0, 0}));
            };
            const double tau = grid.tau(ii);
            for (std::size_t q = Qn; q-- > 0;) {
                const double qd = double(q);
                A4 f{-1.0 / rate, 0, 0, 0};
                switch (T.action[at(q, ii)]) {
                    case 0: {
                        auto b = B(0);
                        f[3] += u * tau * (qd + 1.0) + b[2];
                        f[0] += b[0];
                        f[1] += b[1];
                        f[2] += a;
                        break;
                    }
                    case 1: {
                        auto b = B(q + 1);
                        f[3] += costs.c_w * (qd + 1.0) / rate + b[2];
                        f[0] += b[0];
                        f[1] += b[1];
                        for (int k = 0; k < 4; ++k) f[k] += a * cur[q + 1][k];
                        break;
                    }
                    default:
                        f[3] += costs.c_f;
                        f[1] += 1.0;
                }
                cur[q] = f;
            }
            const double e = cur[0][2];
            if (e >= 1.0) throw InternalError("oracle: policy never leaves the top age");
            A3 y{cur[0][0] / (1.0 - e), cur[0][1] / (1.0 - e), cur[0][3] / (1.0 - e)};
            for (std::size_t q = 0; q < Qn; ++q) {
                A3 hq{cur[q][0] + cur[q][2] * y[0], cur[q][1] + cur[q][2] * y[1], cur[q][3] + cur[q][2] * y[2]};
                hA[at(q, ii)] = hq;
                curS[q] = top ? hq : axpy(a, hq, B(q));
            }
            prevS.swap(curS);
            for (std::size_t q = 0; q < Qn; ++q) prevH[q] = hA[at(q, ii)];
        }
        // Normalization h(0,0) = 0 and consistency S(0,0) = R.
        const A3& h00 = hA[at(0, 0)];
        const A3& s00 = prevS[0];
        const double det = h00[0] * (s00[1] - 1.0) - h00[1] * s00[0];
        if (std::abs(det) < 1e-300) throw InternalError("oracle: singular closure");
        const double theta = (-h00[2] * (s00[1] - 1.0) + h00[1] * s00[2]) / det;
        R = (-h00[0] * s00[2] + s00[0] * h00[2]) / det;
        T.theta = theta;
        const Aff<2> z{theta, R};
        for (std::size_t k = 0; k < hA.size(); ++k) T.h[k] = eval<3>(hA[k], z);
        for (std::size_t q = 0; q < Qn; ++q) {
            S[at(q, n)] = T.h[at(q, n)];
            for (std::size_t ii = n; ii-- > 0;)
                S[at(q, ii)] = K.a * T.h[at(q, ii)] + K.b * T.h[at(q, ii + 1)] + K.r * S[at(q, ii + 1)];
        }
    };

    auto action_values = [&](std::size_t q, std::size_t ii) {
        const double qd = double(q);
        constexpr double inf = std::numeric_limits<double>::infinity();
        std::array<double, 3> v{inf, inf, inf};
        if (ii < n) v[0] = u * grid.tau(ii) * (qd + 1.0) + S[at(0, ii)];
        if (q + 1 < Qn) v[1] = costs.c_w * (qd + 1.0) / rate + S[at(q + 1, ii)];
        v[2] = costs.c_f + R;
        return v;
    };

    bool stable = false;
    for (T.iterations = 1; T.iterations <= kMaxPolicyIterations; ++T.iterations) {
        evaluate();
        stable = true;
        for (std::size_t q = 0; q < Qn; ++q)
            for (std::size_t ii = 0; ii < N; ++ii) {
                auto v = action_values(q, ii);
                auto& act = T.action[at(q, ii)];
                std::uint8_t best = act;
                for (std::uint8_t k = 0; k < 3; ++k)
                    if (v[k] < v[best] - tol) best = k;
                if (best != act) {
                    act = best;
                    stable = false;
                }
            }
        if (stable) break;
    }
    if (!stable) throw InternalError("oracle: policy iteration did not converge");

    // Final greedy with ties to the lowest action code; one Bellman sweep as a check.
    T.residual = 0.0;
    for (std::size_t q = 0; q < Qn; ++q)
        for (std::size_t ii = 0; ii < N; ++ii) {
            auto v = action_values(q, ii);
            const double m = *std::min_element(v.begin(), v.end());
            std::uint8_t best = 0;
            while (v[best] > m + tol) ++best;
            T.action[at(q, ii)] = best;
            T.residual = std::max(T.residual, std::abs(m - T.theta / rate - T.h[at(q, ii)]));
        }

    std::size_t first = 0;
    while (first < N && T.action[at(0, first)] == 0) ++first;
    T.tau_star = first == 0 ? 0.0 : grid.tau(first - 1);
    T.q_star = grid.q_max;
    for (std::size_t q = 0; q < Qn; ++q)
        if (T.action[at(q, n)] == 2) {
            T.q_star = q;
            break;
        }
    return T;
}

// ---------------------------------------------------------------------------
// Holding cost. Unknowns of the affine evaluation: (theta, L0, E0), where L0 is
// the expected value right after fetch-and-keep and E0 right after leaving
// the content uncached with an empty queue.

namespace {

struct HoldingModel {
    ContentParams c;
    double beta, holding, u, p;
    Grid grid;
    Kernel K;
    std::size_t N, n, Qn;
    double tol;

    HoldingModel(const ContentParams& c_, double beta_, double holding_, const Grid& g)
        : c(c_), beta(beta_), holding(holding_), u(c_.costs.c_a * c_.lambda), p(c_.p), grid(g), K(beta_, g.tau_step),
          N(g.nodes()), n(g.nodes() - 1), Qn(g.q_max + 1), tol(1e-10 * std::max(1.0, c_.costs.c_f)) {}
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<double, 5> cached_requested_values(const HoldingModel& M, double tau, double ahead, double reset_c,
                                               double reset_u, double eu1, bool top) {
    const auto& cs = M.c.costs;
    std::array<double, 5> v{kInf, kInf, kInf, kInf, kInf};
    if (!top) v[0] = M.u * tau + M.holding / M.beta + ahead;
    v[1] = cs.c_f + M.holding / M.beta + reset_c;
    if (M.Qn > 1) v[2] = cs.c_w / M.beta + eu1;
    v[3] = cs.c_f + reset_u;
    v[4] = M.u * tau + reset_u;
    return v;
}

std::array<double, 5> cached_idle_values(const HoldingModel& M, double ahead, double reset_u, bool top) {
    std::array<double, 5> v{kInf, kInf, kInf, kInf, kInf};
    if (!top) v[0] = M.holding / M.beta + ahead;
    v[2] = reset_u;
    return v;
}

std::array<double, 5> uncached_values(const HoldingModel& M, std::size_t q, double reset_c, double reset_u,
                                      double eu_next) {
    const auto& cs = M.c.costs;
    std::array<double, 5> v{kInf, kInf, kInf, kInf, kInf};
    v[1] = cs.c_f + M.holding / M.beta + reset_c;
    if (q + 1 < M.Qn) v[2] = cs.c_w * (double(q) + 1.0) / M.beta + eu_next;
    v[3] = cs.c_f + reset_u;
    return v;
}

std::uint8_t lowest_within(const std::array<double, 5>& v, double tol) {
    const double m = *std::min_element(v.begin(), v.end());
    std::uint8_t k = 0;
    while (v[k] > m + tol) ++k;
    return k;
}

}  // namespace

HoldingTable value_iterate_holding(const ContentParams& c, double beta, double holding, const Grid& grid,
                                   const HoldingTable* warm) {
    require_costs(c.p * beta, c.lambda, c.costs);
    if (!(c.p > 0.0 && c.p <= 1.0)) throw DomainError("oracle: p must lie in (0, 1]");
    if (!(holding >= 0.0)) throw DomainError("oracle: holding cost must be >= 0");
    require_grid(grid);
    const HoldingModel M(c, beta, holding, grid);
    const auto& cs = c.costs;
    const double p = M.p;
    const std::size_t N = M.N, n = M.n, Qn = M.Qn;

    HoldingTable T;
    T.grid = grid;
    T.beta = beta;
    T.holding = holding;
    T.content = c;
    if (warm && warm->act1.size() == N && warm->actu.size() == Qn) {
        T.act1 = warm->act1;
        T.act0 = warm->act0;
        T.actu = warm->actu;
    } else {
        T.act1.assign(N, 1);
        T.act0.assign(N, 0);
        T.act0[n] = 2;
        T.actu.assign(Qn, 1);
    }
    T.hc1.assign(N, 0); T.hc0.assign(N, 0); T.mix.assign(N, 0); T.ahead.assign(N, 0);
    T.hu1.assign(Qn, 0); T.hu0.assign(Qn, 0);
    std::vector<double> eu(Qn, 0.0);

    using A4 = Aff<4>;  // (theta, L0, E0, 1)
    std::vector<A4> hc1A(N), hc0A(N), LA(N), hu1A(Qn), euA(Qn);

    auto evaluate = [&] {
        const double th = -1.0 / beta;
        const double idle = (1.0 - p) / (p * beta);
        for (std::size_t q = Qn; q-- > 0;) {
            A4 f{th, 0, 0, 0};
            switch (T.actu[q]) {
                case 1: f[3] += cs.c_f + holding / beta; f[1] += 1.0; break;
                case 2: f = axpy(1.0, euA[q + 1], f); f[3] += cs.c_w * (double(q) + 1.0) / beta; break;
                default: f[3] += cs.c_f; f[2] += 1.0;
            }
            hu1A[q] = f;
            euA[q] = f;
            euA[q][0] -= idle;
            euA[q][3] += idle * double(q) * cs.c_w;
        }
        A4 mNext{}, LNext{};
        for (std::size_t i = N; i-- > 0;) {
            const bool top = i == n;
            const double a = top ? 1.0 : M.K.a;
            const A4 B = top ? A4{} : axpy(M.K.b, mNext, axpy(M.K.r, LNext, A4{}));
            const double tau = grid.tau(i);
            A4 k1{th, 0, 0, 0}, k0{th, 0, 0, 0};
            double d1 = 0.0, d0 = 0.0;
            switch (T.act1[i]) {
                case 0: k1[3] += M.u * tau + holding / beta; d1 = 1.0; break;
                case 1: k1[3] += cs.c_f + holding / beta; k1[1] += 1.0; break;
                case 2: k1 = axpy(1.0, euA[1], k1); k1[3] += cs.c_w / beta; break;
                case 3: k1[3] += cs.c_f; k1[2] += 1.0; break;
                default: k1[3] += M.u * tau; k1[2] += 1.0;
            }
            if (T.act0[i] == 0) { k0[3] += holding / beta; d0 = 1.0; }
            else k0[2] += 1.0;
            const double cc = p * d1 + (1.0 - p) * d0;
            if (a * cc >= 1.0) throw InternalError("oracle: policy never leaves the top age");
            A4 L = axpy(a, axpy(p, k1, axpy(1.0 - p, k0, A4{})), B);
            for (auto& x : L) x /= (1.0 - a * cc);
            hc1A[i] = axpy(d1, L, k1);
            hc0A[i] = axpy(d0, L, k0);
            LA[i] = L;
            mNext = axpy(p, hc1A[i], axpy(1.0 - p, hc0A[i], A4{}));
            LNext = L;
        }
        // L(0) = L0, E_u(0) = E0, hc0(0) = 0.
        std::array<std::array<double, 3>, 3> Am{{
            {LA[0][0], LA[0][1] - 1.0, LA[0][2]},
            {euA[0][0], euA[0][1], euA[0][2] - 1.0},
            {hc0A[0][0], hc0A[0][1], hc0A[0][2]},
        }};
        auto z = solve3(Am, {-LA[0][3], -euA[0][3], -hc0A[0][3]});
        T.theta = z[0];
        T.reset_cached = z[1];
        T.reset_uncached = z[2];
        for (std::size_t i = 0; i < N; ++i) {
            T.hc1[i] = eval<4>(hc1A[i], z);
            T.hc0[i] = eval<4>(hc0A[i], z);
            T.ahead[i] = eval<4>(LA[i], z);
            T.mix[i] = p * T.hc1[i] + (1.0 - p) * T.hc0[i];
        }
        for (std::size_t q = 0; q < Qn; ++q) {
            T.hu1[q] = eval<4>(hu1A[q], z);
            eu[q] = eval<4>(euA[q], z);
            T.hu0[q] = (double(q) * cs.c_w - T.theta) / (p * beta) + T.hu1[q];
        }
    };

    auto improve = [&](std::uint8_t& act, const std::array<double, 5>& v) {
        std::uint8_t best = act;
        for (std::uint8_t k = 0; k < 5; ++k)
            if (v[k] < v[best] - M.tol) best = k;
        if (best == act) return false;
        act = best;
        return true;
    };

    bool stable = false;
    for (T.iterations = 1; T.iterations <= kMaxPolicyIterations; ++T.iterations) {
        evaluate();
        const double eu1 = Qn > 1 ? eu[1] : kInf;
        bool changed = false;
        for (std::size_t i = 0; i < N; ++i) {
            const bool top = i == n;
            changed |= improve(T.act1[i], cached_requested_values(M, grid.tau(i), T.ahead[i], T.reset_cached,
                                                                  T.reset_uncached, eu1, top));
            changed |= improve(T.act0[i], cached_idle_values(M, T.ahead[i], T.reset_uncached, top));
        }
        for (std::size_t q = 0; q < Qn; ++q)
            changed |= improve(T.actu[q], uncached_values(M, q, T.reset_cached, T.reset_uncached,
                                                          q + 1 < Qn ? eu[q + 1] : kInf));
        if (!changed) {
            stable = true;
            break;
        }
    }
    if (!stable) throw InternalError("oracle: policy iteration did not converge");

    // Final greedy (ties to the lowest code) and Bellman residual.
    const double eu1 = Qn > 1 ? eu[1] : kInf;
    const double th = T.theta / beta;
    T.residual = 0.0;
    auto settle = [&](std::uint8_t& act, const std::array<double, 5>& v, double h) {
        act = lowest_within(v, M.tol);
        T.residual = std::max(T.residual, std::abs(*std::min_element(v.begin(), v.end()) - th - h));
    };
    for (std::size_t i = 0; i < N; ++i) {
        const bool top = i == n;
        settle(T.act1[i], cached_requested_values(M, grid.tau(i), T.ahead[i], T.reset_cached, T.reset_uncached, eu1, top),
               T.hc1[i]);
        settle(T.act0[i], cached_idle_values(M, T.ahead[i], T.reset_uncached, top), T.hc0[i]);
    }
    for (std::size_t q = 0; q < Qn; ++q)
        settle(T.actu[q], uncached_values(M, q, T.reset_cached, T.reset_uncached, q + 1 < Qn ? eu[q + 1] : kInf),
               T.hu1[q]);
    for (std::size_t q = 0; q < Qn; ++q) {
        const double hu0 = (double(q) * cs.c_w) / beta - th + p * T.hu1[q] + (1.0 - p) * T.hu0[q];
        T.residual = std::max(T.residual, std::abs(hu0 - T.hu0[q]));
    }

    std::size_t i = 0;
    while (i < N && T.act0[i] == 0) ++i;
    T.tau_bar = i == 0 ? 0.0 : grid.tau(i - 1);
    std::size_t last = 0;
    bool any = false;
    for (std::size_t j = 0; j < N; ++j)
        if (T.act1[j] == 0 || T.act1[j] == 4) {
            last = j;
            any = true;
        }
    T.tau_tilde = any ? grid.tau(last) : 0.0;
    T.q_bar = grid.q_max;
    for (std::size_t q = 0; q < Qn; ++q)
        if (T.actu[q] == 1 || T.actu[q] == 3) {
            T.q_bar = q;
            break;
        }
    return T;
}

std::uint8_t HoldingTable::greedy(const SingleContentState& s) const {
    const HoldingModel M(content, beta, holding, grid);
    const std::size_t Qn = M.Qn;
    const double eu1 = Qn > 1 ? hu1[1] + (1.0 - M.p) * (content.costs.c_w - theta) / (M.p * beta) : kInf;
    auto eu = [&](std::size_t q) {
        return hu1[q] + (1.0 - M.p) * (double(q) * content.costs.c_w - theta) / (M.p * beta);
    };
    if (!s.cached) {
        if (!s.requested) return 255;
        const std::size_t q = std::min<std::size_t>(s.queue, Qn - 1);
        return lowest_within(uncached_values(M, q, reset_cached, reset_uncached, q + 1 < Qn ? eu(q + 1) : kInf), M.tol);
    }
    if (s.queue > 0) {
        if (!s.requested) return 2;
        return greedy(SingleContentState{s.queue, 0.0, false, true});
    }
    const bool top = s.tau >= grid.tau_max;
    double ahead_val = mix.back();
    if (!top) {
        const auto i = std::min<std::size_t>(static_cast<std::size_t>(s.tau / grid.tau_step), M.n - 1);
        const double slope = (mix[i + 1] - mix[i]) / grid.tau_step;
        const double f0 = mix[i] + slope * (s.tau - grid.tau(i));
        ahead_val = partial_expectation(beta, grid.tau(i + 1) - s.tau, f0, slope, ahead[i + 1]);
    }
    if (s.requested)
        return lowest_within(
            cached_requested_values(M, s.tau, ahead_val, reset_cached, reset_uncached, eu1, top), M.tol);
    return lowest_within(cached_idle_values(M, ahead_val, reset_uncached, top), M.tol);
}

bool HoldingTable::passive(const SingleContentState& s) const {
    const auto a = greedy(s);
    return a == 2 || a == 3 || a == 4 || a == 255;
}

std::vector<double> whittle_by_sweep(const ContentParams& c, double beta, const std::vector<SingleContentState>& states,
                                     const std::vector<double>& holding_grid, const Grid& grid) {
    auto hs = holding_grid;
    std::sort(hs.begin(), hs.end());
    std::vector<double> out(states.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> done(states.size(), false);
    std::size_t left = states.size();
    HoldingTable prev;
    bool have_prev = false;
    for (double h : hs) {
        if (left == 0) break;
        auto T = value_iterate_holding(c, beta, h, grid, have_prev ? &prev : nullptr);
        for (std::size_t k = 0; k < states.size(); ++k) {
            if (done[k] || !T.passive(states[k])) continue;
            out[k] = h;
            done[k] = true;
            --left;
        }
        prev = std::move(T);
        have_prev = true;
    }
    return out;
}

}  // namespace aov::oracle
