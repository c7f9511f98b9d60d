#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitdis/analyzer.hpp"
#include "bitdis/dynamics.hpp"

namespace bitdis {

namespace detail {

inline double log_binom_coeff(long m, long k) {
    return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
}

// log pmf of Binomial(m, q) over k = 0..m; point masses handled exactly.
inline std::vector<double> binomial_log_pmf(long m, double q) {
    std::vector<double> lp(static_cast<std::size_t>(m) + 1,
                           -std::numeric_limits<double>::infinity());
    if (m == 0) {
        lp[0] = 0.0;
        return lp;
    }
    if (q <= 0.0) {
        lp[0] = 0.0;
        return lp;
    }
    if (q >= 1.0) {
        lp[static_cast<std::size_t>(m)] = 0.0;
        return lp;
    }
    const double lq = std::log(q), l1q = std::log1p(-q);
    for (long k = 0; k <= m; ++k)
        lp[static_cast<std::size_t>(k)] = log_binom_coeff(m, k) + k * lq + (m - k) * l1q;
    return lp;
}

// Exact pmf of Binomial(m, q) with rational q.
inline std::vector<Rational> binomial_pmf_exact(long m, const Rational& q) {
    std::vector<Rational> pmf(static_cast<std::size_t>(m) + 1, Rational(0));
    if (m == 0) {
        pmf[0] = 1;
        return pmf;
    }
    const Rational r = 1 - q;
    for (long k = 0; k <= m; ++k)
        pmf[static_cast<std::size_t>(k)] =
            Rational(binom(m, k)) * rational_pow(q, k) * rational_pow(r, m - k);
    return pmf;
}

}  // namespace detail

// Exact pmf of the next aggregated count. Parallel rows are the convolution
// of the two per-opinion binomials shifted by z; sequential rows are the
// birth-death triple. Rational values are exact; double values go through
// log-space with compensated summation so far tails survive underflow.
inline std::vector<Rational> one_step_pmf_exact(const Protocol& p, const Configuration& c,
                                                Mode mode) {
    c.check();
    std::vector<Rational> pmf(static_cast<std::size_t>(c.n) + 1, Rational(0));
    const Rational P1 = adopt_prob_exact(p, 1, c.x, c.n);
    const Rational P0 = adopt_prob_exact(p, 0, c.x, c.n);
    if (mode == Mode::sequential) {
        const Rational ones(c.x - c.z), zeros(c.n - c.x - (1 - c.z)), pool(c.n - 1);
        const Rational up = zeros / pool * P0;
        const Rational down = ones / pool * (1 - P1);
        if (c.x > 0) pmf[static_cast<std::size_t>(c.x - 1)] += down;
        if (c.x < c.n) pmf[static_cast<std::size_t>(c.x + 1)] += up;
        pmf[static_cast<std::size_t>(c.x)] += 1 - up - down;
        return pmf;
    }
    const long m1 = c.x - c.z, m0 = c.n - c.x - (1 - c.z);
    const auto pmf1 = detail::binomial_pmf_exact(m1, P1);
    const auto pmf0 = detail::binomial_pmf_exact(m0, P0);
    for (long i = 0; i <= m1; ++i)
        for (long j = 0; j <= m0; ++j)
            pmf[static_cast<std::size_t>(c.z + i + j)] +=
                pmf1[static_cast<std::size_t>(i)] * pmf0[static_cast<std::size_t>(j)];
    return pmf;
}

inline std::vector<double> one_step_pmf(const Protocol& p, const Configuration& c, Mode mode) {
    c.check();
    std::vector<double> pmf(static_cast<std::size_t>(c.n) + 1, 0.0);
    const double P1 = adopt_prob(p, 1, c.x, c.n);
    const double P0 = adopt_prob(p, 0, c.x, c.n);
    if (mode == Mode::sequential) {
        const double ones = static_cast<double>(c.x - c.z);
        const double zeros = static_cast<double>(c.n - c.x - (1 - c.z));
        const double pool = static_cast<double>(c.n - 1);
        const double up = zeros / pool * P0;
        const double down = ones / pool * (1.0 - P1);
        if (c.x > 0) pmf[static_cast<std::size_t>(c.x - 1)] += down;
        if (c.x < c.n) pmf[static_cast<std::size_t>(c.x + 1)] += up;
        pmf[static_cast<std::size_t>(c.x)] += 1.0 - up - down;
        return pmf;
    }
    const long m1 = c.x - c.z, m0 = c.n - c.x - (1 - c.z);
    const auto lp1 = detail::binomial_log_pmf(m1, P1);
    const auto lp0 = detail::binomial_log_pmf(m0, P0);
    for (long s = 0; s <= m1 + m0; ++s) {
        const long ilo = std::max(0l, s - m0), ihi = std::min(m1, s);
        double mx = -std::numeric_limits<double>::infinity();
        for (long i = ilo; i <= ihi; ++i)
            mx = std::max(mx, lp1[static_cast<std::size_t>(i)] +
                                  lp0[static_cast<std::size_t>(s - i)]);
        if (mx == -std::numeric_limits<double>::infinity()) continue;
        double acc = 0.0, comp = 0.0;  // Kahan over the shifted terms
        for (long i = ilo; i <= ihi; ++i) {
            const double term = std::exp(lp1[static_cast<std::size_t>(i)] +
                                         lp0[static_cast<std::size_t>(s - i)] - mx);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        pmf[static_cast<std::size_t>(c.z + s)] = acc * std::exp(mx);
    }
    return pmf;
}

// Row-stochastic matrix of the aggregated chain over states x = 0..n for a
// fixed (protocol, z, mode). States that violate the configuration invariant
// (x = 0 with z = 1, x = n with z = 0) are unreachable; their row is a self
// loop so the matrix stays stochastic. Sequential matrices are tridiagonal.
struct TransitionMatrix {
    long n = 0;
    int z = 1;
    Mode mode = Mode::parallel;
    bool exact = false;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<Rational>> rows_q;

    long size() const { return n + 1; }
    bool valid_state(long x) const { return z == 1 ? x >= 1 : x <= n - 1; }
};

struct OracleCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default caps: the dense parallel matrix is O(n^2) memory (desk scale); the
// exact rational build is capped separately because the solve cost grows fast.
inline constexpr long kOracleMatrixCap = 4096;
inline constexpr long kOracleExactCap = 128;

inline TransitionMatrix exact_transition_matrix(const Protocol& p, long n, int z, Mode mode,
                                                long cap = kOracleMatrixCap) {
    if (n < 2) throw std::invalid_argument("exact_transition_matrix: n must be >= 2");
    if (n > cap)
        throw OracleCapError("exact_transition_matrix: n = " + std::to_string(n) +
                             " exceeds cap " + std::to_string(cap));
    TransitionMatrix m;
    m.n = n;
    m.z = z;
    m.mode = mode;
    m.exact = p.exact && n <= kOracleExactCap;
    m.rows.assign(static_cast<std::size_t>(n) + 1, {});
    if (m.exact) m.rows_q.assign(static_cast<std::size_t>(n) + 1, {});
    for (long x = 0; x <= n; ++x) {
        if (!m.valid_state(x)) {
            std::vector<double> self(static_cast<std::size_t>(n) + 1, 0.0);
            self[static_cast<std::size_t>(x)] = 1.0;
            m.rows[static_cast<std::size_t>(x)] = std::move(self);
            if (m.exact) {
                std::vector<Rational> selfq(static_cast<std::size_t>(n) + 1, Rational(0));
                selfq[static_cast<std::size_t>(x)] = 1;
                m.rows_q[static_cast<std::size_t>(x)] = std::move(selfq);
            }
            continue;
        }
        const Configuration c(n, z, x);
        if (m.exact) {
            auto rq = one_step_pmf_exact(p, c, mode);
            auto& rd = m.rows[static_cast<std::size_t>(x)];
            rd.resize(static_cast<std::size_t>(n) + 1);
            for (long j = 0; j <= n; ++j)
                rd[static_cast<std::size_t>(j)] = to_double(rq[static_cast<std::size_t>(j)]);
            m.rows_q[static_cast<std::size_t>(x)] = std::move(rq);
        } else {
            m.rows[static_cast<std::size_t>(x)] = one_step_pmf(p, c, mode);
        }
    }
    return m;
}

// Expected first-hit times to `target` from every state. States that cannot
// reach the target get an explicit infinity marker rather than a number.
struct HittingProfile {
    long target = 0;
    bool exact = false;
    std::vector<double> h;
    std::vector<std::uint8_t> infinite;
    std::vector<Rational> h_q;  // populated in exact mode
    double max_residual = 0.0;  // |(I-Q)h - 1|_inf over solved states (float mode)

    double at(long x) const { return h[static_cast<std::size_t>(x)]; }
    bool is_infinite(long x) const { return infinite[static_cast<std::size_t>(x)] != 0; }
};

namespace detail {

// States from which `target` is reachable, by reverse BFS over positive
// transition probabilities.
inline std::vector<std::uint8_t> reaches_target(const TransitionMatrix& m, long target) {
    const long N = m.size();
    std::vector<std::uint8_t> reach(static_cast<std::size_t>(N), 0);
    std::vector<long> stack{target};
    reach[static_cast<std::size_t>(target)] = 1;
    while (!stack.empty()) {
        const long j = stack.back();
        stack.pop_back();
        for (long i = 0; i < N; ++i) {
            if (reach[static_cast<std::size_t>(i)]) continue;
            if (m.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0) {
                reach[static_cast<std::size_t>(i)] = 1;
                stack.push_back(i);
            }
        }
    }
    return reach;
}

// Dense LU solve with partial pivoting, in place. a is row-major N x N.
inline std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b, long N) {
    std::vector<long> piv(static_cast<std::size_t>(N));
    for (long i = 0; i < N; ++i) piv[static_cast<std::size_t>(i)] = i;
    auto at = [&](long r, long c) -> double& { return a[static_cast<std::size_t>(r * N + c)]; };
    for (long k = 0; k < N; ++k) {
        long best = k;
        for (long i = k + 1; i < N; ++i)
            if (std::fabs(at(i, k)) > std::fabs(at(best, k))) best = i;
        if (at(best, k) == 0.0) throw std::runtime_error("lu_solve: singular system");
        if (best != k) {
            for (long c = 0; c < N; ++c) std::swap(at(best, c), at(k, c));
            std::swap(b[static_cast<std::size_t>(best)], b[static_cast<std::size_t>(k)]);
        }
        for (long i = k + 1; i < N; ++i) {
            const double f = at(i, k) / at(k, k);
            at(i, k) = 0.0;
            if (f == 0.0) continue;
            for (long c = k + 1; c < N; ++c) at(i, c) -= f * at(k, c);
            b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(k)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(N));
    for (long i = N - 1; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (long c = i + 1; c < N; ++c) s -= at(i, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    return x;
}

// Exact Gaussian elimination over the rationals.
inline std::vector<Rational> rational_solve(std::vector<Rational> a, std::vector<Rational> b,
                                            long N) {
    auto at = [&](long r, long c) -> Rational& { return a[static_cast<std::size_t>(r * N + c)]; };
    for (long k = 0; k < N; ++k) {
        long piv = -1;
        for (long i = k; i < N; ++i)
            if (at(i, k) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) throw std::runtime_error("rational_solve: singular system");
        if (piv != k) {
            for (long c = k; c < N; ++c) std::swap(at(piv, c), at(k, c));
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(k)]);
        }
        for (long i = k + 1; i < N; ++i) {
            if (at(i, k) == 0) continue;
            const Rational f = at(i, k) / at(k, k);
            at(i, k) = 0;
            for (long c = k + 1; c < N; ++c) at(i, c) -= f * at(k, c);
            b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(k)];
        }
    }
    std::vector<Rational> x(static_cast<std::size_t>(N), Rational(0));
    for (long i = N - 1; i >= 0; --i) {
        Rational s = b[static_cast<std::size_t>(i)];
        for (long c = i + 1; c < N; ++c) s -= at(i, c) * x[static_cast<std::size_t>(c)];
        x[static_cast<std::size_t>(i)] = s / at(i, i);
    }
    return x;
}

}  // namespace detail

// Solves the first-step system h(target) = 0, h(i) = 1 + sum_j P(i,j) h(j)
// restricted to states that can reach the target. Exact rational solve when
// the matrix is exact, dense LU otherwise (Thomas-style banded structure is
// not exploited; sequential systems are small enough at desk scale).
inline HittingProfile expected_hitting_time(const TransitionMatrix& m, long target) {
    if (target < 0 || target > m.n)
        throw std::invalid_argument("expected_hitting_time: target outside state space");
    const long N = m.size();
    HittingProfile out;
    out.target = target;
    out.exact = m.exact;
    out.h.assign(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
    out.infinite.assign(static_cast<std::size_t>(N), 1);
    if (m.exact) out.h_q.assign(static_cast<std::size_t>(N), Rational(0));

    const auto reach = detail::reaches_target(m, target);
    std::vector<long> solve_states;
    for (long i = 0; i < N; ++i)
        if (reach[static_cast<std::size_t>(i)] && i != target) solve_states.push_back(i);
    out.h[static_cast<std::size_t>(target)] = 0.0;
    out.infinite[static_cast<std::size_t>(target)] = 0;
    if (solve_states.empty()) return out;

    std::vector<long> pos(static_cast<std::size_t>(N), -1);
    for (std::size_t s = 0; s < solve_states.size(); ++s)
        pos[static_cast<std::size_t>(solve_states[s])] = static_cast<long>(s);
    const long S = static_cast<long>(solve_states.size());

    if (m.exact) {
        std::vector<Rational> A(static_cast<std::size_t>(S * S), Rational(0));
        std::vector<Rational> b(static_cast<std::size_t>(S), Rational(1));
        for (long r = 0; r < S; ++r) {
            const long i = solve_states[static_cast<std::size_t>(r)];
            const auto& row = m.rows_q[static_cast<std::size_t>(i)];
            for (long j = 0; j < N; ++j) {
                const long cpos = pos[static_cast<std::size_t>(j)];
                if (cpos < 0) continue;
                A[static_cast<std::size_t>(r * S + cpos)] =
                    (r == cpos ? Rational(1) : Rational(0)) - row[static_cast<std::size_t>(j)];
            }
        }
        auto x = detail::rational_solve(std::move(A), std::move(b), S);
        for (long r = 0; r < S; ++r) {
            const long i = solve_states[static_cast<std::size_t>(r)];
            out.h_q[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(r)];
            out.h[static_cast<std::size_t>(i)] = to_double(x[static_cast<std::size_t>(r)]);
            out.infinite[static_cast<std::size_t>(i)] = 0;
        }
        return out;
    }

    std::vector<double> A(static_cast<std::size_t>(S * S), 0.0);
    std::vector<double> b(static_cast<std::size_t>(S), 1.0);
    for (long r = 0; r < S; ++r) {
        const long i = solve_states[static_cast<std::size_t>(r)];
        const auto& row = m.rows[static_cast<std::size_t>(i)];
        for (long j = 0; j < N; ++j) {
            const long cpos = pos[static_cast<std::size_t>(j)];
            if (cpos < 0) continue;
            A[static_cast<std::size_t>(r * S + cpos)] = -row[static_cast<std::size_t>(j)];
        }
        A[static_cast<std::size_t>(r * S + r)] += 1.0;
    }
    auto x = detail::lu_solve(A, b, S);
    // Residual check against the untouched matrix rows.
    double resid = 0.0;
    for (long r = 0; r < S; ++r) {
        const long i = solve_states[static_cast<std::size_t>(r)];
        const auto& row = m.rows[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (long j = 0; j < N; ++j) {
            const long cpos = pos[static_cast<std::size_t>(j)];
            if (cpos < 0) continue;
            s += row[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(cpos)];
        }
        const double lhs = x[static_cast<std::size_t>(r)] - s;
        resid = std::max(resid, std::fabs(lhs - 1.0) / std::max(1.0, std::fabs(x[static_cast<std::size_t>(r)])));
    }
    out.max_residual = resid;
    for (long r = 0; r < S; ++r) {
        const long i = solve_states[static_cast<std::size_t>(r)];
        out.h[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(r)];
        out.infinite[static_cast<std::size_t>(i)] = 0;
    }
    return out;
}

// First-hit-time distribution Pr[tau = t] for t = 0..horizon from x0, plus
// the survivor mass at the horizon in the last slot semantics of the caller.
struct FirstHitDistribution {
    std::vector<double> pmf;  // pmf[t] = Pr[tau = t], t <= horizon
    double survivor = 0.0;    // Pr[tau > horizon]
};

inline FirstHitDistribution first_hit_distribution(const TransitionMatrix& m, long x0,
                                                   long target, long horizon) {
    if (x0 < 0 || x0 > m.n || target < 0 || target > m.n)
        throw std::invalid_argument("first_hit_distribution: state outside space");
    const long N = m.size();
    FirstHitDistribution out;
    out.pmf.assign(static_cast<std::size_t>(horizon) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(N), 0.0);
    if (x0 == target) {
        out.pmf[0] = 1.0;
        return out;
    }
    v[static_cast<std::size_t>(x0)] = 1.0;
    for (long t = 1; t <= horizon; ++t) {
        std::vector<double> w(static_cast<std::size_t>(N), 0.0);
        for (long i = 0; i < N; ++i) {
            const double vi = v[static_cast<std::size_t>(i)];
            if (vi == 0.0) continue;
            const auto& row = m.rows[static_cast<std::size_t>(i)];
            for (long j = 0; j < N; ++j) w[static_cast<std::size_t>(j)] += vi * row[static_cast<std::size_t>(j)];
        }
        out.pmf[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(target)];
        w[static_cast<std::size_t>(target)] = 0.0;
        v = std::move(w);
    }
    for (double vi : v) out.survivor += vi;
    return out;
}

}  // namespace bitdis
