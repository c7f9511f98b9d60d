#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitdis/binomial.hpp"
#include "bitdis/protocol.hpp"
#include "bitdis/rng.hpp"

namespace bitdis {

enum class Mode { parallel, sequential };

inline const char* to_string(Mode m) { return m == Mode::parallel ? "parallel" : "sequential"; }

inline Mode mode_from_name(const std::string& s) {
    if (s == "parallel") return Mode::parallel;
    if (s == "sequential") return Mode::sequential;
    throw std::invalid_argument("unknown mode: '" + s + "'");
}

// Aggregated system state: population n, the source's (correct) opinion z,
// and the number x of agents currently holding opinion 1. The source is
// included in x, so z = 1 forces x >= 1 and z = 0 forces x <= n-1.
struct Configuration {
    long n = 2;
    int z = 1;
    long x = 1;

    Configuration() = default;
    Configuration(long n_, int z_, long x_) : n(n_), z(z_), x(x_) { check(); }

    void check() const {
        if (n < 2) throw std::invalid_argument("configuration: n must be >= 2");
        if (z != 0 && z != 1) throw std::invalid_argument("configuration: z must be 0 or 1");
        if (x < 0 || x > n) throw std::invalid_argument("configuration: x outside [0, n]");
        if (z == 1 && x < 1) throw std::invalid_argument("configuration: z=1 requires x >= 1");
        if (z == 0 && x > n - 1)
            throw std::invalid_argument("configuration: z=0 requires x <= n-1");
    }

    bool at_consensus() const { return x == n * z; }
};

// Probability that an agent with opinion `own` adopts opinion 1 when the
// global count is x out of n: E[g_own(K)] with K ~ Binomial(ell, x/n).
// Terms are assembled in log space so large ell and extreme x stay stable.
inline double adopt_prob(const Protocol& p, int own, long x, long n) {
    if (x < 0 || x > n) throw std::invalid_argument("adopt_prob: x outside [0, n]");
    const double q = static_cast<double>(x) / static_cast<double>(n);
    if (x == 0) return own ? p.g1_at(0) : p.g0_at(0);
    if (x == n) return own ? p.g1_at(p.ell) : p.g0_at(p.ell);
    const double lq = std::log(q);
    const double l1q = std::log1p(-q);
    double maxlog = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(p.ell) + 1);
    for (long k = 0; k <= p.ell; ++k) {
        const double lb = std::lgamma(p.ell + 1.0) - std::lgamma(k + 1.0) -
                          std::lgamma(p.ell - k + 1.0);
        logs[static_cast<std::size_t>(k)] = lb + k * lq + (p.ell - k) * l1q;
        maxlog = std::max(maxlog, logs[static_cast<std::size_t>(k)]);
    }
    double acc = 0.0, comp = 0.0;  // Kahan
    for (long k = 0; k <= p.ell; ++k) {
        const double g = own ? p.g1_at(k) : p.g0_at(k);
        if (g == 0.0) continue;
        const double term = g * std::exp(logs[static_cast<std::size_t>(k)] - maxlog);
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return std::clamp(acc * std::exp(maxlog), 0.0, 1.0);
}

// Per-(protocol, n) cache of both adoption probabilities for every count x.
// Steppers in hot loops take this instead of recomputing O(ell) sums.
struct AdoptTable {
    long n = 0;
    std::vector<double> p0, p1;

    static AdoptTable build(const Protocol& p, long n) {
        AdoptTable t;
        t.n = n;
        t.p0.resize(static_cast<std::size_t>(n) + 1);
        t.p1.resize(static_cast<std::size_t>(n) + 1);
        for (long x = 0; x <= n; ++x) {
            t.p0[static_cast<std::size_t>(x)] = adopt_prob(p, 0, x, n);
            t.p1[static_cast<std::size_t>(x)] = adopt_prob(p, 1, x, n);
        }
        return t;
    }
};

// One parallel round on the aggregated count. There are x-z non-source agents
// at opinion 1 and n-x-(1-z) at opinion 0; each group flips independently, so
//   x' = z + Binomial(x-z, P1) + Binomial(n-x-(1-z), P0).
// Exact in law versus the agent-level stepper because agents are
// exchangeable and updates depend only on x.
inline Configuration step_parallel(const Configuration& c, const AdoptTable& t, Rng& rng) {
    const long ones = c.x - c.z;
    const long zeros = c.n - c.x - (1 - c.z);
    const long stay = sample_binomial(rng, ones, t.p1[static_cast<std::size_t>(c.x)]);
    const long join = sample_binomial(rng, zeros, t.p0[static_cast<std::size_t>(c.x)]);
    Configuration out = c;
    out.x = c.z + stay + join;
    return out;
}

inline Configuration step_parallel(const Configuration& c, const Protocol& p, Rng& rng) {
    c.check();
    const long ones = c.x - c.z;
    const long zeros = c.n - c.x - (1 - c.z);
    const long stay = sample_binomial(rng, ones, adopt_prob(p, 1, c.x, c.n));
    const long join = sample_binomial(rng, zeros, adopt_prob(p, 0, c.x, c.n));
    Configuration out = c;
    out.x = c.z + stay + join;
    return out;
}

// Full per-agent state; index 0 is the source and always holds z.
struct AgentState {
    std::vector<std::uint8_t> bits;
    int z = 1;

    long n() const { return static_cast<long>(bits.size()); }
    long count_ones() const {
        long c = 0;
        for (auto b : bits) c += b;
        return c;
    }
    void check() const {
        if (bits.size() < 2) throw std::invalid_argument("agent state: n must be >= 2");
        if (bits[0] != z) throw std::invalid_argument("agent state: source must hold z");
    }

    // Deterministic realization of an aggregated configuration: the source
    // plus the first x-z non-source agents hold opinion 1. Exchangeability
    // makes the aggregated law independent of the placement.
    static AgentState from_configuration(const Configuration& c) {
        c.check();
        AgentState s;
        s.z = c.z;
        s.bits.assign(static_cast<std::size_t>(c.n), 0);
        s.bits[0] = static_cast<std::uint8_t>(c.z);
        long remaining = c.x - c.z;
        for (long i = 1; i < c.n && remaining > 0; ++i, --remaining) s.bits[static_cast<std::size_t>(i)] = 1;
        return s;
    }
};

// Indices sampled by every agent in every recorded round, flattened as
// [round][agent][slot]. The source's slots hold its own index (it never
// samples; the self-loop convention keeps replay uniform).
struct SampleRecord {
    long n = 0;
    long ell = 1;
    long rounds = 0;
    std::vector<std::uint32_t> idx;

    std::uint32_t at(long t, long agent, long slot) const {
        return idx[static_cast<std::size_t>((t * n + agent) * ell + slot)];
    }
    long count_ones_in_sample(long t, long agent, const std::vector<std::uint8_t>& bits) const {
        long k = 0;
        for (long j = 0; j < ell; ++j) k += bits[at(t, agent, j)];
        return k;
    }
};

// One parallel round at agent level: every non-source agent draws ell indices
// uniformly with replacement from all n agents (itself and the source
// included), counts ones in the old state, then adopts 1 with probability
// g_own(k). Optionally appends this round's samples to `record`.
inline AgentState step_parallel_agentwise(const AgentState& s, const Protocol& p, Rng& rng,
                                          SampleRecord* record = nullptr) {
    s.check();
    const long n = s.n();
    AgentState next = s;
    std::vector<double> g0d(static_cast<std::size_t>(p.ell) + 1), g1d(g0d.size());
    for (long k = 0; k <= p.ell; ++k) {
        g0d[static_cast<std::size_t>(k)] = p.g0_at(k);
        g1d[static_cast<std::size_t>(k)] = p.g1_at(k);
    }
    if (record != nullptr) {
        if (record->rounds == 0) {
            record->n = n;
            record->ell = p.ell;
        } else if (record->n != n || record->ell != p.ell) {
            throw std::invalid_argument("sample record shape mismatch");
        }
    }
    std::vector<std::uint32_t> row;
    for (long i = 0; i < n; ++i) {
        if (i == 0) {
            if (record != nullptr)
                for (long j = 0; j < p.ell; ++j) record->idx.push_back(0);
            continue;  // the source keeps z
        }
        long k = 0;
        if (record != nullptr) {
            for (long j = 0; j < p.ell; ++j) {
                const auto idx = static_cast<std::uint32_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
                record->idx.push_back(idx);
                k += s.bits[idx];
            }
        } else {
            for (long j = 0; j < p.ell; ++j)
                k += s.bits[uniform_below(rng, static_cast<std::uint64_t>(n))];
        }
        const double g = s.bits[static_cast<std::size_t>(i)] ? g1d[static_cast<std::size_t>(k)]
                                                             : g0d[static_cast<std::size_t>(k)];
        next.bits[static_cast<std::size_t>(i)] = bernoulli(rng, g) ? 1 : 0;
    }
    if (record != nullptr) record->rounds += 1;
    return next;
}

// One activation of the sequential setting: a uniformly chosen non-source
// agent resamples and updates; |x' - x| <= 1 by construction. Aggregated-
// exact: the activated agent holds opinion 1 with probability (x-z)/(n-1).
inline Configuration step_sequential(const Configuration& c, const AdoptTable& t, Rng& rng) {
    const long ones = c.x - c.z;
    const bool holds_one =
        static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(c.n - 1))) < ones;
    const double adopt =
        holds_one ? t.p1[static_cast<std::size_t>(c.x)] : t.p0[static_cast<std::size_t>(c.x)];
    const bool next_one = bernoulli(rng, adopt);
    Configuration out = c;
    out.x = c.x - (holds_one ? 1 : 0) + (next_one ? 1 : 0);
    return out;
}

inline Configuration step_sequential(const Configuration& c, const Protocol& p, Rng& rng) {
    c.check();
    if (c.n < 2) throw std::invalid_argument("step_sequential: n must be >= 2");
    const long ones = c.x - c.z;
    const bool holds_one =
        static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(c.n - 1))) < ones;
    const double adopt = adopt_prob(p, holds_one ? 1 : 0, c.x, c.n);
    const bool next_one = bernoulli(rng, adopt);
    Configuration out = c;
    out.x = c.x - (holds_one ? 1 : 0) + (next_one ? 1 : 0);
    return out;
}

struct Trace {
    Mode mode = Mode::parallel;
    std::vector<long> xs;  // x_0, x_1, ...
};

enum class CensorReason { none, max_rounds, not_well_formed };

// Outcome of a run. tau is the first step index with x = n*z; for protocols
// that are not well-formed consensus is not absorbing, so tau is reported as
// censored no matter what the trajectory did. In sequential mode steps are
// activations and parallel_rounds = activations / n; in parallel mode one
// step is one round and counts as n activations.
struct RunOutcome {
    bool converged = false;
    CensorReason censored = CensorReason::none;
    unsigned long long tau = 0;             // valid when converged
    unsigned long long steps_executed = 0;  // rounds (parallel) or activations (sequential)
    unsigned long long activations = 0;
    double parallel_rounds = 0.0;
    Configuration final_config;
};

inline unsigned long long default_max_rounds(long n, Mode mode) {
    const auto log2n = static_cast<unsigned long long>(std::ceil(std::log2(static_cast<double>(n))));
    const unsigned long long parallel = 64ull * static_cast<unsigned long long>(n) * std::max(1ull, log2n);
    return mode == Mode::parallel ? parallel : parallel * static_cast<unsigned long long>(n);
}

inline RunOutcome run_until_consensus(const Configuration& c0, const Protocol& p, Mode mode,
                                      unsigned long long max_rounds, Rng& rng,
                                      Trace* trace = nullptr,
                                      const AdoptTable* cached = nullptr) {
    c0.check();
    if (max_rounds == 0) throw std::invalid_argument("run_until_consensus: max_rounds must be > 0");
    const bool well_formed = validate(p).is_well_formed;

    AdoptTable local;
    if (cached == nullptr) {
        local = AdoptTable::build(p, c0.n);
        cached = &local;
    } else if (cached->n != c0.n) {
        throw std::invalid_argument("run_until_consensus: cached table built for a different n");
    }

    RunOutcome out;
    out.final_config = c0;
    if (trace != nullptr) {
        trace->mode = mode;
        trace->xs.clear();
        trace->xs.push_back(c0.x);
    }

    Configuration c = c0;
    unsigned long long t = 0;
    for (; t < max_rounds; ++t) {
        if (well_formed && c.at_consensus()) break;
        c = mode == Mode::parallel ? step_parallel(c, *cached, rng)
                                   : step_sequential(c, *cached, rng);
        if (trace != nullptr) trace->xs.push_back(c.x);
    }
    out.final_config = c;
    out.steps_executed = t;
    if (well_formed && c.at_consensus()) {
        out.converged = true;
        out.tau = t;
    } else {
        out.censored = well_formed ? CensorReason::max_rounds : CensorReason::not_well_formed;
    }
    if (mode == Mode::parallel) {
        out.activations = t * static_cast<unsigned long long>(c0.n);
        out.parallel_rounds = static_cast<double>(t);
    } else {
        out.activations = t;
        out.parallel_rounds = static_cast<double>(t) / static_cast<double>(c0.n);
    }
    return out;
}

}  // namespace bitdis
