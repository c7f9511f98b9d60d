#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitdis/rng.hpp"

namespace bitdis {

namespace detail {
// Stream tags for per-round sample regeneration and initial-bit placement.
inline constexpr std::uint64_t kDualRoundTag = 0x726f756e64ull;  // "round"
inline constexpr std::uint64_t kDualInitTag = 0x696e6974ull;     // "init"
}  // namespace detail

// A Voter (ell = 1) run recorded for dual-process replay. Agent 0 is the
// source; its recorded sample is itself in every round (the self-loop
// convention that turns the source into a sink for the backward walks).
// Each round draws its samples from an independently seeded generator, so a
// record above the memory cap stores nothing and regenerates any round on
// demand — forward pass and backward replay see identical randomness either way.
struct VoterRunRecord {
    long n = 0;
    long horizon = 0;
    int z = 1;
    std::uint64_t seed = 0;
    std::vector<std::uint8_t> init_bits;
    std::vector<std::uint8_t> final_bits;
    bool materialized = true;
    std::vector<std::uint32_t> samples;  // [t*n + i] when materialized

    std::uint32_t sample_at(long t, long i) const {
        return samples[static_cast<std::size_t>(t * n + i)];
    }

    std::vector<std::uint32_t> round_samples(long t) const {
        if (t < 0 || t >= horizon)
            throw std::invalid_argument("round_samples: round outside the recorded horizon");
        if (materialized)
            return {samples.begin() + t * n, samples.begin() + (t + 1) * n};
        std::vector<std::uint32_t> row(static_cast<std::size_t>(n));
        Rng rng = make_rng(derive_seed(seed, detail::kDualRoundTag, static_cast<std::uint64_t>(t)));
        row[0] = 0;
        for (long i = 1; i < n; ++i)
            row[static_cast<std::size_t>(i)] =
                static_cast<std::uint32_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
        return row;
    }
};

inline constexpr std::size_t kDefaultRecordCapEntries = std::size_t(1) << 24;

// Runs the Voter dynamics with ell = 1 for exactly `horizon` rounds from a
// uniformly shuffled initial configuration with x0 ones (source included),
// recording every sample. With ell = 1 the update is a pure copy of the
// sampled opinion, so the whole trajectory is a deterministic function of
// the samples.
inline VoterRunRecord record_voter_run(long n, int z, long x0, long horizon,
                                       std::uint64_t seed,
                                       std::size_t cap_entries = kDefaultRecordCapEntries) {
    if (n < 1) throw std::invalid_argument("record_voter_run: n must be >= 1");
    if (z != 0 && z != 1) throw std::invalid_argument("record_voter_run: z must be 0 or 1");
    if (x0 < z || x0 > n - 1 + z)
        throw std::invalid_argument("record_voter_run: x0 incompatible with z");
    VoterRunRecord rec;
    rec.n = n;
    rec.horizon = horizon;
    rec.z = z;
    rec.seed = seed;
    rec.materialized =
        static_cast<std::size_t>(n) * static_cast<std::size_t>(horizon) <= cap_entries;

    // Uniformly random placement of the x0 - z non-source ones.
    rec.init_bits.assign(static_cast<std::size_t>(n), 0);
    rec.init_bits[0] = static_cast<std::uint8_t>(z);
    {
        Rng rng = make_rng(derive_seed(seed, detail::kDualInitTag));
        std::vector<long> pool;
        pool.reserve(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
        for (long i = 1; i < n; ++i) pool.push_back(i);
        const long remaining = x0 - z;
        for (long k = 0; k < remaining; ++k) {
            const long span = static_cast<long>(pool.size()) - k;
            const long j = k + static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(span)));
            std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
            rec.init_bits[static_cast<std::size_t>(pool[static_cast<std::size_t>(k)])] = 1;
        }
    }

    if (rec.materialized) rec.samples.reserve(static_cast<std::size_t>(n * horizon));
    std::vector<std::uint8_t> bits = rec.init_bits;
    std::vector<std::uint8_t> next(bits.size());
    for (long t = 0; t < horizon; ++t) {
        Rng rng = make_rng(derive_seed(seed, detail::kDualRoundTag, static_cast<std::uint64_t>(t)));
        next[0] = bits[0];  // source self-loop
        if (rec.materialized) rec.samples.push_back(0);
        for (long i = 1; i < n; ++i) {
            const auto s = static_cast<std::uint32_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
            if (rec.materialized) rec.samples.push_back(s);
            next[static_cast<std::size_t>(i)] = bits[s];
        }
        std::swap(bits, next);
    }
    rec.final_bits = std::move(bits);
    return rec;
}

// Backward coalescing walks on a recorded run: W_T(i) = i and
// W_t(i) = S_t(W_{t+1}(i)). The source index 0 is a sink. Positions are kept
// for every t so the sink and recursion invariants can be audited directly.
struct DualTrace {
    long n = 0;
    long horizon = 0;
    std::vector<std::uint32_t> pos;  // (horizon+1) x n, row t = positions at time t

    std::uint32_t at(long t, long i) const {
        return pos[static_cast<std::size_t>(t * n + i)];
    }
    // Walk i reached the source at some time t <= horizon.
    bool coalesced(long i) const {
        return at(0, i) == 0;  // sink: once at 0, stays 0 down to t = 0
    }
    long coalesced_count() const {
        long c = 0;
        for (long i = 0; i < n; ++i) c += coalesced(i) ? 1 : 0;
        return c;
    }
};

inline DualTrace backward_walks(const VoterRunRecord& rec, long horizon) {
    if (horizon > rec.horizon)
        throw std::invalid_argument("backward_walks: record shorter than requested horizon");
    if (horizon < 0) throw std::invalid_argument("backward_walks: negative horizon");
    DualTrace d;
    d.n = rec.n;
    d.horizon = horizon;
    d.pos.assign(static_cast<std::size_t>((horizon + 1) * rec.n), 0);
    for (long i = 0; i < rec.n; ++i)
        d.pos[static_cast<std::size_t>(horizon * rec.n + i)] = static_cast<std::uint32_t>(i);
    for (long t = horizon - 1; t >= 0; --t) {
        const auto row = rec.round_samples(t);
        for (long i = 0; i < rec.n; ++i) {
            const std::uint32_t cur = d.pos[static_cast<std::size_t>((t + 1) * rec.n + i)];
            d.pos[static_cast<std::size_t>(t * rec.n + i)] = row[cur];
        }
    }
    return d;
}

// Audit of the coupling guarantees on a (record, walks) pair built from the
// same randomness:
//  - sink: a walk at the source stays there for all earlier times;
//  - recursion: each backward step follows the recorded sample;
//  - implication: a coalesced walk means its agent holds z at the horizon.
// Any nonzero counter is a bug, not noise.
struct DualCheckReport {
    long walks_checked = 0;
    long coalesced = 0;
    long implication_violations = 0;
    long sink_violations = 0;
    long recursion_violations = 0;

    bool ok() const {
        return implication_violations == 0 && sink_violations == 0 && recursion_violations == 0;
    }
};

inline DualCheckReport verify_dual_implication(const VoterRunRecord& rec, const DualTrace& d) {
    if (rec.n != d.n) throw std::invalid_argument("verify_dual_implication: mismatched records");
    if (d.horizon != rec.horizon)
        throw std::invalid_argument("verify_dual_implication: walks horizon differs from record");
    DualCheckReport rep;
    for (long t = d.horizon - 1; t >= 0; --t) {
        const auto row = rec.round_samples(t);
        for (long i = 0; i < d.n; ++i) {
            const std::uint32_t up = d.at(t + 1, i);
            const std::uint32_t here = d.at(t, i);
            if (here != row[up]) ++rep.recursion_violations;
            if (up == 0 && here != 0) ++rep.sink_violations;
        }
    }
    for (long i = 0; i < d.n; ++i) {
        ++rep.walks_checked;
        if (!d.coalesced(i)) continue;
        ++rep.coalesced;
        if (rec.final_bits[static_cast<std::size_t>(i)] != rec.z) ++rep.implication_violations;
    }
    return rep;
}

// Empirical distribution of the number of backward steps until every walk
// sits at the source. Walks absorb more as the horizon grows, so the record
// is taken well past the point where coalescence is overwhelmingly likely;
// runs that still have free walks are reported censored.
struct CoalescenceSummary {
    long trials = 0;
    long censored = 0;
    std::vector<double> times;  // coalescence times of uncensored runs
    double mean = 0.0;
    double median = 0.0;
    double q90 = 0.0;
};

inline long coalescence_steps(const VoterRunRecord& rec, const DualTrace& d) {
    // Largest t with all walks at the source; coalescence took horizon - t steps.
    for (long t = d.horizon; t >= 0; --t) {
        bool all = true;
        for (long i = 0; i < d.n && all; ++i) all = d.at(t, i) == 0;
        if (all) return d.horizon - t;
    }
    return -1;  // not coalesced within the horizon
}

}  // namespace bitdis
