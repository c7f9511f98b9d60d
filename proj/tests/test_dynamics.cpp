#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "bitdis/dynamics.hpp"
#include "bitdis/oracle.hpp"
#include "bitdis/stats.hpp"

using namespace bitdis;

TEST_CASE("adopt_prob closed-form checks") {
    const Protocol voter = builtin(Builtin::voter, 1);
    REQUIRE(adopt_prob(voter, 0, 3, 10) == Catch::Approx(0.3).margin(1e-15));
    REQUIRE(adopt_prob(voter, 1, 3, 10) == Catch::Approx(0.3).margin(1e-15));

    // Well-formed protocol at x=0 with own opinion 0: only k=0 survives.
    const Protocol m3 = builtin(Builtin::minority, 3);
    REQUIRE(adopt_prob(m3, 0, 0, 64) == 0.0);
    // Minority ell=3 at x = n/2: 3p(1-p)^2 + p^3 at p=1/2 is 1/2.
    REQUIRE(adopt_prob(m3, 0, 32, 64) == Catch::Approx(0.5).margin(1e-13));
    REQUIRE(adopt_prob(m3, 1, 32, 64) == Catch::Approx(0.5).margin(1e-13));

    // Double path against the exact rational value on a grid.
    for (long x : {1l, 7l, 19l, 40l, 63l})
        REQUIRE(adopt_prob(m3, 0, x, 64) ==
                Catch::Approx(to_double(adopt_prob_exact(m3, 0, x, 64))).margin(1e-12));
}

TEST_CASE("adopt_prob is stable for large ell") {
    const Protocol big = builtin(Builtin::minority, 399);
    const long n = 16384;
    for (long x : {1l, n / 10, n / 2, 9 * n / 10, n - 1}) {
        const double v = adopt_prob(big, 0, x, n);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        REQUIRE(std::isfinite(v));
    }
    // Far below the tie point nearly every sample sees a 1-minority.
    REQUIRE(adopt_prob(big, 0, n / 4, n) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("consensus is absorbing under well-formed protocols") {
    Rng rng = make_rng(5);
    for (long ell : {1l, 3l}) {
        const Protocol p = builtin(Builtin::minority, ell);
        const Configuration top(12, 1, 12);
        const Configuration bottom(12, 0, 0);
        for (int i = 0; i < 200; ++i) {
            REQUIRE(step_parallel(top, p, rng).x == 12);
            REQUIRE(step_parallel(bottom, p, rng).x == 0);
            REQUIRE(step_sequential(top, p, rng).x == 12);
            REQUIRE(step_sequential(bottom, p, rng).x == 0);
        }
    }
}

TEST_CASE("voter n=2 single-agent step law") {
    // z=1, x=1: the unique non-source agent adopts 1 with probability 1/2.
    const Protocol voter = builtin(Builtin::voter, 1);
    Rng rng = make_rng(17);
    long to2 = 0;
    const long trials = 100000;
    for (long i = 0; i < trials; ++i) {
        const auto c = step_parallel(Configuration(2, 1, 1), voter, rng);
        REQUIRE((c.x == 1 || c.x == 2));
        to2 += c.x == 2 ? 1 : 0;
    }
    const double frac = static_cast<double>(to2) / static_cast<double>(trials);
    REQUIRE(std::fabs(frac - 0.5) < 4.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("voter n=3 step law matches the exact pmf") {
    const Protocol voter = builtin(Builtin::voter, 1);
    // z=1, x=1: x' = 1 + Binomial(2, 1/3) -> {1: 4/9, 2: 4/9, 3: 1/9}
    const auto pmf = one_step_pmf_exact(voter, Configuration(3, 1, 1), Mode::parallel);
    REQUIRE(pmf[1] == Rational(4, 9));
    REQUIRE(pmf[2] == Rational(4, 9));
    REQUIRE(pmf[3] == Rational(1, 9));

    Rng rng = make_rng(18);
    std::vector<double> counts(4, 0.0);
    const long trials = 100000;
    for (long i = 0; i < trials; ++i)
        counts[static_cast<std::size_t>(step_parallel(Configuration(3, 1, 1), voter, rng).x)] += 1.0;
    std::vector<double> probs(4, 0.0);
    for (int j = 0; j <= 3; ++j) probs[static_cast<std::size_t>(j)] = to_double(pmf[static_cast<std::size_t>(j)]);
    REQUIRE(chi_square_gof(counts, probs, trials).p_value > 1e-4);
}

TEST_CASE("sequential step moves by at most one") {
    Rng rng = make_rng(23);
    const Protocol m3 = builtin(Builtin::minority, 3);
    Configuration c(32, 1, 9);
    for (int i = 0; i < 5000; ++i) {
        const Configuration next = step_sequential(c, m3, rng);
        REQUIRE(std::labs(next.x - c.x) <= 1);
        c = next;
        if (c.at_consensus()) c = Configuration(32, 1, 9);
    }
}

TEST_CASE("agent-level stepper matches the aggregated pmf (minority ell=3, n=8)") {
    const Protocol m3 = builtin(Builtin::minority, 3);
    const Configuration c(8, 1, 4);
    const auto exact = one_step_pmf_exact(m3, c, Mode::parallel);
    std::vector<double> probs(exact.size());
    for (std::size_t i = 0; i < exact.size(); ++i) probs[i] = to_double(exact[i]);

    Rng rng = make_rng(29);
    const AgentState s0 = AgentState::from_configuration(c);
    std::vector<double> counts(probs.size(), 0.0);
    const long trials = 100000;
    for (long i = 0; i < trials; ++i) {
        const AgentState s1 = step_parallel_agentwise(s0, m3, rng);
        counts[static_cast<std::size_t>(s1.count_ones())] += 1.0;
    }
    const auto r = chi_square_gof(counts, probs, trials);
    REQUIRE(r.p_value > 1e-3);
}

TEST_CASE("agent-level stepper keeps consensus fixed and the source pinned") {
    const Protocol m3 = builtin(Builtin::minority, 3);
    Rng rng = make_rng(31);
    AgentState s = AgentState::from_configuration(Configuration(10, 1, 10));
    for (int i = 0; i < 50; ++i) {
        s = step_parallel_agentwise(s, m3, rng);
        REQUIRE(s.count_ones() == 10);
    }
    AgentState t = AgentState::from_configuration(Configuration(10, 0, 5));
    for (int i = 0; i < 50; ++i) {
        t = step_parallel_agentwise(t, m3, rng);
        REQUIRE(t.bits[0] == 0);
    }
}

TEST_CASE("n=2 voter: the non-source agent samples the source half the time") {
    const Protocol voter = builtin(Builtin::voter, 1);
    Rng rng = make_rng(37);
    const AgentState s0 = AgentState::from_configuration(Configuration(2, 1, 1));
    long adopted = 0;
    const long trials = 100000;
    for (long i = 0; i < trials; ++i)
        adopted += step_parallel_agentwise(s0, voter, rng).bits[1] == 1 ? 1 : 0;
    const double frac = static_cast<double>(adopted) / static_cast<double>(trials);
    REQUIRE(std::fabs(frac - 0.5) < 4.0 * std::sqrt(0.25 / trials));
}

TEST_CASE("run_until_consensus basics") {
    const Protocol voter = builtin(Builtin::voter, 1);

    // Already at consensus: tau = 0.
    Rng rng = make_rng(41);
    const auto done = run_until_consensus(Configuration(8, 1, 8), voter, Mode::parallel, 100, rng);
    REQUIRE(done.converged);
    REQUIRE(done.tau == 0);

    // Voter n=2 z=1 x0=1: geometric with success 1/2, mean 2.
    std::vector<double> taus;
    for (int i = 0; i < 20000; ++i) {
        Rng r = make_rng(derive_seed(1234, static_cast<std::uint64_t>(i)));
        const auto o = run_until_consensus(Configuration(2, 1, 1), voter, Mode::parallel, 10000, r);
        REQUIRE(o.converged);
        taus.push_back(static_cast<double>(o.tau));
    }
    REQUIRE(mean(taus) == Catch::Approx(2.0).margin(0.05));

    REQUIRE_THROWS_AS(
        [&] {
            Rng r = make_rng(1);
            return run_until_consensus(Configuration(2, 1, 1), voter, Mode::parallel, 0, r);
        }(),
        std::invalid_argument);
}

TEST_CASE("non-well-formed protocols censor instead of reporting tau") {
    // Minority ell=3 with g0(0) = 0.1: consensus is not absorbing.
    Protocol leaky = builtin(Builtin::minority, 3);
    leaky = Protocol(3,
                     {Rational(1, 10), Rational(1), Rational(0), Rational(1)},
                     leaky.g1, "leaky");
    Rng rng = make_rng(43);
    const auto o = run_until_consensus(Configuration(6, 1, 6), leaky, Mode::parallel, 50, rng);
    REQUIRE_FALSE(o.converged);
    REQUIRE(o.censored == CensorReason::not_well_formed);
    REQUIRE(o.steps_executed == 50);
}

TEST_CASE("sequential accounting reports raw activations and parallel rounds") {
    const Protocol voter = builtin(Builtin::voter, 1);
    Rng rng = make_rng(47);
    const auto o =
        run_until_consensus(Configuration(4, 1, 1), voter, Mode::sequential, 1000000, rng);
    REQUIRE(o.converged);
    REQUIRE(o.activations == o.tau);
    REQUIRE(o.parallel_rounds == Catch::Approx(static_cast<double>(o.tau) / 4.0));
}

TEST_CASE("determinism: identical seeds give identical traces") {
    const Protocol m3 = builtin(Builtin::minority, 3);
    for (Mode mode : {Mode::parallel, Mode::sequential}) {
        Trace t1, t2;
        Rng r1 = make_rng(991), r2 = make_rng(991);
        const auto o1 =
            run_until_consensus(Configuration(24, 1, 18), m3, mode, 2000, r1, &t1);
        const auto o2 =
            run_until_consensus(Configuration(24, 1, 18), m3, mode, 2000, r2, &t2);
        REQUIRE(o1.converged == o2.converged);
        REQUIRE(o1.steps_executed == o2.steps_executed);
        REQUIRE(t1.xs == t2.xs);
    }
}

TEST_CASE("no-jump bound at checkable sizes") {
    // For well-formed protocols with x <= c*n, the one-step law cannot land
    // above y*n with y = 1 - (1-c)^(ell+1)/2, except with probability below
    // exp(-2 sqrt(n)) once n is past the small-size regime.
    for (const auto& p : {builtin(Builtin::voter, 1), builtin(Builtin::minority, 3)}) {
        for (long n : {64l, 128l}) {
            const double c = 0.5;
            const long x = n / 2;
            const double y = 1.0 - std::pow(1.0 - c, static_cast<double>(p.ell) + 1.0) / 2.0;
            const auto pmf = one_step_pmf_exact(p, Configuration(n, 1, x), Mode::parallel);
            Rational tail = 0;
            for (long j = static_cast<long>(std::floor(y * static_cast<double>(n))) + 1; j <= n; ++j)
                tail += pmf[static_cast<std::size_t>(j)];
            REQUIRE(to_double(tail) <= std::exp(-2.0 * std::sqrt(static_cast<double>(n))));
        }
    }
    // Monte Carlo versant at a larger n: no exceedance observed in 10^5 draws.
    const Protocol m3 = builtin(Builtin::minority, 3);
    const long n = 1024;
    const double y = 1.0 - std::pow(0.5, 4.0) / 2.0;
    Rng rng = make_rng(53);
    const AdoptTable table = AdoptTable::build(m3, n);
    long exceed = 0;
    for (int i = 0; i < 100000; ++i) {
        const auto c = step_parallel(Configuration(n, 1, n / 2), table, rng);
        exceed += c.x > static_cast<long>(y * n) ? 1 : 0;
    }
    REQUIRE(exceed == 0);
}

TEST_CASE("expectation bracket against the analyzer") {
    Rng rng = make_rng(59);
    const Protocol m3 = builtin(Builtin::minority, 3);
    const auto F = characteristic_poly(m3);
    for (long n : {8l, 33l, 100l}) {
        for (long x = 1; x <= n; x += std::max(1l, n / 7)) {
            const Rational e = expected_next_exact(m3, n, 1, x);
            const auto [lo, hi] = drift_bracket_exact(F, x, n);
            REQUIRE(lo <= e);
            REQUIRE(e <= hi);
        }
    }
}
