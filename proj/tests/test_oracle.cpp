#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bitdis/oracle.hpp"
#include "bitdis/stats.hpp"

using namespace bitdis;

TEST_CASE("voter n=2 and n=3 transition rows") {
    const Protocol voter = builtin(Builtin::voter, 1);
    const auto m2 = exact_transition_matrix(voter, 2, 1, Mode::parallel);
    REQUIRE(m2.exact);
    REQUIRE(m2.rows_q[1][1] == Rational(1, 2));
    REQUIRE(m2.rows_q[1][2] == Rational(1, 2));
    REQUIRE(m2.rows_q[2][2] == 1);

    const auto m3 = exact_transition_matrix(voter, 3, 1, Mode::parallel);
    REQUIRE(m3.rows_q[1][1] == Rational(4, 9));
    REQUIRE(m3.rows_q[1][2] == Rational(4, 9));
    REQUIRE(m3.rows_q[1][3] == Rational(1, 9));
    REQUIRE(m3.rows_q[3][3] == 1);
}

TEST_CASE("rows are stochastic and consensus rows are point masses") {
    Rng rng = make_rng(61);
    for (long ell : {1l, 2l, 3l}) {
        const Protocol p = builtin(Builtin::minority, ell);
        for (Mode mode : {Mode::parallel, Mode::sequential}) {
            const auto m = exact_transition_matrix(p, 17, 1, mode);
            for (long x = 0; x <= 17; ++x) {
                double s = 0.0;
                for (double v : m.rows[static_cast<std::size_t>(x)]) s += v;
                REQUIRE(std::fabs(s - 1.0) <= 0x1.0p-40);
            }
            REQUIRE(m.rows[17][17] == 1.0);
        }
    }
}

TEST_CASE("sequential matrices are tridiagonal") {
    for (long ell : {1l, 3l, 5l}) {
        const Protocol p = builtin(Builtin::minority, ell);
        const auto m = exact_transition_matrix(p, 23, 0, Mode::sequential);
        for (long i = 0; i <= 23; ++i)
            for (long j = 0; j <= 23; ++j)
                if (std::labs(i - j) > 1)
                    REQUIRE(m.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 0.0);
    }
}

TEST_CASE("one_step_pmf equals the matrix row") {
    const Protocol m3p = builtin(Builtin::minority, 3);
    const auto m = exact_transition_matrix(m3p, 8, 1, Mode::parallel);
    const auto row = one_step_pmf(m3p, Configuration(8, 1, 4), Mode::parallel);
    for (long j = 0; j <= 8; ++j)
        REQUIRE(row[static_cast<std::size_t>(j)] ==
                Catch::Approx(m.rows[4][static_cast<std::size_t>(j)]).margin(1e-14));

    // Double-binomial convolution with P1 = P0 = 1/2 collapses to
    // 1 + Binomial(7, 1/2).
    const auto pmf = one_step_pmf_exact(m3p, Configuration(8, 1, 4), Mode::parallel);
    REQUIRE(pmf[0] == 0);
    const long choose7[8] = {1, 7, 21, 35, 35, 21, 7, 1};
    for (long k = 0; k <= 7; ++k)
        REQUIRE(pmf[static_cast<std::size_t>(k + 1)] == Rational(choose7[k], 128));
}

TEST_CASE("float rows track exact rows even in far tails") {
    const Protocol m3p = builtin(Builtin::minority, 3);
    const Configuration c(96, 1, 48);
    const auto exact = one_step_pmf_exact(m3p, c, Mode::parallel);
    const auto fl = one_step_pmf(m3p, c, Mode::parallel);
    for (long j = 0; j <= 96; ++j) {
        const double e = to_double(exact[static_cast<std::size_t>(j)]);
        REQUIRE(fl[static_cast<std::size_t>(j)] == Catch::Approx(e).epsilon(1e-9).margin(1e-300));
    }
}

TEST_CASE("expected hitting times: voter n=2 and n=3 rational solves") {
    const Protocol voter = builtin(Builtin::voter, 1);
    const auto m2 = exact_transition_matrix(voter, 2, 1, Mode::parallel);
    const auto h2 = expected_hitting_time(m2, 2);
    REQUIRE(h2.exact);
    REQUIRE(h2.h_q[1] == 2);
    REQUIRE(h2.h_q[2] == 0);
    REQUIRE_FALSE(h2.is_infinite(1));

    const auto m3 = exact_transition_matrix(voter, 3, 1, Mode::parallel);
    const auto h3 = expected_hitting_time(m3, 3);
    REQUIRE(h3.h_q[1] == Rational(27, 7));
    REQUIRE(h3.h_q[2] == Rational(18, 7));
    REQUIRE(h3.h_q[3] == 0);
}

TEST_CASE("float solve agrees with the rational solve") {
    const Protocol m3p = builtin(Builtin::minority, 3);
    const auto m = exact_transition_matrix(m3p, 24, 1, Mode::parallel);
    const auto hq = expected_hitting_time(m, 24);
    TransitionMatrix md = m;
    md.exact = false;
    md.rows_q.clear();
    const auto hd = expected_hitting_time(md, 24);
    REQUIRE(hd.max_residual <= 0x1.0p-30);
    for (long x = 1; x <= 24; ++x)
        REQUIRE(hd.at(x) == Catch::Approx(to_double(hq.h_q[static_cast<std::size_t>(x)])).epsilon(1e-9));
}

TEST_CASE("unreachable targets are reported as infinite") {
    // g identically 0 except g1(ell)=1 freezes all-zero states: from x=0
    // (z=0) nothing can reach the all-ones state.
    const Protocol frozen(1, {Rational(0), Rational(0)}, {Rational(0), Rational(1)}, "frozen");
    const auto m = exact_transition_matrix(frozen, 6, 0, Mode::parallel);
    const auto h = expected_hitting_time(m, 5);
    REQUIRE(h.is_infinite(0));
    REQUIRE_FALSE(h.is_infinite(5));
}

TEST_CASE("row means sit inside the drift bracket") {
    const Protocol m3p = builtin(Builtin::minority, 3);
    const auto F = characteristic_poly(m3p);
    const auto m = exact_transition_matrix(m3p, 32, 1, Mode::parallel);
    for (long x = 1; x <= 32; ++x) {
        Rational mean = 0;
        for (long j = 0; j <= 32; ++j)
            mean += Rational(j) * m.rows_q[static_cast<std::size_t>(x)][static_cast<std::size_t>(j)];
        REQUIRE(mean == expected_next_exact(m3p, 32, 1, x));
        const auto [lo, hi] = drift_bracket_exact(F, x, 32);
        REQUIRE(lo <= mean);
        REQUIRE(mean <= hi);
    }
}

TEST_CASE("monte carlo hitting mean lands in the oracle confidence band") {
    const Protocol voter = builtin(Builtin::voter, 1);
    const long n = 16;
    const auto m = exact_transition_matrix(voter, n, 1, Mode::parallel);
    const auto h = expected_hitting_time(m, n);
    const double target = h.at(1);

    std::vector<double> taus;
    const long trials = 10000;
    for (long i = 0; i < trials; ++i) {
        Rng rng = make_rng(derive_seed(8080, static_cast<std::uint64_t>(i)));
        const auto o = run_until_consensus(Configuration(n, 1, 1), voter, Mode::parallel,
                                           1000000, rng);
        REQUIRE(o.converged);
        taus.push_back(static_cast<double>(o.tau));
    }
    const double mu = mean(taus);
    const double se = sample_stddev(taus) / std::sqrt(static_cast<double>(trials));
    REQUIRE(std::fabs(mu - target) <= 3.29 * se);  // 99.9% band
}

TEST_CASE("no-jump tails for minority ell=3 at n in {64,128,256}") {
    const Protocol m3p = builtin(Builtin::minority, 3);
    for (long n : {64l, 128l, 256l}) {
        const Configuration c(n, 1, n / 2);
        // y = 1 - (1-c)^(ell+1)/2 at c = 1/2: 31/32.
        const long cutoff = 31 * n / 32;
        const auto pmf = one_step_pmf(m3p, c, Mode::parallel);
        double tail = 0.0;
        for (long j = cutoff + 1; j <= n; ++j) tail += pmf[static_cast<std::size_t>(j)];
        const double bound = std::exp(-2.0 * std::sqrt(static_cast<double>(n)));
        INFO("n=" << n << " tail=" << tail << " bound=" << bound);
        REQUIRE(tail < bound);
    }
}

TEST_CASE("first hit distribution sums to one over a long horizon") {
    const Protocol voter = builtin(Builtin::voter, 1);
    const auto m = exact_transition_matrix(voter, 8, 1, Mode::parallel);
    const auto d = first_hit_distribution(m, 1, 8, 2000);
    double total = d.survivor;
    for (double v : d.pmf) total += v;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(d.survivor < 1e-6);
    // Mean from the distribution matches the hitting-time solve.
    const auto h = expected_hitting_time(m, 8);
    double mu = 0.0;
    for (std::size_t t = 0; t < d.pmf.size(); ++t) mu += static_cast<double>(t) * d.pmf[t];
    REQUIRE(mu == Catch::Approx(h.at(1)).epsilon(1e-4));
}

TEST_CASE("cap errors are distinct and explicit") {
    const Protocol voter = builtin(Builtin::voter, 1);
    REQUIRE_THROWS_AS(exact_transition_matrix(voter, 512, 1, Mode::parallel, 256),
                      OracleCapError);
}
