#include <catch2/catch_amalgamated.hpp>

#include "bitdis/protocol.hpp"
#include "bitdis/rng.hpp"

using namespace bitdis;

TEST_CASE("builtin voter tables are k/ell") {
    const Protocol v2 = builtin(Builtin::voter, 2);
    REQUIRE(v2.ell == 2);
    REQUIRE(v2.g0 == std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1)});
    REQUIRE(v2.g1 == v2.g0);

    const Protocol v1 = builtin(Builtin::voter, 1);
    REQUIRE(v1.g0 == std::vector<Rational>{Rational(0), Rational(1)});
}

TEST_CASE("builtin minority tables") {
    REQUIRE(builtin(Builtin::minority, 2).g0 ==
            std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1)});
    REQUIRE(builtin(Builtin::minority, 3).g0 ==
            std::vector<Rational>{Rational(0), Rational(1), Rational(0), Rational(1)});
    REQUIRE(builtin(Builtin::minority, 4).g0 ==
            std::vector<Rational>{Rational(0), Rational(1), Rational(1, 2), Rational(0), Rational(1)});
}

TEST_CASE("minority complement symmetry g(ell-k) = 1 - g(k)") {
    for (long ell = 1; ell <= 12; ++ell) {
        const Protocol m = builtin(Builtin::minority, ell);
        for (long k = 0; k <= ell; ++k)
            REQUIRE(m.g0[static_cast<std::size_t>(ell - k)] ==
                    1 - m.g0[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("validate reports well-formedness without rejecting") {
    REQUIRE(validate(builtin(Builtin::voter, 1)).is_well_formed);
    for (long ell = 1; ell <= 9; ++ell) {
        REQUIRE(validate(builtin(Builtin::voter, ell)).is_well_formed);
        REQUIRE(validate(builtin(Builtin::minority, ell)).is_well_formed);
    }

    const Protocol bad(1, {Rational(1, 2), Rational(1)}, {Rational(0), Rational(1)}, "bad");
    const auto w = validate(bad);
    REQUIRE_FALSE(w.is_well_formed);
    REQUIRE(w.violations == std::vector{WellFormednessViolation::g0_at_zero});

    const Protocol bad2(1, {Rational(0), Rational(1)}, {Rational(0), Rational(1, 2)}, "bad2");
    REQUIRE(validate(bad2).violations == std::vector{WellFormednessViolation::g1_at_ell});
}

TEST_CASE("structural violations are hard errors") {
    REQUIRE_THROWS_AS(Protocol(1, {Rational(0)}, {Rational(0), Rational(1)}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(Protocol(1, {Rational(0), Rational(2)}, {Rational(0), Rational(1)}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(Protocol(0, {Rational(0)}, {Rational(0)}), std::invalid_argument);
    REQUIRE_THROWS_AS(builtin_from_name("majority"), std::invalid_argument);
    REQUIRE_THROWS_AS(builtin(Builtin::voter, 0), std::invalid_argument);
}

TEST_CASE("load_protocol parses fractions exactly") {
    const std::string text = R"({"name":"voter","ell":1,"g0":["0","1"],"g1":[0,1]})";
    const Protocol p = load_protocol(text);
    REQUIRE(p.ell == 1);
    REQUIRE(p.exact);
    REQUIRE(p.g0 == builtin(Builtin::voter, 1).g0);
    REQUIRE(p.g1 == builtin(Builtin::voter, 1).g1);
}

TEST_CASE("load_protocol rejects out-of-range and wrong-length tables") {
    REQUIRE_THROWS_AS(
        load_protocol(R"({"name":"x","ell":1,"g0":["3/2","1"],"g1":[0,1]})"),
        ProtocolParseError);
    REQUIRE_THROWS_AS(
        load_protocol(R"({"name":"x","ell":3,"g0":[0,1,0],"g1":[0,1,0,1]})"),
        ProtocolParseError);
    REQUIRE_THROWS_AS(load_protocol("not json at all"), ProtocolParseError);
    REQUIRE_THROWS_AS(load_protocol(R"({"name":"x","ell":0,"g0":[0],"g1":[1]})"),
                      ProtocolParseError);
}

TEST_CASE("decimal entries switch the protocol to tolerance mode") {
    const Protocol p = load_protocol(R"({"name":"d","ell":1,"g0":[0,0.5],"g1":[0.25,1]})");
    REQUIRE_FALSE(p.exact);
    REQUIRE(p.g0[1] == Rational(1, 2));   // 0.5 is dyadic, conversion is exact
    REQUIRE(p.g1[0] == Rational(1, 4));
}

TEST_CASE("serialize/load round-trip is identity on the tables") {
    Rng rng = make_rng(99);
    for (int iter = 0; iter < 50; ++iter) {
        const long ell = 1 + static_cast<long>(uniform_below(rng, 6));
        std::vector<Rational> g0(static_cast<std::size_t>(ell) + 1), g1(g0.size());
        for (auto* t : {&g0, &g1})
            for (auto& v : *t) {
                const long den = 1 + static_cast<long>(uniform_below(rng, 16));
                const long num = static_cast<long>(uniform_below(rng, static_cast<std::uint64_t>(den) + 1));
                v = Rational(num, den);
            }
        const Protocol p(ell, g0, g1, "rand" + std::to_string(iter));
        const Protocol q = load_protocol(serialize(p));
        REQUIRE(q.ell == p.ell);
        REQUIRE(q.g0 == p.g0);
        REQUIRE(q.g1 == p.g1);
        REQUIRE(q.name == p.name);
    }
}
