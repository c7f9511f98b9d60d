#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitdis/rational.hpp"

namespace bitdis {

// A memoryless update rule: two tables over k = 0..ell, where g0[k] (resp.
// g1[k]) is the probability of adopting opinion 1 after seeing k ones in the
// sample, given own opinion 0 (resp. 1). Entries are held as exact rationals;
// `exact` records whether the source wrote them as fractions/integers (true)
// or as decimals that went through double rounding (false). Immutable after
// construction, safe to share across threads.
struct Protocol {
    long ell = 1;
    std::vector<Rational> g0;
    std::vector<Rational> g1;
    std::string name;
    bool exact = true;

    Protocol() = default;
    Protocol(long ell_, std::vector<Rational> g0_, std::vector<Rational> g1_,
             std::string name_ = "", bool exact_ = true)
        : ell(ell_), g0(std::move(g0_)), g1(std::move(g1_)), name(std::move(name_)),
          exact(exact_) {
        check_structure();
    }

    // Structural violations (wrong lengths, out-of-range entries) are hard
    // errors, unlike well-formedness which is merely reported.
    void check_structure() const {
        if (ell < 1) throw std::invalid_argument("protocol: sample size must be >= 1");
        if (g0.size() != static_cast<std::size_t>(ell) + 1 ||
            g1.size() != static_cast<std::size_t>(ell) + 1)
            throw std::invalid_argument("protocol: tables must have ell+1 entries");
        for (const auto* t : {&g0, &g1})
            for (const Rational& v : *t)
                if (v < 0 || v > 1)
                    throw std::invalid_argument("protocol: table entry outside [0,1]");
    }

    double g0_at(long k) const { return to_double(g0[static_cast<std::size_t>(k)]); }
    double g1_at(long k) const { return to_double(g1[static_cast<std::size_t>(k)]); }
    const Rational& g(int own, long k) const {
        return own ? g1[static_cast<std::size_t>(k)] : g0[static_cast<std::size_t>(k)];
    }
};

enum class WellFormednessViolation { g0_at_zero, g1_at_ell };

// Outcome of the absorbing-consensus check: g0(0) = 0 keeps all-zero
// configurations fixed, g1(ell) = 1 keeps all-one configurations fixed.
// Failing either does not prevent simulation, but convergence times become
// meaningless (reported as censored downstream).
struct WellFormedness {
    bool is_well_formed = false;
    std::vector<WellFormednessViolation> violations;
};

inline WellFormedness validate(const Protocol& p) {
    p.check_structure();
    WellFormedness w;
    if (p.g0.front() != 0) w.violations.push_back(WellFormednessViolation::g0_at_zero);
    if (p.g1.back() != 1) w.violations.push_back(WellFormednessViolation::g1_at_ell);
    w.is_well_formed = w.violations.empty();
    return w;
}

enum class Builtin { voter, minority };

inline Builtin builtin_from_name(const std::string& s) {
    if (s == "voter") return Builtin::voter;
    if (s == "minority") return Builtin::minority;
    throw std::invalid_argument("unknown builtin protocol: '" + s + "'");
}

// Voter: adopt a uniformly random opinion from the sample, g(k) = k/ell.
// Minority: adopt the minority opinion of the sample unless it is unanimous;
// ties broken uniformly. Both use the same table for either own opinion.
inline Protocol builtin(Builtin which, long ell) {
    if (ell < 1) throw std::invalid_argument("builtin: sample size must be >= 1");
    std::vector<Rational> g(static_cast<std::size_t>(ell) + 1);
    std::string name;
    switch (which) {
        case Builtin::voter:
            for (long k = 0; k <= ell; ++k) g[static_cast<std::size_t>(k)] = Rational(k, ell);
            name = "voter";
            break;
        case Builtin::minority:
            for (long k = 0; k <= ell; ++k) {
                Rational& v = g[static_cast<std::size_t>(k)];
                if (k == ell || (0 < 2 * k && 2 * k < ell))
                    v = 1;
                else if (2 * k == ell)
                    v = Rational(1, 2);
                else
                    v = 0;
            }
            name = "minority";
            break;
    }
    return Protocol(ell, g, g, name + "-" + std::to_string(ell));
}

struct ProtocolParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Rational entry_from_json(const nlohmann::json& v, bool& exact) {
    if (v.is_string()) return parse_fraction(v.get<std::string>());
    if (v.is_number_integer()) return Rational(Integer(v.get<long long>()));
    if (v.is_number_float()) {
        exact = false;  // went through decimal -> double rounding
        return rational_from_double(v.get<double>());
    }
    throw ProtocolParseError("table entry must be a number or a \"p/q\" string");
}

inline std::vector<Rational> table_from_json(const nlohmann::json& arr, long ell,
                                             const char* key, bool& exact) {
    if (!arr.is_array())
        throw ProtocolParseError(std::string(key) + " must be an array");
    if (arr.size() != static_cast<std::size_t>(ell) + 1)
        throw ProtocolParseError(std::string(key) + " must have ell+1 = " +
                                 std::to_string(ell + 1) + " entries, got " +
                                 std::to_string(arr.size()));
    std::vector<Rational> t;
    t.reserve(arr.size());
    for (const auto& v : arr) {
        Rational r = entry_from_json(v, exact);
        if (r < 0 || r > 1)
            throw ProtocolParseError(std::string(key) + " entry " + r.str() +
                                     " outside [0,1]");
        t.push_back(std::move(r));
    }
    return t;
}

}  // namespace detail

// Protocol file format: one JSON document with keys `name` (string), `ell`
// (integer), `g0` and `g1` (arrays of ell+1 numbers or fraction strings
// "p/q"). Parse failures carry nlohmann's line/column diagnostics.
inline Protocol load_protocol(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolParseError(std::string("protocol parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ProtocolParseError("protocol file must be a JSON object");
    if (!doc.contains("ell") || !doc["ell"].is_number_integer())
        throw ProtocolParseError("missing integer key 'ell'");
    const long ell = doc["ell"].get<long>();
    if (ell < 1) throw ProtocolParseError("'ell' must be >= 1");
    if (!doc.contains("g0") || !doc.contains("g1"))
        throw ProtocolParseError("missing table 'g0' or 'g1'");
    bool exact = true;
    auto g0 = detail::table_from_json(doc["g0"], ell, "g0", exact);
    auto g1 = detail::table_from_json(doc["g1"], ell, "g1", exact);
    std::string name = doc.value("name", std::string("unnamed"));
    return Protocol(ell, std::move(g0), std::move(g1), std::move(name), exact);
}

// Inverse of load_protocol for exact protocols; decimal-origin entries are
// written back as exact dyadic fractions, so a round-trip always reparses to
// an identical table.
inline std::string serialize(const Protocol& p) {
    nlohmann::json doc;
    doc["name"] = p.name;
    doc["ell"] = p.ell;
    auto dump_table = [](const std::vector<Rational>& t) {
        nlohmann::json arr = nlohmann::json::array();
        for (const Rational& v : t) arr.push_back(v.str());
        return arr;
    };
    doc["g0"] = dump_table(p.g0);
    doc["g1"] = dump_table(p.g1);
    return doc.dump(2) + "\n";
}

}  // namespace bitdis
