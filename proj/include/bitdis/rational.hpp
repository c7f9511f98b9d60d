#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bitdis {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline Integer numerator(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator(const Rational& q) { return boost::multiprecision::denominator(q); }

// Exact integer binomial coefficient.
inline Integer binom(long n, long k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    Integer r = 1;
    for (long i = 0; i < k; ++i) {
        r *= (n - i);
        r /= (i + 1);
    }
    return r;
}

inline Rational rational_pow(const Rational& base, long e) {
    Rational r = 1;
    Rational b = base;
    long n = e;
    if (n < 0) {
        if (base == 0) throw std::invalid_argument("rational_pow: 0^negative");
        b = 1 / b;
        n = -n;
    }
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

// Parses "p/q" or a plain integer into an exact rational.
inline Rational parse_fraction(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Integer(s));
        const Integer num(s.substr(0, slash));
        const Integer den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a valid fraction: '" + s + "'");
    }
}

inline std::string to_string(const Rational& q) { return q.str(); }

// Exact rational representation of a double (doubles are dyadic rationals).
inline Rational rational_from_double(double x) {
    if (std::isnan(x) || std::isinf(x))
        throw std::invalid_argument("rational_from_double: non-finite value");
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [0.5, 1)
    // 53 doublings make the mantissa integral.
    for (int i = 0; i < 53 && m != std::floor(m); ++i) {
        m *= 2.0;
        --exp;
    }
    Rational r(Integer(static_cast<long long>(m)));
    if (exp >= 0)
        r *= rational_pow(Rational(2), exp);
    else
        r /= rational_pow(Rational(2), -exp);
    return r;
}

}  // namespace bitdis
