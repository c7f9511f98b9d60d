#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bitdis/rational.hpp"

namespace bitdis {

// Dense univariate polynomial, coefficients from low to high degree.
// Invariant: trailing zero coefficients are trimmed, so degree() is exact and
// the zero polynomial has an empty coefficient vector.
template <typename T>
struct Poly {
    std::vector<T> c;

    Poly() = default;
    explicit Poly(std::vector<T> coeffs) : c(std::move(coeffs)) { trim(); }

    void trim() {
        while (!c.empty() && c.back() == T(0)) c.pop_back();
    }

    bool is_zero() const { return c.empty(); }
    long degree() const { return static_cast<long>(c.size()) - 1; }

    const T& operator[](std::size_t i) const { return c[i]; }

    T coeff(long i) const {
        if (i < 0 || i >= static_cast<long>(c.size())) return T(0);
        return c[static_cast<std::size_t>(i)];
    }

    T eval(const T& x) const {
        T r(0);
        for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
        return r;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly();
        std::vector<T> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * T(static_cast<long>(i));
        return Poly(std::move(d));
    }

    Poly operator+(const Poly& o) const {
        std::vector<T> r(std::max(c.size(), o.c.size()), T(0));
        for (std::size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (std::size_t i = 0; i < o.c.size(); ++i) r[i] += o.c[i];
        return Poly(std::move(r));
    }

    Poly operator-(const Poly& o) const {
        std::vector<T> r(std::max(c.size(), o.c.size()), T(0));
        for (std::size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (std::size_t i = 0; i < o.c.size(); ++i) r[i] -= o.c[i];
        return Poly(std::move(r));
    }

    Poly operator*(const Poly& o) const {
        if (is_zero() || o.is_zero()) return Poly();
        std::vector<T> r(c.size() + o.c.size() - 1, T(0));
        for (std::size_t i = 0; i < c.size(); ++i)
            for (std::size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
        return Poly(std::move(r));
    }

    Poly operator*(const T& s) const {
        std::vector<T> r = c;
        for (T& v : r) v *= s;
        return Poly(std::move(r));
    }

    bool operator==(const Poly& o) const { return c == o.c; }
};

using PolyQ = Poly<Rational>;
using PolyD = Poly<double>;

inline PolyD to_double_poly(const PolyQ& p) {
    std::vector<double> c(p.c.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = to_double(p.c[i]);
    return PolyD(std::move(c));
}

inline int sign_of(const Rational& q) { return q.sign(); }

// Euclidean division: a = q*b + r with deg r < deg b.
inline std::pair<PolyQ, PolyQ> poly_divmod(const PolyQ& a, const PolyQ& b) {
    if (b.is_zero()) throw std::invalid_argument("poly_divmod: division by zero polynomial");
    PolyQ r = a;
    std::vector<Rational> q(
        a.degree() >= b.degree() ? static_cast<std::size_t>(a.degree() - b.degree()) + 1 : 0,
        Rational(0));
    const Rational& lead = b.c.back();
    while (!r.is_zero() && r.degree() >= b.degree()) {
        const long shift = r.degree() - b.degree();
        const Rational f = r.c.back() / lead;
        q[static_cast<std::size_t>(shift)] = f;
        for (std::size_t i = 0; i < b.c.size(); ++i)
            r.c[static_cast<std::size_t>(shift) + i] -= f * b.c[i];
        r.trim();
    }
    return {PolyQ(std::move(q)), std::move(r)};
}

inline PolyQ poly_div_exact(const PolyQ& a, const PolyQ& b) {
    auto [q, r] = poly_divmod(a, b);
    if (!r.is_zero()) throw std::logic_error("poly_div_exact: nonzero remainder");
    return q;
}

// Scales to coprime integer coefficients with positive leading coefficient.
// Keeping remainders primitive through the Euclid/Sturm chains stops the
// coefficient blow-up that plain rational remainder sequences suffer from.
inline PolyQ make_primitive(const PolyQ& p) {
    if (p.is_zero()) return p;
    Integer den_lcm = 1;
    for (const Rational& v : p.c)
        den_lcm = boost::multiprecision::lcm(den_lcm, denominator(v));
    Integer num_gcd = 0;
    for (const Rational& v : p.c) {
        Integer n = numerator(v) * (den_lcm / denominator(v));
        num_gcd = boost::multiprecision::gcd(num_gcd, boost::multiprecision::abs(n));
    }
    if (num_gcd == 0) return p;
    Rational scale(den_lcm, num_gcd);
    PolyQ r = p * scale;
    if (r.c.back() < 0) r = r * Rational(-1);
    return r;
}

inline PolyQ poly_gcd(PolyQ a, PolyQ b) {
    a = make_primitive(a);
    b = make_primitive(b);
    while (!b.is_zero()) {
        PolyQ r = poly_divmod(a, b).second;
        a = std::move(b);
        b = make_primitive(r);
    }
    return a;
}

// Yun's square-free decomposition. Returns factors[i] (i >= 1) such that
// f = const * prod factors[i]^i and each factor is square-free, pairwise
// coprime, primitive. Entries may be the constant 1 polynomial.
inline std::vector<PolyQ> squarefree_decomposition(const PolyQ& f) {
    std::vector<PolyQ> out;
    if (f.is_zero()) throw std::invalid_argument("squarefree_decomposition: zero polynomial");
    PolyQ one(std::vector<Rational>{Rational(1)});
    if (f.degree() == 0) return out;
    PolyQ fp = f.derivative();
    PolyQ a0 = poly_gcd(f, fp);
    if (a0.degree() == 0) {
        out.push_back(make_primitive(f));
        return out;
    }
    PolyQ b = poly_div_exact(make_primitive(f), a0);
    PolyQ c = poly_div_exact(make_primitive(fp), a0);
    PolyQ d = c - b.derivative();
    for (;;) {
        PolyQ ai = poly_gcd(b, d);
        out.push_back(ai.degree() >= 1 ? ai : one);
        b = poly_div_exact(b, ai);
        if (b.degree() == 0) break;
        c = poly_div_exact(d, ai);
        d = c - b.derivative();
    }
    return out;
}

namespace detail {

// Sturm chain of a square-free polynomial, each term kept primitive.
inline std::vector<PolyQ> sturm_chain(const PolyQ& f) {
    std::vector<PolyQ> chain;
    chain.push_back(make_primitive(f));
    PolyQ d = make_primitive(f.derivative());
    if (!d.is_zero()) chain.push_back(d);
    while (chain.back().degree() > 0) {
        PolyQ r = poly_divmod(chain[chain.size() - 2], chain.back()).second;
        if (r.is_zero()) break;  // cannot happen for square-free input
        chain.push_back(make_primitive(r * Rational(-1)));
    }
    return chain;
}

inline int sign_variations(const std::vector<PolyQ>& chain, const Rational& x) {
    int vars = 0;
    int last = 0;
    for (const PolyQ& p : chain) {
        const int s = sign_of(p.eval(x));
        if (s == 0) continue;
        if (last != 0 && s != last) ++vars;
        last = s;
    }
    return vars;
}

// Number of roots in the half-open interval (a, b].
inline long sturm_count(const std::vector<PolyQ>& chain, const Rational& a,
                        const Rational& b) {
    return sign_variations(chain, a) - sign_variations(chain, b);
}

}  // namespace detail

// One real root of a square-free polynomial: either pinned to an exact
// rational, or enclosed in an open interval (lo, hi) whose endpoints are not
// roots and which contains exactly one root.
struct IsolatedRoot {
    bool exact = false;
    Rational value;    // meaningful when exact
    Rational lo, hi;   // enclosure; for exact roots lo = hi = value
    double approx() const { return exact ? to_double(value) : to_double((lo + hi) / 2); }
};

namespace detail {

inline IsolatedRoot exact_root(Rational v) {
    IsolatedRoot r;
    r.exact = true;
    r.value = v;
    r.lo = r.hi = std::move(v);
    return r;
}

// Isolates all roots of a square-free f inside the open interval (a, b),
// assuming f(a) != 0 and f(b) != 0. Rational roots hit by a bisection point
// are recorded exactly and deflated out, so Sturm counts against the current
// polynomial never double-count them. Enclosures are refined to width <= tol.
inline void isolate_squarefree_open(PolyQ f, const Rational& a, const Rational& b,
                                    const Rational& tol, std::vector<IsolatedRoot>& out) {
    auto chain = sturm_chain(f);
    std::vector<std::pair<Rational, Rational>> work{{a, b}};
    while (!work.empty()) {
        auto [lo, hi] = std::move(work.back());
        work.pop_back();
        if (f.degree() < 1) continue;
        const long count = sturm_count(chain, lo, hi);
        if (count == 0) continue;
        const Rational mid = (lo + hi) / 2;
        if (f.eval(mid) == 0) {
            out.push_back(exact_root(mid));
            f = poly_div_exact(f, PolyQ(std::vector<Rational>{-mid, Rational(1)}));
            chain = sturm_chain(f);
            work.emplace_back(lo, mid);
            work.emplace_back(mid, hi);
            continue;
        }
        if (count == 1 && hi - lo <= tol) {
            IsolatedRoot r;
            r.lo = lo;
            r.hi = hi;
            out.push_back(std::move(r));
            continue;
        }
        work.emplace_back(lo, mid);
        work.emplace_back(mid, hi);
    }
}

// Exact roots of degree <= 2 square-free factors, restricted to [lo, hi].
// Degree-2 roots are exact only when the discriminant is a perfect square;
// otherwise the caller falls back to Sturm isolation.
inline bool exact_low_degree_roots(const PolyQ& f, const Rational& lo, const Rational& hi,
                                   std::vector<IsolatedRoot>& out) {
    if (f.degree() == 1) {
        Rational r = -f.c[0] / f.c[1];
        if (r >= lo && r <= hi) out.push_back(exact_root(std::move(r)));
        return true;
    }
    if (f.degree() == 2) {
        const Rational &a2 = f.c[2], &a1 = f.c[1], &a0 = f.c[0];
        Rational disc = a1 * a1 - 4 * a2 * a0;
        if (disc < 0) return true;  // no real roots
        Integer dn = numerator(disc), dd = denominator(disc);
        Integer sn = boost::multiprecision::sqrt(dn), sd = boost::multiprecision::sqrt(dd);
        if (sn * sn != dn || sd * sd != dd) return false;
        Rational sq(sn, sd);
        for (const Rational& r : {(-a1 - sq) / (2 * a2), (-a1 + sq) / (2 * a2)})
            if (r >= lo && r <= hi) out.push_back(exact_root(r));
        return true;
    }
    return false;
}

}  // namespace detail

// All roots of a square-free polynomial in the closed interval [0,1], in
// increasing order. Enclosures are refined to width <= tol and shrunk until
// they are pairwise disjoint and disjoint from every exact root.
inline std::vector<IsolatedRoot> isolate_roots_01(const PolyQ& f_in,
                                                  const Rational& tol = Rational(1, Integer(1) << 60)) {
    if (f_in.is_zero()) throw std::invalid_argument("isolate_roots_01: zero polynomial");
    PolyQ f = make_primitive(f_in);
    std::vector<IsolatedRoot> out;
    if (f.degree() == 0) return out;

    // Peel the structurally common endpoint roots first (square-free input
    // means each appears at most once).
    if (f.eval(Rational(0)) == 0) {
        out.push_back(detail::exact_root(Rational(0)));
        f = poly_div_exact(f, PolyQ(std::vector<Rational>{Rational(0), Rational(1)}));
    }
    if (f.eval(Rational(1)) == 0) {
        out.push_back(detail::exact_root(Rational(1)));
        f = poly_div_exact(f, PolyQ(std::vector<Rational>{Rational(-1), Rational(1)}));
    }

    if (f.degree() >= 1) {
        std::vector<IsolatedRoot> inner;
        if (!detail::exact_low_degree_roots(f, Rational(0), Rational(1), inner)) {
            inner.clear();
            detail::isolate_squarefree_open(f, Rational(0), Rational(1), tol, inner);
        }
        for (auto& r : inner) out.push_back(std::move(r));
    }

    std::sort(out.begin(), out.end(), [](const IsolatedRoot& x, const IsolatedRoot& y) {
        return (x.lo + x.hi) < (y.lo + y.hi);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Bernstein form on [0,1] (double precision).

inline std::vector<double> bernstein_from_monomial(const std::vector<double>& mono,
                                                   std::size_t degree) {
    // b_j = sum_{i<=j} C(j,i)/C(degree,i) * a_i
    std::vector<double> b(degree + 1, 0.0);
    for (std::size_t j = 0; j <= degree; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= j && i < mono.size(); ++i) {
            const double ratio = to_double(Rational(binom(static_cast<long>(j), static_cast<long>(i)),
                                                    binom(static_cast<long>(degree), static_cast<long>(i))));
            acc += ratio * mono[i];
        }
        b[j] = acc;
    }
    return b;
}

// de Casteljau evaluation; numerically stable for t in [0,1].
inline double decasteljau(std::vector<double> b, double t) {
    const double s = 1.0 - t;
    for (std::size_t level = b.size(); level-- > 1;)
        for (std::size_t i = 0; i < level; ++i) b[i] = s * b[i] + t * b[i + 1];
    return b.empty() ? 0.0 : b[0];
}

// Splits Bernstein coefficients at parameter t into the [0,t] and [t,1] halves.
inline std::pair<std::vector<double>, std::vector<double>> decasteljau_split(
    const std::vector<double>& b, double t) {
    std::vector<double> tri = b, left(b.size()), right(b.size());
    const double s = 1.0 - t;
    left[0] = tri.front();
    right[b.size() - 1] = tri.back();
    for (std::size_t level = 1; level < b.size(); ++level) {
        for (std::size_t i = 0; i + level < b.size(); ++i) tri[i] = s * tri[i] + t * tri[i + 1];
        left[level] = tri.front();
        right[b.size() - 1 - level] = tri[b.size() - 1 - level];
    }
    return {std::move(left), std::move(right)};
}

// Certified upper bound on max |f| over [0,1] given Bernstein coefficients,
// by recursive subdivision against the convex-hull property.
inline double bernstein_abs_bound(const std::vector<double>& b, int depth = 24,
                                  double rel_tol = 1e-9) {
    double hi = 0.0, lo = 0.0;
    for (double v : b) hi = std::max(hi, std::fabs(v));
    for (double v : {b.front(), b.back()}) lo = std::max(lo, std::fabs(v));
    if (depth == 0 || hi <= lo * (1.0 + rel_tol) || hi == 0.0) return hi;
    auto [l, r] = decasteljau_split(b, 0.5);
    return std::max(bernstein_abs_bound(l, depth - 1, rel_tol),
                    bernstein_abs_bound(r, depth - 1, rel_tol));
}

// Coefficients of f(a + w*t) as a polynomial in t (affine reparametrization).
inline std::vector<double> compose_affine(const std::vector<double>& mono, double a, double w) {
    std::vector<double> out(1, 0.0);
    // Horner over polynomials: out = out*(a + w t) + c_i
    for (std::size_t i = mono.size(); i-- > 0;) {
        std::vector<double> next(out.size() + 1, 0.0);
        for (std::size_t j = 0; j < out.size(); ++j) {
            next[j] += out[j] * a;
            next[j + 1] += out[j] * w;
        }
        next[0] += mono[i];
        out = std::move(next);
        while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    }
    return out;
}

}  // namespace bitdis
