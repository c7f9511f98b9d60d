#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bitdis/polynomial.hpp"
#include "bitdis/protocol.hpp"

namespace bitdis {

// The one-round bias polynomial of a protocol:
//   F(x) = -x + sum_k C(ell,k) x^k (1-x)^(ell-k) * (x*g1(k) + (1-x)*g0(k)),
// of degree at most ell+1. Coefficients are exact rationals (tables are
// stored exactly); `exact` records whether the source tables were exact, which
// decides between certified root isolation and tolerance-mode analysis.
struct CharacteristicPolynomial {
    long ell = 1;
    bool exact = true;
    PolyQ q;                      // exact monomial coefficients
    PolyD mono;                   // double monomial coefficients
    std::vector<double> bernstein;  // Bernstein coefficients at nominal degree
    long nominal_degree = 2;      // ell + 1

    double eval_monomial(double x) const { return mono.eval(x); }
    double eval_bernstein(double x) const { return decasteljau(bernstein, x); }
    Rational eval_exact(const Rational& x) const { return q.eval(x); }
    bool is_identically_zero_exact() const { return q.is_zero(); }
};

inline CharacteristicPolynomial characteristic_poly(const Protocol& p) {
    p.check_structure();
    CharacteristicPolynomial out;
    out.ell = p.ell;
    out.exact = p.exact;
    out.nominal_degree = p.ell + 1;

    const PolyQ x(std::vector<Rational>{Rational(0), Rational(1)});
    const PolyQ one_minus_x(std::vector<Rational>{Rational(1), Rational(-1)});
    PolyQ acc;
    for (long k = 0; k <= p.ell; ++k) {
        PolyQ term(std::vector<Rational>{Rational(binom(p.ell, k))});
        for (long i = 0; i < k; ++i) term = term * x;
        for (long i = 0; i < p.ell - k; ++i) term = term * one_minus_x;
        const Rational& g1k = p.g1[static_cast<std::size_t>(k)];
        const Rational& g0k = p.g0[static_cast<std::size_t>(k)];
        // x*g1 + (1-x)*g0 = (g1-g0) x + g0
        term = term * PolyQ(std::vector<Rational>{g0k, g1k - g0k});
        acc = acc + term;
    }
    out.q = acc - x;

    out.mono = to_double_poly(out.q);
    // Bernstein coefficients computed in exact arithmetic, rounded once.
    {
        const long d = out.nominal_degree;
        out.bernstein.assign(static_cast<std::size_t>(d) + 1, 0.0);
        for (long j = 0; j <= d; ++j) {
            Rational acc_j = 0;
            for (long i = 0; i <= j && i <= out.q.degree(); ++i)
                acc_j += Rational(binom(j, i), binom(d, i)) * out.q.coeff(i);
            out.bernstein[static_cast<std::size_t>(j)] = to_double(acc_j);
        }
    }
    return out;
}

// A root of F in [0,1]. Exact roots carry a rational value; the rest carry a
// certified open rational enclosure containing exactly this root. Float-mode
// roots always report multiplicity 1 and may be flagged low-confidence.
struct RootRecord {
    double lo = 0.0, hi = 0.0;
    Rational qlo, qhi;
    bool exact = false;
    Rational value;
    int multiplicity = 1;
    bool low_confidence = false;
    int factor = -1;  // index of the square-free factor this root came from

    double approx() const { return exact ? to_double(value) : 0.5 * (lo + hi); }
};

struct RootSet {
    bool identically_zero = false;
    bool exact_mode = true;
    bool unresolved_cluster = false;
    std::string message;
    std::vector<RootRecord> roots;

    long count_with_multiplicity() const {
        long d = 0;
        for (const auto& r : roots) d += r.multiplicity;
        return d;
    }
    bool has_root_at(const Rational& v) const {
        for (const auto& r : roots)
            if (r.exact && r.value == v) return true;
        return false;
    }
};

namespace detail {

// Halves the enclosure of a simple root of `factor`, keeping the half with
// the sign change. Converts to an exact root if the midpoint hits it.
inline void refine_enclosure(RootRecord& r, const PolyQ& factor) {
    if (r.exact) return;
    const Rational mid = (r.qlo + r.qhi) / 2;
    const Rational fm = factor.eval(mid);
    if (fm == 0) {
        r.exact = true;
        r.value = mid;
        r.qlo = r.qhi = mid;
        r.lo = r.hi = to_double(mid);
        return;
    }
    if (sign_of(factor.eval(r.qlo)) * sign_of(fm) < 0)
        r.qhi = mid;
    else
        r.qlo = mid;
    r.lo = to_double(r.qlo);
    r.hi = to_double(r.qhi);
}

inline bool overlap(const RootRecord& a, const RootRecord& b) {
    return !(a.qhi <= b.qlo || b.qhi <= a.qlo);
}

}  // namespace detail

// Exact-mode root isolation over [0,1]: square-free decomposition gives the
// multiplicities, Sturm sequences give certified counts, enclosures are
// refined until pairwise disjoint so the sorted order is certain.
inline RootSet isolate_roots_exact(const CharacteristicPolynomial& f,
                                   const Rational& tol = Rational(1, Integer(1) << 60)) {
    RootSet rs;
    rs.exact_mode = true;
    if (f.q.is_zero()) {
        rs.identically_zero = true;
        return rs;
    }
    const auto factors = squarefree_decomposition(f.q);
    std::vector<PolyQ> flat = factors;
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
        if (factors[fi].degree() < 1) continue;
        for (auto& ir : isolate_roots_01(factors[fi], tol)) {
            RootRecord r;
            r.exact = ir.exact;
            r.value = ir.value;
            r.qlo = ir.lo;
            r.qhi = ir.hi;
            r.lo = to_double(ir.lo);
            r.hi = to_double(ir.hi);
            r.multiplicity = static_cast<int>(fi) + 1;
            r.factor = static_cast<int>(fi);
            rs.roots.push_back(std::move(r));
        }
    }
    // Disjointness across factors: roots are distinct (Yun factors are
    // coprime), so refinement terminates.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < rs.roots.size(); ++i)
            for (std::size_t j = i + 1; j < rs.roots.size(); ++j) {
                RootRecord &a = rs.roots[i], &b = rs.roots[j];
                if ((a.exact && b.exact) || !detail::overlap(a, b)) continue;
                if (!a.exact) detail::refine_enclosure(a, flat[static_cast<std::size_t>(a.factor)]);
                if (!b.exact) detail::refine_enclosure(b, flat[static_cast<std::size_t>(b.factor)]);
                changed = true;
            }
    }
    std::sort(rs.roots.begin(), rs.roots.end(),
              [](const RootRecord& x, const RootRecord& y) { return x.qlo + x.qhi < y.qlo + y.qhi; });
    return rs;
}

// Tolerance-mode isolation for protocols whose tables went through decimal
// rounding: grid scan of the Bernstein form plus bisection. Multiplicity is
// never claimed above 1; suspected tangencies or roots closer than tol come
// back as an explicit unresolved-cluster result.
inline RootSet isolate_roots_float(const CharacteristicPolynomial& f, double tol = 1e-12) {
    RootSet rs;
    rs.exact_mode = false;
    double scale = 0.0;
    for (double b : f.bernstein) scale = std::max(scale, std::fabs(b));
    // Tables in [0,1] give F a sup norm of order 1; anything at rounding
    // scale is the zero polynomial seen through decimal conversion.
    if (scale <= 0x1.0p-40) {
        rs.identically_zero = true;
        return rs;
    }
    const double zero_eps = scale * 0x1.0p-40;

    const int grid = 4096;
    std::vector<double> ts(grid + 1), vs(grid + 1);
    for (int i = 0; i <= grid; ++i) {
        ts[static_cast<std::size_t>(i)] = static_cast<double>(i) / grid;
        vs[static_cast<std::size_t>(i)] = f.eval_bernstein(ts[static_cast<std::size_t>(i)]);
    }
    if (*std::max_element(vs.begin(), vs.end(),
                          [](double a, double b) { return std::fabs(a) < std::fabs(b); }) == 0.0) {
        rs.identically_zero = true;
        return rs;
    }

    auto push_root = [&](double r) {
        RootRecord rec;
        rec.lo = rec.hi = r;
        rec.qlo = rec.qhi = rational_from_double(r);
        rec.multiplicity = 1;
        const double deriv = f.mono.derivative().eval(r);
        rec.low_confidence = std::fabs(deriv) < std::sqrt(scale) * 1e-6 + scale * 1e-9;
        rs.roots.push_back(rec);
    };

    // Endpoint roots by tolerance.
    if (std::fabs(vs.front()) <= zero_eps) push_root(0.0);
    if (std::fabs(vs.back()) <= zero_eps) push_root(1.0);

    for (int i = 1; i < grid; ++i) {
        const double a = vs[static_cast<std::size_t>(i)], b = vs[static_cast<std::size_t>(i + 1)];
        if (a * b < 0.0) {
            double lo = ts[static_cast<std::size_t>(i)], hi = ts[static_cast<std::size_t>(i + 1)];
            double flo = a;
            for (int it = 0; it < 200 && hi - lo > tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f.eval_bernstein(mid);
                if (fm == 0.0) { lo = hi = mid; break; }
                if (flo * fm < 0.0) hi = mid; else { lo = mid; flo = fm; }
            }
            push_root(0.5 * (lo + hi));
        }
    }
    if (vs[0] * vs[1] < 0.0 && std::fabs(vs.front()) > zero_eps) {
        // Sign change in the first cell when 0 itself is not a root.
        double lo = 0.0, hi = ts[1], flo = vs[0];
        for (int it = 0; it < 200 && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f.eval_bernstein(mid);
            if (fm == 0.0) { lo = hi = mid; break; }
            if (flo * fm < 0.0) hi = mid; else { lo = mid; flo = fm; }
        }
        push_root(0.5 * (lo + hi));
    }
    // Grid points where |F| sits at rounding scale: a sign change across the
    // neighbors is an ordinary root landing on the grid; matching signs are a
    // tangency pattern whose multiplicity parity only exact arithmetic could
    // certify, so those come back flagged instead of silently guessed.
    for (int i = 1; i < grid; ++i) {
        const double v = std::fabs(vs[static_cast<std::size_t>(i)]);
        if (v > zero_eps) continue;
        const double prod =
            vs[static_cast<std::size_t>(i - 1)] * vs[static_cast<std::size_t>(i + 1)];
        bool near_known = false;
        for (const auto& r : rs.roots)
            if (std::fabs(r.approx() - ts[static_cast<std::size_t>(i)]) < 2.0 / grid) near_known = true;
        if (prod < 0.0) {
            if (!near_known) push_root(ts[static_cast<std::size_t>(i)]);
        } else if (prod > 0.0) {
            if (!near_known) push_root(ts[static_cast<std::size_t>(i)]);
            rs.unresolved_cluster = true;
            rs.message = "tolerance-scale dip without sign change (possible even-order root)";
        } else if (ts[static_cast<std::size_t>(i)] > 0.0 && ts[static_cast<std::size_t>(i)] < 1.0) {
            rs.unresolved_cluster = true;
            rs.message = "near-zero plateau (unresolved cluster)";
        }
    }
    std::sort(rs.roots.begin(), rs.roots.end(),
              [](const RootRecord& x, const RootRecord& y) { return x.lo + x.hi < y.lo + y.hi; });
    for (std::size_t i = 0; i + 1 < rs.roots.size(); ++i)
        if (rs.roots[i + 1].approx() - rs.roots[i].approx() < tol) {
            rs.unresolved_cluster = true;
            rs.message = "roots closer than tol";
        }
    return rs;
}

inline RootSet isolate_roots(const CharacteristicPolynomial& f) {
    return f.exact ? isolate_roots_exact(f) : isolate_roots_float(f);
}

enum class ClassificationKind { identically_zero, case1_negative_top, case2_positive_top };

inline const char* to_string(ClassificationKind k) {
    switch (k) {
        case ClassificationKind::identically_zero: return "IDENTICALLY_ZERO";
        case ClassificationKind::case1_negative_top: return "CASE1_NEGATIVE_TOP";
        case ClassificationKind::case2_positive_top: return "CASE2_POSITIVE_TOP";
    }
    return "?";
}

// Sign-of-F verdict on the top interval (largest interior root, 1), the
// source opinion that makes dissemination slow, and an adversarial starting
// count at the interval midpoint. For the zero polynomial every direction is
// slow; the suggested start is then 5/8 (midpoint of the martingale escape
// interval (1/2, 3/4) used for that case).
struct Classification {
    ClassificationKind kind = ClassificationKind::identically_zero;
    double top_lo = 0.0, top_hi = 1.0;
    int z_star = 1;
    bool z_star_either = false;
    Rational suggested_x0_fraction_q = Rational(5, 8);
    double suggested_x0_fraction = 0.625;

    // Midpoint start scaled to n, clamped so the source's own opinion stays
    // consistent (z=1 forces x >= 1, z=0 forces x <= n-1).
    long suggested_x0(long n, int z) const {
        Rational xq = suggested_x0_fraction_q * n + Rational(1, 2);
        Integer fl = numerator(xq) / denominator(xq);  // floor for positive xq
        long x = fl.convert_to<long>();
        const long lo = z == 1 ? 1 : 0;
        const long hi = z == 1 ? n : n - 1;
        return std::clamp(x, lo, hi);
    }
    long suggested_x0(long n) const { return suggested_x0(n, z_star); }
};

struct AnalyzerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Classification classify(const Protocol& p) {
    const auto wf = validate(p);
    if (!wf.is_well_formed)
        throw AnalyzerError("classify: protocol is not well-formed (g0(0)=0, g1(ell)=1 required)");
    const auto F = characteristic_poly(p);
    auto rs = isolate_roots(F);
    if (rs.unresolved_cluster)
        throw AnalyzerError("classify: unresolved root cluster in tolerance mode: " + rs.message);

    Classification c;
    if (rs.identically_zero) {
        c.kind = ClassificationKind::identically_zero;
        c.z_star = 1;
        c.z_star_either = true;
        c.top_lo = 0.5;
        c.top_hi = 0.75;
        c.suggested_x0_fraction_q = Rational(5, 8);
        c.suggested_x0_fraction = 0.625;
        return c;
    }

    if (F.exact) {
        // Largest root certifiedly below 1; well-formedness guarantees the
        // root at 1 exists and isolation guarantees the order is certain.
        if (!rs.has_root_at(Rational(1)))
            throw AnalyzerError("classify: F(1) != 0 for a well-formed protocol (internal)");
        std::ptrdiff_t last_idx = -1;
        for (std::size_t i = 0; i < rs.roots.size(); ++i) {
            const auto& r = rs.roots[i];
            if (r.exact && r.value == 1) continue;
            last_idx = static_cast<std::ptrdiff_t>(i);
        }
        Rational lo_q = 0;   // boundary root at 0 always present (g0(0)=0)
        if (last_idx >= 0) {
            auto& rec = rs.roots[static_cast<std::size_t>(last_idx)];
            if (!rec.exact) {
                // Shrink the enclosure below 1 so a sign probe point exists.
                const auto factors = squarefree_decomposition(F.q);
                while (!rec.exact && rec.qhi >= 1)
                    detail::refine_enclosure(rec, factors[static_cast<std::size_t>(rec.factor)]);
            }
            lo_q = rec.exact ? rec.value : (rec.qlo + rec.qhi) / 2;
        }
        const Rational probe_hi = last_idx < 0
                                      ? Rational(1, 2)
                                      : (rs.roots[static_cast<std::size_t>(last_idx)].qhi + 1) / 2;
        const Rational fv = F.eval_exact(probe_hi);
        if (fv == 0)
            throw AnalyzerError("classify: sign probe hit a root (internal)");
        c.kind = fv < 0 ? ClassificationKind::case1_negative_top
                        : ClassificationKind::case2_positive_top;
        c.z_star = fv < 0 ? 1 : 0;
        c.z_star_either = false;
        c.top_lo = to_double(lo_q);
        c.top_hi = 1.0;
        c.suggested_x0_fraction_q = (lo_q + 1) / 2;
        c.suggested_x0_fraction = to_double(c.suggested_x0_fraction_q);
        return c;
    }

    // Tolerance mode: same geometry with double roots.
    double last_interior = 0.0;
    bool saw_one = false;
    for (const auto& r : rs.roots) {
        const double v = r.approx();
        if (v >= 1.0 - 1e-9) { saw_one = true; continue; }
        last_interior = std::max(last_interior, v);
    }
    if (!saw_one) throw AnalyzerError("classify: no root near 1 in tolerance mode");
    const double probe = 0.5 * (last_interior + 1.0);
    const double fv = F.eval_bernstein(probe);
    double scale = 0.0;
    for (double b : F.bernstein) scale = std::max(scale, std::fabs(b));
    if (std::fabs(fv) <= scale * 1e-9)
        throw AnalyzerError("classify: sign at top-interval midpoint is not resolvable");
    c.kind = fv < 0 ? ClassificationKind::case1_negative_top
                    : ClassificationKind::case2_positive_top;
    c.z_star = fv < 0 ? 1 : 0;
    c.z_star_either = false;
    c.top_lo = last_interior;
    c.top_hi = 1.0;
    c.suggested_x0_fraction = 0.5 * (last_interior + 1.0);
    c.suggested_x0_fraction_q = rational_from_double(c.suggested_x0_fraction);
    return c;
}

// ---------------------------------------------------------------------------
// Drift bracket and the coefficient-bound certificate.

// Exact per-opinion adoption probability sum_k C(ell,k) q^k (1-q)^(ell-k) g[k].
inline Rational adopt_prob_exact(const Protocol& p, int own, long x, long n) {
    if (x < 0 || x > n) throw std::invalid_argument("adopt_prob_exact: x outside [0, n]");
    const Rational q(x, n);
    Rational acc = 0;
    for (long k = 0; k <= p.ell; ++k)
        acc += Rational(binom(p.ell, k)) * rational_pow(q, k) *
               rational_pow(1 - q, p.ell - k) * p.g(own, k);
    return acc;
}

// Exact one-step expectation of the aggregated count:
// z + (x-z) P1 + (n-x-(1-z)) P0.
inline Rational expected_next_exact(const Protocol& p, long n, int z, long x) {
    const Rational P1 = adopt_prob_exact(p, 1, x, n);
    const Rational P0 = adopt_prob_exact(p, 0, x, n);
    return Rational(z) + Rational(x - z) * P1 + Rational(n - x - (1 - z)) * P0;
}

// [x + n F(x/n) - 1, x + n F(x/n) + 1]; the exact one-step expectation of the
// aggregated count always lies inside.
inline std::pair<Rational, Rational> drift_bracket_exact(const CharacteristicPolynomial& f,
                                                         long x, long n) {
    const Rational center = Rational(x) + Rational(n) * f.eval_exact(Rational(x, n));
    return {center - 1, center + 1};
}

inline std::pair<double, double> drift_bracket(const CharacteristicPolynomial& f, long x,
                                               long n) {
    const auto [lo, hi] = drift_bracket_exact(f, x, n);
    return {to_double(lo), to_double(hi)};
}

struct BetweenRootsBound {
    double c0 = 0.0;       // (max |F'| on [0,1]) / 2
    double bound = 0.0;    // c0 * (b - a)
    double sup_abs = 0.0;  // certified upper bound of |F| on [a, b]
    bool certified = false;
};

// Certificate that |F| <= C0 (b-a) between two roots a <= b, with
// C0 = max|F'|/2 over [0,1]. Range bounds come from Bernstein enclosures
// (inflated by a relative epsilon to absorb double rounding).
inline BetweenRootsBound bound_between_roots(const CharacteristicPolynomial& f, double a,
                                             double b) {
    if (!(0.0 <= a && a <= b && b <= 1.0))
        throw std::invalid_argument("bound_between_roots: need 0 <= a <= b <= 1");
    double scale = 0.0;
    for (double v : f.bernstein) scale = std::max(scale, std::fabs(v));
    const double eps = scale * 1e-9 + 1e-300;
    if (std::fabs(f.eval_bernstein(a)) > eps || std::fabs(f.eval_bernstein(b)) > eps)
        throw std::invalid_argument("bound_between_roots: endpoints are not roots");

    BetweenRootsBound out;
    if (f.mono.is_zero()) {
        out.certified = true;
        return out;
    }
    const PolyD deriv = f.mono.derivative();
    const auto bern_d = bernstein_from_monomial(deriv.c, static_cast<std::size_t>(f.nominal_degree));
    out.c0 = 0.5 * bernstein_abs_bound(bern_d);
    out.bound = out.c0 * (b - a);

    const auto restricted = compose_affine(f.mono.c, a, b - a);
    const auto bern_r = bernstein_from_monomial(restricted, static_cast<std::size_t>(f.nominal_degree));
    out.sup_abs = bernstein_abs_bound(bern_r);
    out.certified = out.sup_abs <= out.bound * (1.0 + 1e-9) + eps;
    return out;
}

}  // namespace bitdis
