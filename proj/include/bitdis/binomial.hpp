#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "bitdis/rng.hpp"

namespace bitdis {

namespace detail {

// Sequential inversion from k = 0. Only valid while (1-q)^m stays well above
// the double underflow threshold; callers guarantee m*q <= 30 and q <= 1/2,
// which keeps pmf(0) >= exp(-60*ln2) ~ 8e-19.
inline long binomial_inversion(Rng& g, long m, double q) {
    const double s = q / (1.0 - q);
    double f = std::pow(1.0 - q, static_cast<double>(m));
    double u = uniform01(g);
    long k = 0;
    while (u > f) {
        u -= f;
        ++k;
        if (k > m) return m;  // guards against accumulated rounding at u ~ 1
        f *= s * static_cast<double>(m - k + 1) / static_cast<double>(k);
    }
    return k;
}

// Transformed rejection with squeeze (Hormann's BTRS), valid for q <= 1/2 and
// m*q >= 10. The acceptance test compares against the exact pmf ratio
// f(k)/f(mode) evaluated through lgamma, so the sampled law is the exact
// Binomial(m, q) up to double rounding.
inline long binomial_btrs(Rng& g, long m, double q) {
    const double md = static_cast<double>(m);
    const double spq = std::sqrt(md * q * (1.0 - q));
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * q;
    const double c = md * q + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(q / (1.0 - q));
    const long mode = static_cast<long>(std::floor((md + 1.0) * q));
    const double h = std::lgamma(mode + 1.0) + std::lgamma(md - mode + 1.0);

    for (;;) {
        const double u = uniform01(g) - 0.5;
        double v = uniform01(g);
        const double us = 0.5 - std::fabs(u);
        const long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + c));
        if (k < 0 || k > m) continue;
        if (us >= 0.07 && v <= vr) return k;
        v = std::log(v * alpha / (a / (us * us) + b));
        const double accept =
            h - std::lgamma(k + 1.0) - std::lgamma(md - k + 1.0) + (k - mode) * lpq;
        if (v <= accept) return k;
    }
}

}  // namespace detail

// Draws from the exact Binomial(m, q) law. Inversion when the mean is small,
// BTRS otherwise; q > 1/2 is handled by the complement symmetry.
inline long sample_binomial(Rng& g, long m, double q) {
    if (m < 0) throw std::invalid_argument("sample_binomial: negative trial count");
    if (m == 0 || q <= 0.0) return 0;
    if (q >= 1.0) return m;
    if (q > 0.5) return m - sample_binomial(g, m, 1.0 - q);
    if (static_cast<double>(m) * q <= 30.0) return detail::binomial_inversion(g, m, q);
    return detail::binomial_btrs(g, m, q);
}

}  // namespace bitdis
