#ifndef CELLSCOPE_STATS_INCOMPLETE_BETA_HPP
#define CELLSCOPE_STATS_INCOMPLETE_BETA_HPP

#include "../error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

/**
 * @file incomplete_beta.hpp
 *
 * @brief Regularized incomplete beta function and the two-sided Student t
 * tail probability built on it.
 */

namespace cellscope::stats {

inline constexpr double beta_tolerance = 1e-12;
inline constexpr int beta_max_iterations = 300;

namespace detail {

/// Tail of Stirling's series for log Gamma(z), accurate to ~1e-14 for z >= 10.
inline double stirling_correction(double z) {
    const double z2 = z * z;
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * z2)) / z2) / z2) / z2) / z;
}

/**
 * log Gamma(a + b) - log Gamma(a) for a >= 10, without the cancellation that
 * subtracting two large lgamma values would incur.
 */
inline double log_gamma_ratio(double a, double b) {
    return (a - 0.5) * std::log1p(b / a) + b * std::log(a + b) - b + stirling_correction(a + b) - stirling_correction(a);
}

}

/**
 * log B(a, b).
 */
inline double log_beta(double a, double b) {
    if (a < b) {
        std::swap(a, b);
    }
    if (a >= 10) {
        return std::lgamma(b) - detail::log_gamma_ratio(a, b);
    }
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

/// Continued fraction for I_x(a, b) by the modified Lentz method.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1;
    double d = 1 - qab * x / qap;
    if (std::abs(d) < tiny) {
        d = tiny;
    }
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= beta_max_iterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = 1 + aa / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1 / d;
        h *= d * c;

        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = 1 + aa / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1) < beta_tolerance) {
            return h;
        }
    }
    throw Error(ErrorKind::NumericError, "incomplete beta continued fraction did not converge");
}

}

/**
 * I_x(a, b), with `y = 1 - x` supplied separately so callers that know the
 * complement exactly do not lose it to rounding.
 */
inline double regularized_incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0) || !(b > 0) || !(x >= 0) || !(y >= 0)) {
        throw Error(ErrorKind::NumericError, "incomplete beta arguments out of domain");
    }
    if (x == 0) {
        return 0;
    }
    if (y == 0) {
        return 1;
    }
    const double log_x = x > 0.5 ? std::log1p(-y) : std::log(x);
    const double log_y = y > 0.5 ? std::log1p(-x) : std::log(y);
    const double front = std::exp(a * log_x + b * log_y - log_beta(a, b));
    if (x < (a + 1) / (a + b + 2)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1 - front * detail::beta_continued_fraction(b, a, y) / b;
}

inline double regularized_incomplete_beta(double a, double b, double x) {
    return regularized_incomplete_beta(a, b, x, 1 - x);
}

/**
 * Two-sided p-value of a Student t statistic: I_{df/(df+t^2)}(df/2, 1/2).
 * Infinite statistics give 0.
 */
inline double t_two_sided_p(double t, double df) {
    if (!(df > 0)) {
        throw Error(ErrorKind::InvalidDf, "degrees of freedom must be positive, got " + std::to_string(df));
    }
    if (std::isnan(t)) {
        throw Error(ErrorKind::NumericError, "t statistic is NaN");
    }
    if (std::isinf(t)) {
        return 0;
    }
    if (std::isinf(df)) {
        return std::erfc(std::abs(t) / std::sqrt(2.0));
    }
    const double t2 = t * t;
    const double denom = df + t2;
    const double p = regularized_incomplete_beta(df / 2, 0.5, df / denom, t2 / denom);
    return std::min(1.0, std::max(0.0, p));
}

}

#endif
