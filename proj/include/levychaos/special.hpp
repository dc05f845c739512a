#pragma once

#include "levychaos/common.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace levychaos {

/// Regularized lower incomplete gamma P(a,x); Q(a,x) = 1 - P(a,x).
/// Series for x < a+1, Lentz continued fraction otherwise.
inline double gamma_p(double a, double x) {
    if (a <= 0.0) throw std::domain_error("gamma_p: a must be positive");
    if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16)
                return sum * std::exp(-x + a * std::log(x) - lg);
        }
        throw numeric_error("gamma_p: series did not converge");
    }
    // continued fraction for Q
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            const double q = std::exp(-x + a * std::log(x) - lg) * h;
            return 1.0 - q;
        }
    }
    throw numeric_error("gamma_p: continued fraction did not converge");
}

inline double gamma_q(double a, double x) { return 1.0 - gamma_p(a, x); }

/// log Gamma(z) for complex z with Re(z) > 0 (Lanczos, g=7, 9 terms).
inline std::complex<double> log_gamma(std::complex<double> z) {
    static const double coef[9] = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection
        const double pi = 3.14159265358979323846;
        return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    }
    z -= 1.0;
    std::complex<double> x = coef[0];
    for (int i = 1; i < 9; ++i) x += coef[i] / (z + static_cast<double>(i));
    const std::complex<double> t = z + 7.5;
    return 0.5 * std::log(2.0 * 3.14159265358979323846) + (z + 0.5) * std::log(t) - t +
           std::log(x);
}

/// |Gamma(a+ib)|^2 via Lanczos.
inline double abs_gamma_sq(double a, double b) {
    return std::exp(2.0 * log_gamma(std::complex<double>(a, b)).real());
}

/// One-sample Kolmogorov-Smirnov statistic sup|F_n - F| for sorted samples
/// against cdf values evaluated at those samples.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max(d, std::max((i + 1) / n - F, F - i / n));
    }
    return d;
}

/// Asymptotic KS critical value at significance alpha: sqrt(-ln(alpha/2)/2)/sqrt(n).
inline double ks_critical_value(size_t n, double alpha) {
    if (n < 35) throw std::domain_error("ks_critical_value: needs n >= 35");
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

/// Chi-square upper critical value: smallest x with Q(df/2, x/2) <= alpha.
inline double chi_square_critical(int df, double alpha) {
    double lo = 0.0, hi = df + 10.0;
    while (gamma_q(df / 2.0, hi / 2.0) > alpha) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (gamma_q(df / 2.0, mid / 2.0) > alpha) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace levychaos
