#pragma once

#include "levychaos/common.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace levychaos {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (QUADPACK constants).
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GK15Result {
    double value;
    double error;
};

template <typename F>
GK15Result gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double x = h * gk_nodes[i];
        const double fv = f(c - x) + f(c + x);
        resk += gk_wk[i] * fv;
        if (i % 2 == 1) resg += gk_wg[i / 2] * fv;
    }
    const double fc = f(c);
    resk += gk_wk[7] * fc;
    resg += gk_wg[3] * fc;
    const double value = resk * h;
    const double err = std::abs((resk - resg) * h);
    return {value, err};
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b].
/// Throws numeric_error with diagnostics if the tolerance cannot be met.
template <typename F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 1e-14, int max_depth = 52) {
    struct Seg {
        double a, b, value, error;
        int depth;
    };
    auto first = detail::gk15(f, a, b);
    std::vector<Seg> stack{{a, b, first.value, first.error, 0}};
    double total = 0.0, total_err = 0.0, rough = std::abs(first.value);
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double tol = std::max(abs_tol, rel_tol * std::max(rough, std::abs(s.value)));
        if (s.error <= tol * std::max(1e-3, (s.b - s.a) / (b - a)) || s.error <= abs_tol) {
            total += s.value;
            total_err += s.error;
            continue;
        }
        if (s.depth >= max_depth) {
            throw numeric_error("integrate: no convergence on [" + std::to_string(s.a) + "," +
                                std::to_string(s.b) + "], err=" + std::to_string(s.error));
        }
        const double m = 0.5 * (s.a + s.b);
        auto left = detail::gk15(f, s.a, m);
        auto right = detail::gk15(f, m, s.b);
        rough = std::max(rough, std::abs(left.value) + std::abs(right.value));
        stack.push_back({s.a, m, left.value, left.error, s.depth + 1});
        stack.push_back({m, s.b, right.value, right.error, s.depth + 1});
    }
    (void)total_err;
    return total;
}

} // namespace levychaos
