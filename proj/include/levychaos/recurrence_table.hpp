#pragma once

#include "levychaos/common.hpp"
#include "levychaos/levy_model.hpp"

#include <cmath>
#include <iostream>
#include <span>
#include <sstream>
#include <vector>

namespace levychaos {

/// Three-term recurrence data of the monic orthogonal system of nu~, together
/// with the coefficient triangles of Pt_0..Pt_N and of the Teugels polynomials
/// P_m(s) = s Pt_{m-1}(s), m = 1..N+1, and the norms ||P_m||^2_{L2(nu)}.
///
///   s Pt_n = Pt_{n+1} + a_n Pt_n + b_n Pt_{n-1},       n = 0..N-1
///   s P_m  = P_{m+1} + a_{m-1} P_m + b_{m-1} P_{m-1},  P_0 := 0
struct RecurrenceTable {
    int max_order = 0;               // N
    std::vector<double> a;           // a[n] = a_n, n = 0..N-1
    std::vector<double> b;           // b[n] = b_n, n = 0..N-1 (b[0] unused, = 0)
    double tilted_mass = 1.0;        // m_0 of nu~
    std::vector<std::vector<double>> ptilde_coeffs; // [n] = coeffs of Pt_n, ascending, size n+1
    std::vector<std::vector<double>> p_coeffs;      // [m-1] = coeffs of P_m, ascending, size m+1
    std::vector<double> norms;       // norms[m-1] = ||P_m||^2 = ||Pt_{m-1}||^2_{nu~}, m = 1..N

    double norm_sq(int m) const {
        if (m < 1 || m > static_cast<int>(norms.size()))
            throw std::domain_error("RecurrenceTable: norm order out of range");
        return norms[m - 1];
    }

    std::span<const double> norms_sq() const { return norms; }

    /// Pt_n(s) by the recurrence (stable; the coefficient tables are for
    /// identities, not evaluation).
    double eval_ptilde(int n, double s) const {
        if (n < 0) return 0.0;
        double pm1 = 0.0, p = 1.0;
        for (int j = 0; j < n; ++j) {
            const double nxt = (s - a[j]) * p - (j >= 1 ? b[j] : 0.0) * pm1;
            pm1 = p;
            p = nxt;
        }
        return p;
    }

    double eval_p(int m, double s) const {
        if (m == 0) return 0.0;
        return s * eval_ptilde(m - 1, s);
    }

    void build_triangles() {
        ptilde_coeffs.assign(max_order + 1, {});
        ptilde_coeffs[0] = {1.0};
        if (max_order >= 1) {
            ptilde_coeffs[1] = {-a[0], 1.0};
            for (int n = 1; n < max_order; ++n) {
                std::vector<double> nxt(n + 2, 0.0);
                const auto& cur = ptilde_coeffs[n];
                const auto& prv = ptilde_coeffs[n - 1];
                for (int j = 0; j <= n; ++j) {
                    nxt[j + 1] += cur[j];
                    nxt[j] -= a[n] * cur[j];
                }
                for (int j = 0; j <= n - 1; ++j) nxt[j] -= b[n] * prv[j];
                ptilde_coeffs[n + 1] = std::move(nxt);
            }
        }
        p_coeffs.assign(max_order + 1, {});
        for (int m = 1; m <= max_order + 1; ++m) {
            const auto& pt = ptilde_coeffs[m - 1];
            std::vector<double> c(m + 1, 0.0);
            for (int j = 0; j < m; ++j) c[j + 1] = pt[j];
            p_coeffs[m - 1] = std::move(c);
        }
    }
};

/// Closed-form Meixner table: a_n = lambda(n+1), b_n = n(n+1),
/// ||P_m||^2 = (m-1)! m!.
inline RecurrenceTable from_meixner(double lambda, int N) {
    if (lambda < 0.0) throw std::domain_error("from_meixner: lambda must be nonnegative");
    if (N < 1) throw std::domain_error("from_meixner: need N >= 1");
    if (N > 16)
        std::cerr << "from_meixner: warning: norms grow like n!(n+1)!, N=" << N
                  << " may overflow downstream\n";
    RecurrenceTable t;
    t.max_order = N;
    t.a.resize(N);
    t.b.assign(N, 0.0);
    for (int n = 0; n < N; ++n) t.a[n] = lambda * (n + 1);
    for (int n = 1; n < N; ++n) t.b[n] = static_cast<double>(n) * (n + 1);
    t.tilted_mass = 1.0;
    t.norms.resize(N);
    for (int m = 1; m <= N; ++m) t.norms[m - 1] = factorial(m - 1) * factorial(m);
    t.build_triangles();
    return t;
}

struct ExactRecurrence {
    std::vector<Rational> a, b;      // a_0..a_{N-1}; b_1..b_{N-1} at b[1..]
    std::vector<Rational> norms;     // ||Pt_n||^2, n = 0..N-1  (= ||P_{n+1}||^2)
};

/// Chebyshev moment algorithm in exact rational arithmetic. moments[k] = m_k
/// of nu~, k = 0..2N. Throws on a nonpositive Hankel form, naming the order.
inline ExactRecurrence chebyshev_recurrence(std::span<const Rational> moments, int N) {
    if (static_cast<int>(moments.size()) < 2 * N + 1)
        throw std::invalid_argument("chebyshev_recurrence: need at least 2N+1 moments");
    if (moments[0] <= 0)
        throw std::domain_error("chebyshev_recurrence: degenerate measure at order 0");
    ExactRecurrence out;
    out.a.resize(N);
    out.b.assign(N, Rational(0));
    out.norms.resize(N);
    out.a[0] = moments[1] / moments[0];
    out.norms[0] = moments[0];
    // cur holds sigma_{k-1}[l] = <Pt_{k-1}, s^l>, prev holds sigma_{k-2}
    std::vector<Rational> prev;
    std::vector<Rational> cur(moments.begin(), moments.end());
    for (int k = 1; k < N; ++k) {
        // sigma_k[l] = sigma_{k-1}[l+1] - a_{k-1} sigma_{k-1}[l] - b_{k-1} sigma_{k-2}[l]
        const int lmax = 2 * N - k;
        std::vector<Rational> nxt(lmax + 1);
        for (int l = k; l <= lmax; ++l) {
            Rational v = cur[l + 1] - out.a[k - 1] * cur[l];
            if (k >= 2) v -= out.b[k - 1] * prev[l];
            nxt[l] = v;
        }
        if (nxt[k] <= 0)
            throw std::domain_error(
                "chebyshev_recurrence: nonpositive Hankel form at order " + std::to_string(k));
        out.b[k] = nxt[k] / cur[k - 1];
        out.a[k] = nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1];
        out.norms[k] = nxt[k];
        prev = std::move(cur);
        cur = std::move(nxt);
    }
    return out;
}

/// Recurrence table of the unique monic orthogonal system of the measure with
/// the given exact moments; rationals are rounded to double only here.
inline RecurrenceTable from_moments(std::span<const Rational> moments, int N) {
    auto ex = chebyshev_recurrence(moments, N);
    RecurrenceTable t;
    t.max_order = N;
    t.a.resize(N);
    t.b.assign(N, 0.0);
    for (int n = 0; n < N; ++n) t.a[n] = to_double(ex.a[n]);
    for (int n = 1; n < N; ++n) t.b[n] = to_double(ex.b[n]);
    t.tilted_mass = to_double(moments[0]);
    t.norms.resize(N);
    for (int m = 1; m <= N; ++m) t.norms[m - 1] = to_double(ex.norms[m - 1]);
    t.build_triangles();
    return t;
}

inline RecurrenceTable from_moments(std::span<const double> moments, int N) {
    std::vector<Rational> r(moments.size());
    for (size_t i = 0; i < moments.size(); ++i) r[i] = Rational(moments[i]);
    return from_moments(r, N);
}

/// Non-leading coefficients (a_{m,1}, ..., a_{m,m-1}) of P_m, ascending power.
inline std::vector<double> teugels_coeffs(const RecurrenceTable& t, int m) {
    if (m < 1 || m > t.max_order + 1)
        throw std::domain_error("teugels_coeffs: order out of range");
    const auto& c = t.p_coeffs[m - 1];
    return std::vector<double>(c.begin() + 1, c.begin() + m);
}

/// int_{|s|>eps} P_m(s) nu(ds) at the model's truncation; centers pathwise sums.
inline double compensator(const LevyModel& model, const RecurrenceTable& t, int m) {
    if (model.kind != ModelKind::Meixner)
        throw std::invalid_argument("compensator: model has no measure representation");
    if (m < 1 || m > t.max_order + 1) throw std::domain_error("compensator: order out of range");
    if (model.lambda < 2.0 && model.truncation_eps <= 0.0)
        throw std::domain_error("compensator: divergent at eps=0 for lambda<2");
    const auto& c = t.p_coeffs[m - 1];
    double acc = 0.0;
    for (int j = 1; j <= m; ++j) acc += c[j] * model.monomial_trunc[j];
    return acc;
}

/// CSV dump: header, then n, a_n, b_n, norm_sq_n rows, then coefficient rows.
inline std::string table_csv(const RecurrenceTable& t) {
    std::ostringstream os;
    os.precision(17);
    os << "n,a_n,b_n,norm_sq_n\n";
    for (int n = 0; n < t.max_order; ++n) {
        // norm_sq_n = ||P_n||^2 for n >= 1; row 0 carries the nu~ total mass
        os << n << "," << t.a[n] << "," << (n >= 1 ? t.b[n] : 0.0) << ","
           << (n >= 1 ? t.norm_sq(n) : t.tilted_mass) << "\n";
    }
    os << "poly,degree,coefficients_ascending\n";
    for (int n = 0; n <= t.max_order; ++n) {
        os << "ptilde_" << n << "," << n;
        for (double c : t.ptilde_coeffs[n]) os << "," << c;
        os << "\n";
    }
    for (int m = 1; m <= t.max_order + 1; ++m) {
        os << "p_" << m << "," << m;
        for (double c : t.p_coeffs[m - 1]) os << "," << c;
        os << "\n";
    }
    return os.str();
}

} // namespace levychaos
