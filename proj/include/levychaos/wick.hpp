#pragma once

#include "levychaos/multi_index.hpp"
#include "levychaos/simulate.hpp"
#include "levychaos/special.hpp"

#include <complex>
#include <map>
#include <vector>

namespace levychaos {

/// Roots of 1 + lambda z + z^2 = (1 - r1 z)(1 - r2 z): r1 r2 = 1, r1 + r2 = -lambda.
/// Real for lambda >= 2, a conjugate pair on the unit circle for lambda < 2.
/// (Named r1/r2 here; the index letter alpha is taken by the multi-indices.)
struct RootPair {
    std::complex<double> r1, r2;
};

inline RootPair root_pair(double lambda) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(lambda * lambda - 4.0, 0.0));
    return {(-lambda + disc) / 2.0, (-lambda - disc) / 2.0};
}

inline double root_pair_max_abs(double lambda) {
    const auto rp = root_pair(lambda);
    return std::max(std::abs(rp.r1), std::abs(rp.r2));
}

/// Wick power :omega^{tensor n}: of a finite atom configuration, kept in the
/// elementary-product form that the five-term recurrence preserves: each term
/// is a coefficient times a multiset of blocks, where a block pins a group of
/// coordinates either to one atom's location (AtomRef, with multiplicity) or
/// to the sigma-integrated diagonal (SigmaDiag, with multiplicity).
/// Symmetrization is implicit in the multiset representation.
struct WickTensor {
    struct Term {
        std::vector<std::pair<int, int>> atoms; // (atom index, multiplicity), sorted
        std::vector<int> sigma;                 // SigmaDiag multiplicities, sorted
        double coeff;
    };
    int order = 0;
    std::vector<Term> terms;
};

namespace detail {

using WickKey = std::pair<std::vector<std::pair<int, int>>, std::vector<int>>;
using WickMap = std::map<WickKey, double>;

inline void wick_add(WickMap& m, WickKey key, double v) {
    std::sort(key.first.begin(), key.first.end());
    std::sort(key.second.begin(), key.second.end());
    m[std::move(key)] += v;
}

/// One step of the recurrence: W_{n+1} from W_n (order n) and W_{n-1}.
///
///   W_{n+1} = append(omega) W_n - c_lambda append(SigmaDiag(1)) W_n
///             - lambda sum_blocks mult (block+1) W_n
///             - n [ append(SigmaDiag(2)) + sum_blocks mult (block+2) ] W_{n-1}
///
/// The delta terms of the recurrence raise the multiplicity of the block the
/// merged coordinate lands on, averaged over the implicit symmetrization;
/// that average is exactly "multiplicity m_k picks block k".
inline WickMap wick_step(const WickMap& wn, const WickMap& wnm1, int n,
                         const std::vector<double>& jumps, double lambda, double c_lambda,
                         double omega_sigma, size_t term_cap) {
    WickMap out;
    for (const auto& [key, coeff] : wn) {
        // append one omega coordinate: atoms, plus the centering sigma part
        for (size_t i = 0; i < jumps.size(); ++i) {
            WickKey k2 = key;
            bool found = false;
            for (auto& [ai, mult] : k2.first)
                if (ai == static_cast<int>(i)) { ++mult; found = true; break; }
            if (!found) k2.first.emplace_back(static_cast<int>(i), 1);
            wick_add(out, std::move(k2), coeff * jumps[i]);
        }
        if (omega_sigma != 0.0) {
            WickKey k2 = key;
            k2.second.push_back(1);
            wick_add(out, std::move(k2), coeff * omega_sigma);
        }
        if (c_lambda != 0.0) {
            WickKey k2 = key;
            k2.second.push_back(1);
            wick_add(out, std::move(k2), -c_lambda * coeff);
        }
        if (lambda != 0.0 && n >= 1) {
            for (size_t b = 0; b < key.first.size(); ++b) {
                WickKey k2 = key;
                const int mult = k2.first[b].second;
                k2.first[b].second += 1;
                wick_add(out, std::move(k2), -lambda * mult * coeff);
            }
            for (size_t b = 0; b < key.second.size(); ++b) {
                WickKey k2 = key;
                const int mult = k2.second[b];
                k2.second[b] += 1;
                wick_add(out, std::move(k2), -lambda * mult * coeff);
            }
        }
    }
    if (n >= 1) {
        for (const auto& [key, coeff] : wnm1) {
            {
                WickKey k2 = key;
                k2.second.push_back(2);
                wick_add(out, std::move(k2), -static_cast<double>(n) * coeff);
            }
            for (size_t b = 0; b < key.first.size(); ++b) {
                WickKey k2 = key;
                const int mult = k2.first[b].second;
                k2.first[b].second += 2;
                wick_add(out, std::move(k2), -static_cast<double>(n) * mult * coeff);
            }
            for (size_t b = 0; b < key.second.size(); ++b) {
                WickKey k2 = key;
                const int mult = k2.second[b];
                k2.second[b] += 2;
                wick_add(out, std::move(k2), -static_cast<double>(n) * mult * coeff);
            }
        }
    }
    if (out.size() > term_cap)
        throw resource_error("wick_kernel: term count exceeded cap");
    return out;
}

inline WickTensor wick_from_map(const WickMap& m, int order) {
    WickTensor w;
    w.order = order;
    w.terms.reserve(m.size());
    for (const auto& [key, coeff] : m) {
        if (coeff == 0.0) continue;
        w.terms.push_back({key.first, key.second, coeff});
    }
    return w;
}

} // namespace detail

/// :omega^{tensor n}: for the model's pathwise convention: lambda >= 2 keeps
/// the raw atoms with c_lambda inside the kernels, lambda < 2 appends the
/// centered truncated omega (c_lambda = 0).
inline WickTensor wick_kernel(const Realization& real, const LevyModel& model, int n,
                              const Domain& domain, size_t term_cap = size_t{4} << 20) {
    (void)domain;
    if (n < 0) throw std::domain_error("wick_kernel: negative order");
    detail::WickMap prev, cur;
    cur[{{}, {}}] = 1.0;
    for (int j = 0; j < n; ++j) {
        auto nxt = detail::wick_step(cur, prev, j, real.jumps, model.lambda, model.c_const,
                                     model.omega_sigma_coeff(), term_cap);
        prev = std::move(cur);
        cur = std::move(nxt);
    }
    return detail::wick_from_map(cur, n);
}

/// <:omega^{tensor n}:, f> for a step kernel f of the same order.  AtomRef
/// blocks evaluate f at the atom's cell, SigmaDiag blocks integrate the
/// repeated coordinate against sigma. f is symmetrized first; the block
/// representation only denotes symmetric measures.
inline double wick_pair(const WickTensor& w, const StepKernel& f_in, const Realization& real,
                        const Domain& domain) {
    if (f_in.order != w.order) throw std::invalid_argument("wick_pair: order mismatch");
    if (w.order == 0) {
        double acc = 0.0;
        for (const auto& t : w.terms) acc += t.coeff;
        return acc * f_in.scalar();
    }
    const StepKernel f = symmetrize(f_in);
    const int C = domain.cells();
    double total = 0.0;
    std::vector<int> idx(w.order);
    for (const auto& t : w.terms) {
        int pos = 0;
        for (const auto& [ai, mult] : t.atoms)
            for (int r = 0; r < mult; ++r) idx[pos++] = real.cells[ai];
        // sum over the sigma blocks' cells
        double acc = 0.0;
        const int nsig = static_cast<int>(t.sigma.size());
        auto rec = [&](auto&& self, int b, int base, double wgt) -> void {
            if (b == nsig) {
                acc += wgt * f.at(idx);
                return;
            }
            for (int c = 0; c < C; ++c) {
                for (int r = 0; r < t.sigma[b]; ++r) idx[base + r] = c;
                self(self, b + 1, base + t.sigma[b], wgt * domain.sigma_mass[c]);
            }
        };
        rec(rec, 0, pos, 1.0);
        total += t.coeff * acc;
    }
    return total;
}

/// <:omega^{tensor n}:, phi^{tensor n}> without forming the dense product
/// kernel; used by the generating-function sums at large n.
inline double wick_pair_power(const WickTensor& w, const StepKernel& phi, const Realization& real,
                              const Domain& domain) {
    if (phi.order != 1) throw std::invalid_argument("wick_pair_power: phi must have order 1");
    const int C = domain.cells();
    // sigma moments of phi: sum_c mass_c phi_c^m, m = 1..order
    std::vector<double> sig_pow(w.order + 1, 0.0);
    for (int m = 1; m <= w.order; ++m)
        for (int c = 0; c < C; ++c)
            sig_pow[m] += domain.sigma_mass[c] * std::pow(phi.values[c], m);
    double total = 0.0;
    for (const auto& t : w.terms) {
        double v = t.coeff;
        for (const auto& [ai, mult] : t.atoms) {
            const double pv = phi.values[real.cells[ai]];
            for (int r = 0; r < mult; ++r) v *= pv;
        }
        for (int m : t.sigma) v *= sig_pow[m];
        total += v;
    }
    return total;
}

/// Chaos expansion of the Wick monomial pairing:
///   :<omega^{tensor n}, f>: = sum_{weight(alpha)=n} R_alpha I^alpha(D_alpha f).
/// Pathwise identical to wick_pair(wick_kernel(n), f); exact for Pascal,
/// within truncation error for eps-truncated models.
inline double wick_expansion(const Realization& real, const LevyModel& model,
                             const RecurrenceTable& table, int n, const StepKernel& f,
                             const Domain& domain) {
    if (f.order != n) throw std::invalid_argument("wick_expansion: kernel order mismatch");
    double total = 0.0;
    for (const auto& alpha : enumerate_weight(n)) {
        const double r = to_double(r_alpha(alpha));
        total += r * ito_integral(real, model, table, alpha, d_alpha_apply(alpha, f), domain);
    }
    return total;
}

/// Wick (extended Fock) inner product of two order-n kernels:
///   int :<.,f>: :<.,g>: drho = n! sum_{weight=n} K_alpha <D_alpha f, D_alpha g>_sigma.
inline double wick_inner_product(const StepKernel& f, const StepKernel& g,
                                 const RecurrenceTable& table, const Domain& domain) {
    if (f.order != g.order) throw std::invalid_argument("wick_inner_product: order mismatch");
    const int n = f.order;
    if (n == 0) return f.scalar() * g.scalar();
    double total = 0.0;
    for (const auto& alpha : enumerate_weight(n)) {
        const double k = k_alpha(alpha, table.norms_sq());
        total += k * inner_product(d_alpha_apply(alpha, f), d_alpha_apply(alpha, g), domain);
    }
    return factorial(n) * total;
}

namespace detail {

/// <omega_eff, g> where omega_eff is the pathwise signed measure: atom sums
/// plus the model's centering sigma part (lambda < 2), no c_lambda.
template <typename G>
std::complex<double> omega_pair(const Realization& real, const LevyModel& model,
                                const StepKernel& phi, const Domain& domain, const G& g) {
    std::complex<double> acc = 0.0;
    for (size_t i = 0; i < real.count(); ++i)
        acc += real.jumps[i] * g(phi.values[real.cells[i]]);
    const double co = model.omega_sigma_coeff();
    if (co != 0.0)
        for (int c = 0; c < domain.cells(); ++c)
            acc += co * domain.sigma_mass[c] * g(phi.values[c]);
    return acc;
}

template <typename G>
std::complex<double> sigma_pair(const StepKernel& phi, const Domain& domain, const G& g) {
    std::complex<double> acc = 0.0;
    for (int c = 0; c < domain.cells(); ++c) acc += domain.sigma_mass[c] * g(phi.values[c]);
    return acc;
}

} // namespace detail

/// Closed form of sum_n <:omega^{tensor n}:, phi^{tensor n}>/n! .
/// lambda = 2:  exp[ -<log(1+phi)>_sigma + <omega, phi/(1+phi)> ].
/// lambda != 2: the r1/r2 form with <omega - c_lambda, log((1-r2 phi)/(1-r1 phi))>.
/// Complex arithmetic internally; the imaginary part cancels for real input.
inline double genfun_closed(const LevyModel& model, const StepKernel& phi,
                            const Realization& real, const Domain& domain) {
    if (phi.order != 1) throw std::invalid_argument("genfun_closed: phi must have order 1");
    const double lambda = model.lambda;
    double sup = 0.0;
    for (double v : phi.values) sup = std::max(sup, std::abs(v));
    if (lambda == 2.0) {
        if (sup >= 1.0) throw std::range_error("genfun_closed: need |phi| < 1 for lambda = 2");
        const auto t1 = detail::sigma_pair(phi, domain,
                                           [](double p) { return std::log(1.0 + p); });
        const auto t2 = detail::omega_pair(real, model, phi, domain,
                                           [](double p) { return p / (1.0 + p); });
        return std::exp(-t1.real() + t2.real());
    }
    const double bound = 1.0 / root_pair_max_abs(lambda);
    if (sup >= bound)
        throw std::range_error("genfun_closed: need |phi| < 1/max(|r1|,|r2|)");
    const auto [r1, r2] = root_pair(lambda);
    const std::complex<double> diff = r1 - r2;
    auto log_ratio = [&](double p) {
        return std::log((1.0 - r2 * p) / (1.0 - r1 * p));
    };
    auto log_pow = [&](double p) {
        return std::log(1.0 - r2 * p) / r2 - std::log(1.0 - r1 * p) / r1;
    };
    const auto t1 = detail::sigma_pair(phi, domain, log_pow);
    std::complex<double> t2 = detail::omega_pair(real, model, phi, domain, log_ratio);
    if (model.c_const != 0.0) t2 -= model.c_const * detail::sigma_pair(phi, domain, log_ratio);
    const std::complex<double> z = std::exp(-t1 / diff + t2 / diff);
    if (std::abs(z.imag()) > 1e-10 * (1.0 + std::abs(z.real())))
        throw numeric_error("genfun_closed: imaginary part did not cancel");
    return z.real();
}

/// Partial sum sum_{n=0}^N <:omega^{tensor n}:, phi^{tensor n}>/n! .
inline double genfun_partial_sum(const LevyModel& model, const StepKernel& phi,
                                 const Realization& real, const Domain& domain, int N) {
    if (phi.order != 1)
        throw std::invalid_argument("genfun_partial_sum: phi must have order 1");
    detail::WickMap prev, cur;
    cur[{{}, {}}] = 1.0;
    double total = 0.0, fact = 1.0;
    for (int n = 0; n <= N; ++n) {
        total += wick_pair_power(detail::wick_from_map(cur, n), phi, real, domain) / fact;
        if (n == N) break;
        auto nxt = detail::wick_step(cur, prev, n, real.jumps, model.lambda, model.c_const,
                                     model.omega_sigma_coeff(), size_t{4} << 20);
        prev = std::move(cur);
        cur = std::move(nxt);
        fact *= (n + 1);
    }
    return total;
}

/// Goodness-of-fit report for the marginal law of <., chi_D>.
struct GofReport {
    std::string test;      // "ks" or "chi_square"
    double statistic = 0.0;
    double critical = 0.0;
    long dof = 0;
    bool pass = false;
};

/// Centered marginal density of the lambda < 2 family at sigma(D) = t
/// (Meixner law; exponent sign matching the +lambda mean convention).
inline double meixner_marginal_density(double lambda, double t, double s) {
    const double kappa = std::sqrt(4.0 - lambda * lambda);
    const double at = std::atan(lambda / kappa);
    const double pref =
        std::pow(4.0 - lambda * lambda, (t - 1.0) / 2.0) / (2.0 * 3.14159265358979323846 * std::tgamma(t));
    return pref * abs_gamma_sq(t / 2.0, (s + lambda * t / 2.0) / kappa) *
           std::exp((2.0 * s + lambda * t) * at / kappa);
}

/// KS against the closed-form law for lambda <= 2, chi-square against the
/// negative-binomial weights for lambda > 2. Level is the test size.
inline GofReport marginal_gof(const LevyModel& model, double sigma_delta,
                              const std::vector<double>& samples, double level = 0.001) {
    if (model.kind != ModelKind::Meixner)
        throw std::invalid_argument("marginal_gof: Meixner models only");
    GofReport rep;
    const double lambda = model.lambda;
    if (lambda > 2.0) {
        rep.test = "chi_square";
        const double step = model.pascal_step, p = model.pascal_p;
        // negative binomial weights (1-p)^t (t)_k p^k / k! on step*k
        const double n = static_cast<double>(samples.size());
        std::vector<double> expected;
        double w = std::pow(1.0 - p, sigma_delta), poch = 1.0, kfact = 1.0;
        for (int k = 0;; ++k) {
            if (k > 0) {
                poch *= (sigma_delta + k - 1);
                kfact *= k;
            }
            const double wk = w * poch * std::pow(p, k) / kfact;
            expected.push_back(wk * n);
            if (k > 4 && wk * n < 2.5) break;
        }
        std::vector<double> observed(expected.size(), 0.0);
        for (double s : samples) {
            long k = std::lround(s / step);
            k = std::clamp<long>(k, 0, static_cast<long>(expected.size()) - 1);
            observed[k] += 1.0;
        }
        // pool the tail so every expected count is >= 5
        while (expected.size() > 2 && expected.back() < 5.0) {
            expected[expected.size() - 2] += expected.back();
            observed[observed.size() - 2] += observed.back();
            expected.pop_back();
            observed.pop_back();
        }
        // the lumped top bin absorbs all remaining mass
        double mass = 0.0;
        for (double e : expected) mass += e;
        expected.back() += n - mass;
        double chi2 = 0.0;
        for (size_t k = 0; k < expected.size(); ++k) {
            const double d = observed[k] - expected[k];
            chi2 += d * d / expected[k];
        }
        rep.statistic = chi2;
        rep.dof = static_cast<long>(expected.size()) - 1;
        rep.critical = chi_square_critical(static_cast<int>(rep.dof), level);
        rep.pass = chi2 <= rep.critical;
        return rep;
    }
    rep.test = "ks";
    std::function<double(double)> cdf;
    if (lambda == 2.0) {
        cdf = [sigma_delta](double s) { return s <= 0 ? 0.0 : gamma_p(sigma_delta, s); };
    } else {
        // numeric CDF of the centered Meixner marginal on a cached grid
        auto dens = [lambda, sigma_delta](double s) {
            return meixner_marginal_density(lambda, sigma_delta, s);
        };
        const double lo = -30.0 - 4.0 * sigma_delta, hi = 60.0 + 8.0 * sigma_delta;
        const int grid = 3000;
        auto pts = std::make_shared<std::vector<double>>(grid + 1);
        auto cum = std::make_shared<std::vector<double>>(grid + 1, 0.0);
        for (int i = 0; i <= grid; ++i) (*pts)[i] = lo + (hi - lo) * i / grid;
        for (int i = 0; i < grid; ++i)
            (*cum)[i + 1] = (*cum)[i] + detail::gk15(dens, (*pts)[i], (*pts)[i + 1]).value;
        const double total = cum->back();
        cdf = [pts, cum, total](double s) {
            if (s <= pts->front()) return 0.0;
            if (s >= pts->back()) return 1.0;
            const auto it = std::upper_bound(pts->begin(), pts->end(), s);
            const size_t i = static_cast<size_t>(it - pts->begin()) - 1;
            const double t = (s - (*pts)[i]) / ((*pts)[i + 1] - (*pts)[i]);
            return ((*cum)[i] * (1 - t) + (*cum)[i + 1] * t) / total;
        };
    }
    rep.statistic = ks_statistic(samples, cdf);
    rep.critical = ks_critical_value(samples.size(), level);
    rep.pass = rep.statistic <= rep.critical;
    return rep;
}

} // namespace levychaos
