#pragma once

#include "levychaos/common.hpp"
#include "levychaos/quadrature.hpp"
#include "levychaos/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace levychaos {

enum class ModelKind { Meixner, CustomTilted };

namespace detail {

/// Tilted density of the lambda family on R for lambda in [0,2):
///   w(s) = (s/2) e^{c s} / sinh(pi s / kappa),  kappa = sqrt(4-lambda^2),
///   c = (2/kappa) arctan(lambda/kappa).
/// The exponent sign is fixed so that the first moment equals +lambda,
/// matching the recurrence a_n = lambda(n+1) (and the gamma limit at
/// lambda -> 2).
inline double meixner_tilted_density(double lambda, double s) {
    const double kappa = std::sqrt(4.0 - lambda * lambda);
    const double c = (2.0 / kappa) * std::atan(lambda / kappa);
    const double x = 3.14159265358979323846 * s / kappa;
    double base;
    if (std::abs(x) < 1e-6) {
        base = (kappa / (2.0 * 3.14159265358979323846)) / (1.0 + x * x / 6.0);
    } else {
        base = (s / 2.0) / std::sinh(x);
    }
    return base * std::exp(c * s);
}

/// Decay rates of the lambda<2 tilted density: e^{-rate_pos * s} as s -> +inf,
/// e^{-rate_neg * |s|} as s -> -inf.
inline std::pair<double, double> meixner_decay_rates(double lambda) {
    const double kappa = std::sqrt(4.0 - lambda * lambda);
    const double c = (2.0 / kappa) * std::atan(lambda / kappa);
    const double a = 3.14159265358979323846 / kappa;
    return {a - c, a + c};
}

struct JumpTable {
    // single-sided inverse-CDF table: jumps on [lo, hi] with given nu-density
    std::vector<double> s;    // nodes
    std::vector<double> F;    // cumulative nu-mass up to node, F[0]=0
    std::vector<double> dens; // nu-density at nodes
    double mass() const { return F.back(); }

    template <typename Density>
    static JumpTable build(const Density& nu_density, double lo, double hi, int intervals) {
        JumpTable t;
        t.s.resize(intervals + 1);
        const double ratio = hi / lo;
        for (int i = 0; i <= intervals; ++i)
            t.s[i] = lo * std::pow(ratio, static_cast<double>(i) / intervals);
        t.F.resize(intervals + 1);
        t.dens.resize(intervals + 1);
        t.F[0] = 0.0;
        for (int i = 0; i <= intervals; ++i) t.dens[i] = nu_density(t.s[i]);
        for (int i = 0; i < intervals; ++i) {
            auto seg = gk15(nu_density, t.s[i], t.s[i + 1]);
            t.F[i + 1] = t.F[i] + seg.value;
        }
        return t;
    }

    /// Quantile by cubic Hermite interpolation of s(F) with slopes 1/density.
    double quantile(double u) const {
        const double target = u * F.back();
        size_t lo = 0, hi = F.size() - 1;
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (F[mid] <= target) lo = mid; else hi = mid;
        }
        const double h = F[hi] - F[lo];
        if (h <= 0) return s[lo];
        const double t = (target - F[lo]) / h;
        const double m0 = h / std::max(dens[lo], 1e-300);
        const double m1 = h / std::max(dens[hi], 1e-300);
        const double t2 = t * t, t3 = t2 * t;
        double v = (2 * t3 - 3 * t2 + 1) * s[lo] + (t3 - 2 * t2 + t) * m0 +
                   (-2 * t3 + 3 * t2) * s[hi] + (t3 - t2) * m1;
        return std::clamp(v, s[lo], s[hi]);
    }
};

} // namespace detail

/// A Levy measure nu with tilted probability measure nu~(ds) = s^2 nu(ds),
/// its moment and truncated-integral caches, and (for the Meixner family)
/// its jump sampler. Immutable after construction.
struct LevyModel {
    ModelKind kind = ModelKind::Meixner;
    double lambda = 0.0;
    double c_const = 0.0;       // integral of s nu(ds) for lambda >= 2, else 0
    double truncation_eps = 0.0;
    int max_moment_order = 24;

    // Pascal family data (lambda > 2)
    double pascal_p = 0.0;
    double pascal_step = 0.0;   // sqrt(lambda^2 - 4)

    std::vector<double> tilted_moments;  // m_0..m_max, numeric path
    std::vector<double> monomial_trunc;  // monomial_trunc[k] = int_{|s|>eps} s^k nu(ds), k=1..max
    double tilted_mass_trunc = 0.0;      // int_{|s|>eps} s^2 nu(ds) = nu~(|s|>eps)
    double centering_trunc = 0.0;        // int_{|s|>eps} s nu(ds) (pathwise centering, lambda<2)
    double bias_bound = 0.0;             // int_{|s|<=eps} |s| nu(ds)

    bool has_sampler = false;
    std::shared_ptr<const detail::JumpTable> table_pos, table_neg;
    std::vector<double> pascal_cdf;      // cumulative atom masses of nu

    bool truncated() const { return kind == ModelKind::Meixner && lambda < 2.0; }

    /// Sigma coefficient inside the pathwise omega: 0 for lambda >= 2
    /// (uncentered), -centering for the centered truncated case.
    double omega_sigma_coeff() const {
        return (kind == ModelKind::Meixner && lambda < 2.0) ? -centering_trunc : 0.0;
    }
};

/// int s^k nu~(ds) by the numeric path: factorial (lambda=2), series (lambda>2),
/// adaptive quadrature (lambda<2).
inline double tilted_moment_numeric(double lambda, int k) {
    if (lambda == 2.0) return factorial(k + 1);
    if (lambda > 2.0) {
        const double u = std::sqrt(lambda * lambda - 4.0);
        const double p = (lambda - u) / (lambda + u);
        double acc = 0.0;
        for (int m = 1; m < 4000; ++m) {
            const double t = std::pow(u * m, k) * (lambda * lambda - 4.0) * std::pow(p, m) * m;
            acc += t;
            if (m > 8 && std::abs(t) < 1e-18 * std::abs(acc)) return acc;
        }
        throw numeric_error("tilted_moment: Pascal series did not converge");
    }
    auto [rp, rn] = detail::meixner_decay_rates(lambda);
    const double hi = (80.0 + 12.0 * k) / rp;
    const double lo = -(80.0 + 12.0 * k) / rn;
    return integrate(
        [&](double s) { return std::pow(s, k) * detail::meixner_tilted_density(lambda, s); }, lo,
        hi, 1e-13);
}

/// Exact rational moments of nu~_lambda for rational lambda, all k <= kmax.
/// Derived from the closed-form Laplace transform (kappa^2/4) sec^2(kappa(z+c)/2):
/// m_k = (kappa^2/4)(kappa/2)^k Q_k(T0) with Q_{k+1} = Q_k' (1+T^2), T0 = lambda/kappa,
/// which collapses to a polynomial in lambda with rational coefficients.
inline std::vector<Rational> exact_tilted_moments(const Rational& lambda, int kmax) {
    std::vector<Rational> out(kmax + 1);
    if (lambda == 2) {
        for (int k = 0; k <= kmax; ++k) out[k] = big_factorial(k + 2) / 2; // (k+1)!
        return out;
    }
    const Rational kappa2 = 4 - lambda * lambda;
    const Rational t0sq = lambda * lambda / kappa2;
    // Q polynomials with BigInt coefficients, ascending powers of T
    std::vector<BigInt> q = {1, 0, 1}; // 1 + T^2
    Rational two_pow = 1;
    for (int k = 0; k <= kmax; ++k) {
        // evaluate (kappa/2)^k Q_k(T0) * kappa^2/4 as a rational:
        // term b: q_b * lambda^b * kappa2^{(k-b)/2} / 2^k, with b = k mod 2 parity
        Rational acc = 0;
        for (int b = static_cast<int>(q.size()) - 1; b >= 0; --b) {
            if (q[b] == 0) continue;
            if ((k - b) % 2 != 0) continue;
            Rational term = Rational(q[b]) * rational_pow(lambda, b) *
                            rational_pow(kappa2, (k - b) / 2);
            acc += term;
        }
        out[k] = kappa2 / 4 * acc / two_pow;
        two_pow *= 2;
        // Q_{k+1} = Q_k' (1 + T^2)
        std::vector<BigInt> dq(q.size() >= 1 ? q.size() - 1 : 0, 0);
        for (size_t b = 1; b < q.size(); ++b) dq[b - 1] = q[b] * static_cast<int>(b);
        std::vector<BigInt> nq(dq.size() + 2, 0);
        for (size_t b = 0; b < dq.size(); ++b) {
            nq[b] += dq[b];
            nq[b + 2] += dq[b];
        }
        q = std::move(nq);
    }
    return out;
}

namespace detail {

/// int_{|s|>eps} s^k nu(ds) = int_{|s|>eps} s^{k-2} nu~(ds), k >= 1.
inline double monomial_levy_integral(double lambda, int k, double eps) {
    if (k < 1) throw std::domain_error("monomial_levy_integral: k must be >= 1");
    if (lambda > 2.0) {
        const double u = std::sqrt(lambda * lambda - 4.0);
        const double p = (lambda - u) / (lambda + u);
        double acc = 0.0;
        for (int m = 1; m < 4000; ++m) {
            const double site = u * m;
            if (site <= eps) continue;
            const double t = std::pow(site, k) * std::pow(p, m) / m;
            acc += t;
            if (m > 8 && std::abs(t) < 1e-18 * (std::abs(acc) + 1e-300)) return acc;
        }
        throw numeric_error("monomial_levy_integral: Pascal series did not converge");
    }
    if (lambda == 2.0) {
        // int_eps^inf s^{k-1} e^{-s} ds = (k-1)! e^{-eps} sum_{j<k} eps^j/j!
        double sum = 0.0, term = 1.0;
        for (int j = 0; j < k; ++j) {
            sum += term;
            term *= eps / (j + 1);
        }
        return factorial(k - 1) * std::exp(-eps) * sum;
    }
    if (k == 1 && eps <= 0.0)
        throw std::domain_error("monomial_levy_integral: divergent at eps=0 for lambda<2");
    auto [rp, rn] = meixner_decay_rates(lambda);
    const double hi = (80.0 + 12.0 * k) / rp;
    const double lo = (80.0 + 12.0 * k) / rn;
    auto f = [&](double s) {
        return std::pow(s, k - 2) * meixner_tilted_density(lambda, s);
    };
    double acc = integrate(f, std::max(eps, 1e-300), hi, 1e-12);
    // negative side: substitute s -> -s
    auto g = [&](double s) {
        return std::pow(-s, k - 2) * meixner_tilted_density(lambda, -s);
    };
    acc += integrate(g, std::max(eps, 1e-300), lo, 1e-12);
    return acc;
}

} // namespace detail

/// nu({|s| > eps}).
inline double levy_total_mass(const LevyModel& model, double eps) {
    if (model.kind != ModelKind::Meixner)
        throw std::invalid_argument("levy_total_mass: model has no measure representation");
    const double lambda = model.lambda;
    if (lambda > 2.0) {
        double acc = 0.0;
        for (int m = 1; m < 4000; ++m) {
            if (model.pascal_step * m <= eps) continue;
            const double t = std::pow(model.pascal_p, m) / m;
            acc += t;
            if (std::abs(t) < 1e-18 * (std::abs(acc) + 1e-300)) return acc;
        }
        return acc;
    }
    if (eps <= 0.0)
        throw std::domain_error("levy_total_mass: infinite total mass at eps=0");
    if (lambda == 2.0) {
        const double hi = 80.0;
        return integrate([](double s) { return std::exp(-s) / s; }, eps, hi, 1e-12);
    }
    auto [rp, rn] = detail::meixner_decay_rates(lambda);
    auto f = [&](double s) { return detail::meixner_tilted_density(lambda, s) / (s * s); };
    return integrate(f, eps, 90.0 / rp, 1e-12) +
           integrate([&](double s) { return f(-s); }, eps, 90.0 / rn, 1e-12);
}

/// Reported truncation error of dropping jumps with |s| <= eps.
/// lambda = 2 (uncentered sums): L1 bias int_{|s|<=eps} |s| nu(ds) = 1 - e^{-eps}.
/// lambda < 2 (centered sums): the L1 bias is infinite -- that is why the
/// process is centered -- so the reported figure is the L2 error
/// int_{|s|<=eps} s^2 nu(ds) = nu~([-eps,eps]), the variance of the dropped
/// compensated jumps per unit sigma-mass.
inline double truncation_bias(const LevyModel& model, double eps) {
    if (model.kind != ModelKind::Meixner) return 0.0;
    const double lambda = model.lambda;
    if (lambda > 2.0 || eps <= 0.0) return 0.0;
    if (lambda == 2.0) return 1.0 - std::exp(-eps);
    auto w = [&](double s) { return detail::meixner_tilted_density(lambda, s); };
    return integrate(w, 0.0, eps, 1e-11, 1e-18) +
           integrate([&](double s) { return w(-s); }, 0.0, eps, 1e-11, 1e-18);
}

/// Build the model of the lambda family. Defaults: eps = 1e-4 for lambda <= 2
/// (small-jump truncation for sampling), no truncation needed for Pascal.
inline LevyModel meixner_model(double lambda, std::optional<double> eps = std::nullopt,
                               int max_moment_order = 24) {
    if (lambda < 0.0) throw std::domain_error("meixner_model: lambda must be nonnegative");
    LevyModel m;
    m.kind = ModelKind::Meixner;
    m.lambda = lambda;
    m.max_moment_order = max_moment_order;
    if (lambda >= 2.0) {
        const double u = std::sqrt(lambda * lambda - 4.0);
        m.c_const = 2.0 / (lambda + u);
    } else {
        m.c_const = 0.0;
    }
    if (lambda > 2.0) {
        m.pascal_step = std::sqrt(lambda * lambda - 4.0);
        m.pascal_p = (lambda - m.pascal_step) / (lambda + m.pascal_step);
        m.truncation_eps = eps.value_or(0.0);
        if (m.truncation_eps >= m.pascal_step)
            throw std::domain_error("meixner_model: eps must stay below the smallest atom");
    } else {
        m.truncation_eps = eps.value_or(1e-4);
        if (m.truncation_eps <= 0.0)
            throw std::domain_error("meixner_model: eps must be positive for lambda <= 2");
    }

    m.tilted_moments.resize(max_moment_order + 1);
    for (int k = 0; k <= max_moment_order; ++k)
        m.tilted_moments[k] = tilted_moment_numeric(lambda, k);

    m.monomial_trunc.assign(max_moment_order + 1, 0.0);
    for (int k = 1; k <= max_moment_order; ++k)
        m.monomial_trunc[k] = detail::monomial_levy_integral(lambda, k, m.truncation_eps);
    m.tilted_mass_trunc = m.monomial_trunc[2];
    m.centering_trunc = m.monomial_trunc[1];
    m.bias_bound = truncation_bias(m, m.truncation_eps);

    // sampler
    m.has_sampler = true;
    if (lambda > 2.0) {
        double acc = 0.0;
        for (int k = 1; k < 4000; ++k) {
            const double w = std::pow(m.pascal_p, k) / k;
            acc += w;
            m.pascal_cdf.push_back(acc);
            if (w < 1e-18 * acc) break;
        }
    } else if (lambda == 2.0) {
        auto nu = [](double s) { return std::exp(-s) / s; };
        m.table_pos = std::make_shared<const detail::JumpTable>(
            detail::JumpTable::build(nu, m.truncation_eps, 60.0, 4096));
    } else {
        auto [rp, rn] = detail::meixner_decay_rates(lambda);
        auto nup = [lambda](double s) {
            return detail::meixner_tilted_density(lambda, s) / (s * s);
        };
        auto nun = [lambda](double s) {
            return detail::meixner_tilted_density(lambda, -s) / (s * s);
        };
        m.table_pos = std::make_shared<const detail::JumpTable>(
            detail::JumpTable::build(nup, m.truncation_eps, 90.0 / rp, 4096));
        m.table_neg = std::make_shared<const detail::JumpTable>(
            detail::JumpTable::build(nun, m.truncation_eps, 90.0 / rn, 4096));
    }
    return m;
}

/// Moments-only model: algebraic operations accept it, simulation rejects it.
inline LevyModel custom_tilted(std::vector<double> moments) {
    if (moments.empty()) throw std::invalid_argument("custom_tilted: need at least m_0");
    LevyModel m;
    m.kind = ModelKind::CustomTilted;
    m.has_sampler = false;
    m.max_moment_order = static_cast<int>(moments.size()) - 1;
    m.tilted_moments = std::move(moments);
    m.tilted_mass_trunc = m.tilted_moments.size() > 2 ? m.tilted_moments[2] : 0.0;
    return m;
}

/// int s^k nu~(ds), from the construction-time cache.
inline double tilted_moment(const LevyModel& model, int k) {
    if (k < 0) throw std::domain_error("tilted_moment: negative order");
    if (k >= static_cast<int>(model.tilted_moments.size()))
        throw std::domain_error("tilted_moment: beyond cached max_moment_order");
    return model.tilted_moments[k];
}

/// int_{|s|>eps} s^k nu(ds) at the model's own truncation.
inline double monomial_trunc_integral(const LevyModel& model, int k) {
    if (model.kind != ModelKind::Meixner)
        throw std::invalid_argument("monomial_trunc_integral: model has no measure");
    if (k < 1 || k >= static_cast<int>(model.monomial_trunc.size()))
        throw std::domain_error("monomial_trunc_integral: order out of cached range");
    return model.monomial_trunc[k];
}

// ---- flat key=value descriptor ----

inline std::string to_kv(const LevyModel& m) {
    std::ostringstream os;
    os.precision(17);
    if (m.kind == ModelKind::Meixner) {
        os << "kind=meixner\n"
           << "lambda=" << m.lambda << "\n"
           << "eps=" << m.truncation_eps << "\n"
           << "max_moment_order=" << m.max_moment_order << "\n";
    } else {
        os << "kind=custom_tilted\nmoments=";
        for (size_t i = 0; i < m.tilted_moments.size(); ++i) {
            if (i) os << ",";
            os << m.tilted_moments[i];
        }
        os << "\n";
    }
    return os.str();
}

inline LevyModel model_from_kv(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw std::invalid_argument("model_from_kv: malformed line: " + line);
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    for (const auto& [k, v] : kv)
        if (k != "kind" && k != "lambda" && k != "eps" && k != "max_moment_order" &&
            k != "moments")
            throw std::invalid_argument("model_from_kv: unknown key: " + k);
    const std::string kind = kv.at("kind");
    if (kind == "meixner") {
        std::optional<double> eps;
        if (kv.count("eps")) eps = std::stod(kv.at("eps"));
        int maxo = kv.count("max_moment_order") ? std::stoi(kv.at("max_moment_order")) : 24;
        double lambda = std::stod(kv.at("lambda"));
        if (lambda > 2.0 && eps && *eps == 0.0) eps.reset();
        return meixner_model(lambda, eps, maxo);
    }
    if (kind == "custom_tilted") {
        std::vector<double> moments;
        std::istringstream ms(kv.at("moments"));
        std::string tok;
        while (std::getline(ms, tok, ',')) moments.push_back(std::stod(tok));
        return custom_tilted(std::move(moments));
    }
    throw std::invalid_argument("model_from_kv: unknown kind: " + kind);
}

} // namespace levychaos
