#pragma once

#include "levychaos/lattice.hpp"
#include "levychaos/levy_model.hpp"
#include "levychaos/multi_index.hpp"
#include "levychaos/recurrence_table.hpp"
#include "levychaos/rng.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace levychaos {

/// One draw of the Poisson random measure with intensity nu (truncated at the
/// model's eps) tensor sigma: a finite atom list {(s_i, x_i)}.
struct Realization {
    std::vector<double> jumps;  // s_i, |s_i| > eps_used
    std::vector<double> locs;   // x_i in [0, L], pairwise distinct
    std::vector<int> cells;     // cell of x_i
    double eps_used = 0.0;
    uint64_t seed = 0;

    size_t count() const { return jumps.size(); }
};

inline Realization sample_realization(const LevyModel& model, const Domain& domain,
                                      Stream& stream) {
    if (!model.has_sampler)
        throw std::invalid_argument("sample_realization: moments-only model has no sampler");
    Realization r;
    r.eps_used = model.truncation_eps;

    double mass;
    if (model.lambda > 2.0) {
        mass = model.pascal_cdf.back();
    } else if (model.lambda == 2.0) {
        mass = model.table_pos->mass();
    } else {
        mass = model.table_pos->mass() + model.table_neg->mass();
    }
    const long n = stream.poisson(mass * domain.sigma_total());

    std::vector<double> cell_cdf(domain.cells());
    double acc = 0.0;
    for (int c = 0; c < domain.cells(); ++c) cell_cdf[c] = (acc += domain.sigma_mass[c]);

    r.jumps.reserve(n);
    r.locs.reserve(n);
    r.cells.reserve(n);
    for (long i = 0; i < n; ++i) {
        double s;
        if (model.lambda > 2.0) {
            const size_t k = stream.discrete(model.pascal_cdf);
            s = model.pascal_step * static_cast<double>(k + 1);
        } else if (model.lambda == 2.0) {
            s = model.table_pos->quantile(stream.uniform());
        } else {
            const double mp = model.table_pos->mass();
            if (stream.uniform() * mass < mp)
                s = model.table_pos->quantile(stream.uniform());
            else
                s = -model.table_neg->quantile(stream.uniform());
        }
        // location: cell by mass, uniform inside; exact collisions resampled
        double x;
        for (;;) {
            const int c = static_cast<int>(stream.discrete(cell_cdf));
            x = domain.edges[c] + stream.uniform() * (domain.edges[c + 1] - domain.edges[c]);
            bool clash = false;
            for (double y : r.locs)
                if (y == x) { clash = true; break; }
            if (!clash) {
                r.jumps.push_back(s);
                r.locs.push_back(x);
                r.cells.push_back(c);
                break;
            }
        }
    }
    return r;
}

/// Teugels measure of order m on the cell set:
///   X^(m)(D) = sum_{x_i in D} s_i^m  -  sigma(D) int_{|s|>eps} s^m nu(ds).
inline double teugels_measure(const Realization& real, const LevyModel& model,
                              const RecurrenceTable& table, int m, CellSet delta,
                              const Domain& domain) {
    if (m < 1 || m > table.max_order + 1)
        throw std::domain_error("teugels_measure: order out of range");
    double sum = 0.0;
    for (size_t i = 0; i < real.count(); ++i)
        if (delta.contains(real.cells[i])) sum += std::pow(real.jumps[i], m);
    return sum - sigma_of(domain, delta) * monomial_trunc_integral(model, m);
}

/// Orthogonalized measure Y^(m)(D) = sum_{x_i in D} P_m(s_i) - sigma(D) int P_m dnu.
inline double ortho_measure(const Realization& real, const LevyModel& model,
                            const RecurrenceTable& table, int m, CellSet delta,
                            const Domain& domain) {
    double sum = 0.0;
    for (size_t i = 0; i < real.count(); ++i)
        if (delta.contains(real.cells[i])) sum += table.eval_p(m, real.jumps[i]);
    return sum - sigma_of(domain, delta) * compensator(model, table, m);
}

/// Pathwise multiple stochastic integral I^alpha(f) of the kernel
/// P_alpha(s_1..s_m) f(x_1..x_m), evaluated by inclusion-exclusion over
/// factorial measures of the atom configuration:
///
///   I_m(g) = sum_{J subset [m]} (-1)^{m-|J|} [sum over pairwise-distinct atom
///            tuples on J] x [nu x sigma integrals over the complement].
///
/// Exact for step kernels, including values on diagonal cells.
inline double ito_integral(const Realization& real, const LevyModel& model,
                           const RecurrenceTable& table, const MultiIndex& alpha,
                           const StepKernel& f, const Domain& domain) {
    const int m = alpha.length();
    if (m > 5) throw resource_error("ito_integral: |alpha| > 5");
    if (f.order != m) throw std::invalid_argument("ito_integral: kernel order must be |alpha|");
    if (m == 0) return f.scalar();
    if (model.truncated() && model.truncation_eps <= 0.0)
        throw std::domain_error("ito_integral: lambda<2 requires eps>0");

    // polynomial order per slot, canonical block order
    std::vector<int> ks;
    for (int k = 1; k <= alpha.max_order(); ++k)
        for (int i = 0; i < alpha.at(k); ++i) ks.push_back(k);

    const size_t na = real.count();
    // P_k(s_i) per slot-order and atom
    std::vector<std::vector<double>> pval(m, std::vector<double>(na));
    for (int j = 0; j < m; ++j)
        for (size_t i = 0; i < na; ++i) pval[j][i] = table.eval_p(ks[j], real.jumps[i]);
    std::vector<double> comp(m);
    for (int j = 0; j < m; ++j) comp[j] = compensator(model, table, ks[j]);

    const int C = domain.cells();
    double total = 0.0;
    std::vector<int> idx(m, 0);
    std::vector<char> used(na, 0);

    for (int mask = 0; mask < (1 << m); ++mask) {
        const int nj = __builtin_popcount(static_cast<unsigned>(mask));
        if (static_cast<size_t>(nj) > na) continue;
        const double sign = ((m - nj) % 2 == 0) ? 1.0 : -1.0;
        double comp_weight = 1.0;
        for (int j = 0; j < m; ++j)
            if (!((mask >> j) & 1)) comp_weight *= comp[j];

        // recursive sum: atom slots injectively, complement slots sigma-summed
        double acc = 0.0;
        auto rec = [&](auto&& self, int slot, double w) -> void {
            if (slot == m) {
                acc += w * f.at(idx);
                return;
            }
            if ((mask >> slot) & 1) {
                for (size_t i = 0; i < na; ++i) {
                    if (used[i]) continue;
                    used[i] = 1;
                    idx[slot] = real.cells[i];
                    self(self, slot + 1, w * pval[slot][i]);
                    used[i] = 0;
                }
            } else {
                for (int c = 0; c < C; ++c) {
                    idx[slot] = c;
                    self(self, slot + 1, w * domain.sigma_mass[c]);
                }
            }
        };
        rec(rec, 0, 1.0);
        total += sign * comp_weight * acc;
    }
    return total;
}

/// Monte Carlo mean report with single-pass stable accumulation.
struct MCReport {
    double estimate = 0.0;
    double std_error = 0.0;
    long replicates = 0;
    std::optional<double> target;

    bool within(double k_sigma) const {
        return target && std::abs(estimate - *target) <= k_sigma * std_error;
    }
};

namespace detail {

inline MCReport reduce_mean(const std::vector<double>& values,
                            std::optional<double> target = std::nullopt) {
    // Welford, sequential in replicate order regardless of how values were filled
    double mean = 0.0, m2 = 0.0;
    long n = 0;
    for (double v : values) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    MCReport r;
    r.estimate = mean;
    r.replicates = n;
    r.std_error = (n > 1) ? std::sqrt(m2 / (static_cast<double>(n) - 1) / n) : 0.0;
    r.target = target;
    return r;
}

/// Run fn(i) for i in [0, n) over the worker pool; deterministic by contract
/// because each i writes only its own slot.
template <typename Fn>
void parallel_replicates(long n, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2 * workers) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    const long chunk = std::max<long>(1, n / (8 * workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const long lo = next.fetch_add(chunk);
                if (lo >= n) return;
                const long hi = std::min(n, lo + chunk);
                for (long i = lo; i < hi; ++i) fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

} // namespace detail

/// Mean and standard error of a functional of the realization over independent
/// replicates. Replicate i draws from Stream(seed, i); the reduction order is
/// fixed, so the report is identical for any worker count.
inline MCReport mc_estimate(const std::function<double(const Realization&)>& functional,
                            const LevyModel& model, const Domain& domain, long replicates,
                            uint64_t seed, int workers = 1,
                            std::optional<double> target = std::nullopt) {
    if (replicates < 2) throw std::invalid_argument("mc_estimate: need replicates >= 2");
    std::vector<double> vals(replicates);
    detail::parallel_replicates(replicates, workers, [&](long i) {
        Stream st(seed, static_cast<uint64_t>(i));
        Realization r = sample_realization(model, domain, st);
        r.seed = seed;
        vals[i] = functional(r);
    });
    return detail::reduce_mean(vals, target);
}

/// Vector-valued variant: one pass over realizations, k statistics per draw.
inline std::vector<std::vector<double>> mc_samples(
    const std::function<void(const Realization&, std::vector<double>&)>& functional, size_t width,
    const LevyModel& model, const Domain& domain, long replicates, uint64_t seed,
    int workers = 1) {
    std::vector<std::vector<double>> vals(width, std::vector<double>(replicates));
    detail::parallel_replicates(replicates, workers, [&](long i) {
        Stream st(seed, static_cast<uint64_t>(i));
        Realization r = sample_realization(model, domain, st);
        std::vector<double> row(width, 0.0);
        functional(r, row);
        for (size_t j = 0; j < width; ++j) vals[j][i] = row[j];
    });
    return vals;
}

/// Samples of <., chi_D> with sigma(D) = sigma_delta: plain jump sums for
/// lambda >= 2, eps-truncated centered sums for lambda < 2.
inline std::vector<double> marginal_samples(const LevyModel& model, double sigma_delta,
                                            long replicates, uint64_t seed, int workers = 1) {
    if (model.kind != ModelKind::Meixner)
        throw std::invalid_argument("marginal_samples: Meixner models only");
    const Domain domain = Domain::uniform(1, sigma_delta);
    const double center = model.omega_sigma_coeff() * sigma_delta;
    std::vector<double> out(replicates);
    detail::parallel_replicates(replicates, workers, [&](long i) {
        Stream st(seed, static_cast<uint64_t>(i));
        Realization r = sample_realization(model, domain, st);
        double s = center;
        for (double j : r.jumps) s += j;
        out[i] = s;
    });
    return out;
}

/// CSV dump of realizations: replicate, s, x rows.
inline std::string realizations_csv(const LevyModel& model, const Domain& domain,
                                    long replicates, uint64_t seed) {
    std::ostringstream os;
    os.precision(17);
    os << "replicate,s,x\n";
    for (long i = 0; i < replicates; ++i) {
        Stream st(seed, static_cast<uint64_t>(i));
        Realization r = sample_realization(model, domain, st);
        for (size_t k = 0; k < r.count(); ++k)
            os << i << "," << r.jumps[k] << "," << r.locs[k] << "\n";
    }
    return os.str();
}

} // namespace levychaos
