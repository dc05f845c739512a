#pragma once

#include "levychaos/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace levychaos {

/// Base space X = [0,L] split into cells carrying the intensity masses sigma(cell).
struct Domain {
    std::vector<double> edges;      // C+1 boundaries, strictly increasing, edges[0]=0
    std::vector<double> sigma_mass; // C positive masses

    int cells() const { return static_cast<int>(sigma_mass.size()); }
    double length() const { return edges.back(); }
    double sigma_total() const {
        return std::accumulate(sigma_mass.begin(), sigma_mass.end(), 0.0);
    }

    int locate(double x) const {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        int i = static_cast<int>(it - edges.begin()) - 1;
        return std::clamp(i, 0, cells() - 1);
    }

    /// Equal-width cells on [0,length], total mass sigma_total split evenly.
    static Domain uniform(int cells, double sigma_total = 1.0, double length = 1.0) {
        if (cells < 1) throw std::invalid_argument("Domain: need at least one cell");
        if (sigma_total <= 0 || length <= 0)
            throw std::invalid_argument("Domain: sigma_total and length must be positive");
        Domain d;
        d.edges.resize(cells + 1);
        for (int i = 0; i <= cells; ++i) d.edges[i] = length * i / cells;
        d.sigma_mass.assign(cells, sigma_total / cells);
        return d;
    }

    static Domain with_masses(std::vector<double> masses, double length = 1.0) {
        const int c = static_cast<int>(masses.size());
        Domain d = uniform(c, 1.0, length);
        for (double m : masses)
            if (m <= 0) throw std::invalid_argument("Domain: masses must be positive");
        d.sigma_mass = std::move(masses);
        return d;
    }
};

/// Subset of cells, used as the set argument of the random measures.
struct CellSet {
    uint64_t bits = 0;
    CellSet() = default;
    explicit CellSet(uint64_t b) : bits(b) {}
    CellSet(std::initializer_list<int> ids) {
        for (int i : ids) bits |= (uint64_t{1} << i);
    }
    bool contains(int cell) const { return (bits >> cell) & 1; }
    static CellSet all(int cells) { return CellSet((uint64_t{1} << cells) - 1); }
};

inline double sigma_of(const Domain& d, CellSet set) {
    double s = 0.0;
    for (int c = 0; c < d.cells(); ++c)
        if (set.contains(c)) s += d.sigma_mass[c];
    return s;
}

/// Dense symmetric-capable step function on X^n, constant on cell boxes.
/// Order 0 is a scalar. Values are stored row-major with slot 0 slowest.
struct StepKernel {
    int order = 0;
    int cells = 1;
    std::vector<double> values;

    StepKernel() : values(1, 0.0) {}
    StepKernel(int order_, int cells_) : order(order_), cells(cells_) {
        size_t n = 1;
        for (int i = 0; i < order_; ++i) n *= cells_;
        values.assign(n, 0.0);
    }

    size_t size() const { return values.size(); }

    double scalar() const { return values[0]; }

    size_t flat(std::span<const int> idx) const {
        size_t f = 0;
        for (int i : idx) f = f * cells + static_cast<size_t>(i);
        return f;
    }

    double at(std::span<const int> idx) const { return values[flat(idx)]; }
    double& at(std::span<const int> idx) { return values[flat(idx)]; }

    StepKernel& operator+=(const StepKernel& o) {
        if (o.order != order || o.cells != cells)
            throw std::invalid_argument("StepKernel: shape mismatch in +=");
        for (size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }

    StepKernel& operator*=(double a) {
        for (double& v : values) v *= a;
        return *this;
    }

    static StepKernel constant(int order, int cells, double v) {
        StepKernel k(order, cells);
        std::fill(k.values.begin(), k.values.end(), v);
        return k;
    }

    /// Order-1 indicator of a cell set.
    static StepKernel indicator(const Domain& d, CellSet set) {
        StepKernel k(1, d.cells());
        for (int c = 0; c < d.cells(); ++c) k.values[c] = set.contains(c) ? 1.0 : 0.0;
        return k;
    }
};

inline StepKernel operator*(StepKernel k, double a) { return k *= a; }
inline StepKernel operator*(double a, StepKernel k) { return k *= a; }
inline StepKernel operator+(StepKernel a, const StepKernel& b) { return a += b; }

namespace detail {

/// Visit all index tuples of an order-n kernel.
template <typename F>
void for_each_index(int order, int cells, F&& fn) {
    std::vector<int> idx(order, 0);
    size_t total = 1;
    for (int i = 0; i < order; ++i) total *= cells;
    for (size_t f = 0; f < total; ++f) {
        fn(std::span<const int>(idx), f);
        for (int p = order - 1; p >= 0; --p) {
            if (++idx[p] < cells) break;
            idx[p] = 0;
        }
    }
}

inline void permutations(int n, std::vector<std::vector<int>>& out) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
}

} // namespace detail

/// Average of f over all slot permutations; idempotent.
inline StepKernel symmetrize(const StepKernel& f) {
    if (f.order <= 1) return f;
    std::vector<std::vector<int>> perms;
    detail::permutations(f.order, perms);
    StepKernel g(f.order, f.cells);
    std::vector<int> src(f.order);
    detail::for_each_index(f.order, f.cells, [&](std::span<const int> idx, size_t flat) {
        double acc = 0.0;
        for (const auto& p : perms) {
            for (int i = 0; i < f.order; ++i) src[i] = idx[p[i]];
            acc += f.at(src);
        }
        g.values[flat] = acc / static_cast<double>(perms.size());
    });
    return g;
}

/// L2(sigma^{\otimes n}) pairing of two equal-order kernels.
inline double inner_product(const StepKernel& f, const StepKernel& g, const Domain& d) {
    if (f.order != g.order) throw std::invalid_argument("inner_product: order mismatch");
    double acc = 0.0;
    detail::for_each_index(f.order, f.cells, [&](std::span<const int> idx, size_t flat) {
        double w = 1.0;
        for (int i : idx) w *= d.sigma_mass[i];
        acc += f.values[flat] * g.values[flat] * w;
    });
    return acc;
}

inline double norm_sq(const StepKernel& f, const Domain& d) { return inner_product(f, f, d); }

/// Symmetrize within consecutive slot groups of the given sizes (zero sizes skipped).
inline StepKernel blockwise_symmetrize(const StepKernel& f, std::span<const int> group_sizes) {
    int total = 0;
    for (int g : group_sizes) total += g;
    if (total != f.order)
        throw std::invalid_argument("blockwise_symmetrize: group sizes do not cover the order");
    if (f.order <= 1) return f;

    // all combinations of within-group permutations, as full slot maps
    std::vector<std::vector<int>> maps{std::vector<int>(f.order)};
    std::iota(maps[0].begin(), maps[0].end(), 0);
    int base = 0;
    for (int g : group_sizes) {
        if (g > 1) {
            std::vector<std::vector<int>> perms;
            detail::permutations(g, perms);
            std::vector<std::vector<int>> next;
            next.reserve(maps.size() * perms.size());
            for (const auto& m : maps)
                for (const auto& p : perms) {
                    auto m2 = m;
                    for (int i = 0; i < g; ++i) m2[base + i] = m[base + p[i]];
                    next.push_back(std::move(m2));
                }
            maps.swap(next);
        }
        base += g;
    }
    StepKernel out(f.order, f.cells);
    std::vector<int> src(f.order);
    detail::for_each_index(f.order, f.cells, [&](std::span<const int> idx, size_t flat) {
        double acc = 0.0;
        for (const auto& m : maps) {
            for (int i = 0; i < f.order; ++i) src[i] = idx[m[i]];
            acc += f.at(src);
        }
        out.values[flat] = acc / static_cast<double>(maps.size());
    });
    return out;
}

/// Tensor product, f slots first.
inline StepKernel tensor(const StepKernel& f, const StepKernel& g) {
    if (f.order > 0 && g.order > 0 && f.cells != g.cells)
        throw std::invalid_argument("tensor: cell count mismatch");
    StepKernel out(f.order + g.order, f.order > 0 ? f.cells : g.cells);
    size_t gs = g.values.size();
    for (size_t i = 0; i < f.values.size(); ++i)
        for (size_t j = 0; j < gs; ++j) out.values[i * gs + j] = f.values[i] * g.values[j];
    return out;
}

/// Multiply by phi(x_slot) cell-wise.
inline StepKernel mult_slot(const StepKernel& f, const StepKernel& phi, int slot) {
    if (phi.order != 1) throw std::invalid_argument("mult_slot: phi must have order 1");
    StepKernel out = f;
    detail::for_each_index(f.order, f.cells, [&](std::span<const int> idx, size_t flat) {
        out.values[flat] = f.values[flat] * phi.values[idx[slot]];
    });
    return out;
}

/// sigma-contraction of the first slot against phi:  sum_c mass_c phi_c f[c,...].
inline StepKernel contract_first(const StepKernel& phi, const StepKernel& f, const Domain& d) {
    if (f.order < 1) throw std::domain_error("contract_first: order must be >= 1");
    StepKernel out(f.order - 1, f.cells);
    size_t stride = out.values.size();
    for (int c = 0; c < f.cells; ++c) {
        const double w = d.sigma_mass[c] * phi.values[c];
        for (size_t j = 0; j < stride; ++j) out.values[j] += w * f.values[c * stride + j];
    }
    return out;
}

/// g(x_1,...,x_{n-1}) = f(x_1, x_1, x_2, ..., x_{n-1}): first two slots merged.
inline StepKernel merge_first_two(const StepKernel& f) {
    if (f.order < 2) throw std::domain_error("merge_first_two: order must be >= 2");
    StepKernel out(f.order - 1, f.cells);
    size_t stride = 1;
    for (int i = 0; i < f.order - 2; ++i) stride *= f.cells;
    for (int c = 0; c < f.cells; ++c) {
        const size_t src = (static_cast<size_t>(c) * f.cells + c) * stride;
        for (size_t j = 0; j < stride; ++j)
            out.values[static_cast<size_t>(c) * stride + j] = f.values[src + j];
    }
    return out;
}

/// Reorder slots: value at (x_1..x_n) taken from f at slot permutation map,
/// out(x) = f(x[map[0]], x[map[1]], ...).
inline StepKernel permute_slots(const StepKernel& f, std::span<const int> map) {
    StepKernel out(f.order, f.cells);
    std::vector<int> src(f.order);
    detail::for_each_index(f.order, f.cells, [&](std::span<const int> idx, size_t flat) {
        for (int i = 0; i < f.order; ++i) src[i] = idx[map[i]];
        out.values[flat] = f.at(src);
    });
    return out;
}

/// Move one slot to a new position, keeping the relative order of the others.
inline StepKernel move_slot(const StepKernel& f, int from, int to) {
    if (from == to) return f;
    std::vector<int> out2f;
    out2f.reserve(f.order);
    for (int i = 0; i < f.order; ++i)
        if (i != from) out2f.push_back(i);
    out2f.insert(out2f.begin() + to, from);
    std::vector<int> f2out(f.order);
    for (int q = 0; q < f.order; ++q) f2out[out2f[q]] = q;
    return permute_slots(f, f2out);
}

} // namespace levychaos
