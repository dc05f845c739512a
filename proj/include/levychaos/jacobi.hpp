#pragma once

#include "levychaos/wick.hpp"

#include <map>

namespace levychaos {

/// Element of the truncated extended Fock space: one symmetric kernel per
/// order, missing orders meaning zero.
struct KernelVector {
    std::map<int, StepKernel> comp;

    void add(int order, const StepKernel& k) {
        auto it = comp.find(order);
        if (it == comp.end()) comp.emplace(order, k);
        else it->second += k;
    }

    int top_order() const { return comp.empty() ? -1 : comp.rbegin()->first; }

    static KernelVector vacuum(int cells) {
        KernelVector v;
        StepKernel one(0, cells);
        one.values[0] = 1.0;
        v.comp.emplace(0, one);
        return v;
    }
};

/// Finite association alpha -> block-symmetric kernel of order |alpha|.
struct AlphaVector {
    std::map<MultiIndex, StepKernel> comp;

    void add(const MultiIndex& a, const StepKernel& k) {
        auto it = comp.find(a);
        if (it == comp.end()) comp.emplace(a, k);
        else it->second += k;
    }
};

/// a+(phi) f = (phi tensor f)~, the standard creation operator.
inline StepKernel create(const StepKernel& phi, const StepKernel& f) {
    if (phi.order != 1) throw std::invalid_argument("create: phi must have order 1");
    return symmetrize(tensor(phi, f));
}

/// a0(phi) f = (phi(x_1)+...+phi(x_n)) f; zero on order 0.
inline StepKernel neutral(const StepKernel& phi, const StepKernel& f) {
    if (phi.order != 1) throw std::invalid_argument("neutral: phi must have order 1");
    StepKernel out(f.order, f.cells);
    for (int j = 0; j < f.order; ++j) out += mult_slot(f, phi, j);
    return out;
}

/// a1-(phi) f = n int phi(x) f(x, .) sigma(dx), the standard annihilation operator.
inline StepKernel annihilate1(const StepKernel& phi, const StepKernel& f, const Domain& d) {
    if (f.order < 1) throw std::domain_error("annihilate1: order must be >= 1");
    StepKernel out = contract_first(phi, f, d);
    out *= static_cast<double>(f.order);
    return out;
}

/// a2-(phi) f = n(n-1) (phi(x_1) f(x_1,x_1,x_2,...))~; zero on orders 0 and 1.
inline StepKernel annihilate2(const StepKernel& phi, const StepKernel& f) {
    if (f.order <= 1) return StepKernel(std::max(f.order - 1, 0), f.cells);
    StepKernel g = mult_slot(merge_first_two(f), phi, 0);
    g *= static_cast<double>(f.order) * (f.order - 1);
    return symmetrize(g);
}

/// One application of the Jacobi field operator
///   a_lambda(phi) = a+(phi) + lambda a0(phi) + a1-(phi) + a2-(phi),
/// collected by order; three-diagonal by construction.
inline KernelVector jacobi_apply(double lambda, const StepKernel& phi, const KernelVector& v,
                                 const Domain& domain, int n_max = 16) {
    if (v.top_order() + 1 > n_max) throw resource_error("jacobi_apply: overflow past N_max");
    KernelVector out;
    for (const auto& [n, f] : v.comp) {
        out.add(n + 1, create(phi, f));
        if (lambda != 0.0 && n >= 1) {
            StepKernel nf = neutral(phi, f);
            nf *= lambda;
            out.add(n, nf);
        }
        if (n >= 1) out.add(n - 1, annihilate1(phi, f, domain));
        if (n >= 2) out.add(n - 1, annihilate2(phi, f));
    }
    return out;
}

/// Extended Fock inner product Sum_n int :<.,u_n>: :<.,v_n>: drho.
inline double fock_inner(const KernelVector& u, const KernelVector& v,
                         const RecurrenceTable& table, const Domain& domain) {
    double acc = 0.0;
    for (const auto& [n, un] : u.comp) {
        auto it = v.comp.find(n);
        if (it != v.comp.end()) acc += wick_inner_product(un, it->second, table, domain);
    }
    return acc;
}

struct ConsistencyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double scale = 1.0;
    bool pass = false;
};

/// Checks that iterating the Jacobi field on the vacuum reproduces powers of
/// the first-order Wick pairing, pathwise on one realization:
///   sum_k <:omega^k:, (a_lambda(phi)^n Omega)_k> = <:omega:, phi>^n.
inline ConsistencyReport vacuum_consistency(const LevyModel& model, const StepKernel& phi, int n,
                                            const Realization& real, const Domain& domain,
                                            double tol = 1e-9) {
    if (n < 0 || n > 5) throw std::domain_error("vacuum_consistency: n must be in [0,5]");
    KernelVector h = KernelVector::vacuum(domain.cells());
    for (int j = 0; j < n; ++j) h = jacobi_apply(model.lambda, phi, h, domain, n + 1);
    double lhs = 0.0;
    for (const auto& [k, hk] : h.comp)
        lhs += wick_pair(wick_kernel(real, model, k, domain), hk, real, domain);
    const double w1 = wick_pair(wick_kernel(real, model, 1, domain), phi, real, domain);
    const double rhs = std::pow(w1, n);
    ConsistencyReport rep;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.residual = std::abs(lhs - rhs);
    rep.scale = std::max(1.0, std::abs(rhs));
    rep.pass = rep.residual <= tol * rep.scale;
    return rep;
}

/// Expansion kernels of <.,phi> * I^alpha(f) as a finite AlphaVector, via the
/// Fock-space product route: creation adds a P_1 slot, the neutral part
/// re-expands s P_k through the shifted recurrence, annihilation contracts a
/// P_1 slot against ||P_1||^2. Pathwise exact for Pascal realizations.
inline AlphaVector multiply_first_order(const StepKernel& phi, const MultiIndex& alpha,
                                        const StepKernel& f, const LevyModel& model,
                                        const RecurrenceTable& table, const Domain& domain) {
    if (alpha.weight() > 4) throw resource_error("multiply_first_order: weight(alpha) > 4");
    if (f.order != alpha.length())
        throw std::invalid_argument("multiply_first_order: kernel order must be |alpha|");
    const int m = alpha.length();

    auto groups_of = [](const MultiIndex& a) {
        std::vector<int> g;
        for (int k = 1; k <= a.max_order(); ++k) g.push_back(a.at(k));
        if (g.empty()) g.push_back(0);
        return g;
    };
    const StepKernel fs = m > 0 ? blockwise_symmetrize(f, groups_of(alpha)) : f;

    AlphaVector out;
    // creation: new slot in front joins block 1
    {
        const MultiIndex beta = alpha.bumped(1, +1);
        out.add(beta, blockwise_symmetrize(tensor(phi, fs), groups_of(beta)));
    }
    // annihilation of a P_1 slot: coefficient alpha_1 ||P_1||^2 on nu_eps
    if (alpha.at(1) > 0) {
        const MultiIndex beta = alpha.bumped(1, -1);
        StepKernel ker = contract_first(phi, fs, domain);
        ker *= alpha.at(1) * model.tilted_mass_trunc;
        out.add(beta, beta.length() > 0 ? blockwise_symmetrize(ker, groups_of(beta)) : ker);
    }
    // neutral part: s P_k = P_{k+1} + a_{k-1} P_k + b_{k-1} P_{k-1} on each block
    for (int k = 1; k <= alpha.max_order(); ++k) {
        const int ak = alpha.at(k);
        if (ak == 0) continue;
        int jstar = 0;
        for (int j = 1; j <= k; ++j) jstar += alpha.at(j);
        --jstar; // last slot of block k
        const StepKernel base = mult_slot(fs, phi, jstar);
        {
            const MultiIndex beta = alpha.bumped(k, -1).bumped(k + 1, +1);
            StepKernel ker = base;
            ker *= static_cast<double>(ak);
            out.add(beta, blockwise_symmetrize(ker, groups_of(beta)));
        }
        {
            StepKernel ker = base;
            ker *= ak * table.a[k - 1];
            out.add(alpha, blockwise_symmetrize(ker, groups_of(alpha)));
        }
        if (k >= 2) {
            const MultiIndex beta = alpha.bumped(k, -1).bumped(k - 1, +1);
            int dest = 0;
            for (int j = 1; j <= k - 1; ++j) dest += alpha.at(j);
            StepKernel ker = move_slot(base, jstar, dest);
            ker *= ak * table.b[k - 1];
            out.add(beta, blockwise_symmetrize(ker, groups_of(beta)));
        }
    }
    return out;
}

} // namespace levychaos
