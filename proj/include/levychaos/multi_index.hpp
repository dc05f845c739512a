#pragma once

#include "levychaos/common.hpp"
#include "levychaos/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <span>
#include <vector>

namespace levychaos {

/// Finite-support sequence (alpha_1, alpha_2, ...) of nonnegative integers.
/// alpha_k counts order-k polynomial factors; length() = #factors, weight() = degree.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int e : entries_)
            if (e < 0) throw std::invalid_argument("MultiIndex: negative entry");
        trim();
    }

    int length() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

    int weight() const {
        int w = 0;
        for (size_t i = 0; i < entries_.size(); ++i) w += static_cast<int>(i + 1) * entries_[i];
        return w;
    }

    int max_order() const { return static_cast<int>(entries_.size()); }

    /// alpha_k, 1-based.
    int at(int k) const {
        return (k >= 1 && k <= max_order()) ? entries_[k - 1] : 0;
    }

    const std::vector<int>& entries() const { return entries_; }

    MultiIndex bumped(int k, int delta) const {
        std::vector<int> e = entries_;
        if (static_cast<int>(e.size()) < k) e.resize(k, 0);
        e[k - 1] += delta;
        if (e[k - 1] < 0) throw std::domain_error("MultiIndex: bump below zero");
        return MultiIndex(std::move(e));
    }

    bool operator==(const MultiIndex& o) const { return entries_ == o.entries_; }
    bool operator<(const MultiIndex& o) const { return entries_ < o.entries_; }

    std::string str() const {
        std::string s = "(";
        for (size_t i = 0; i < entries_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(entries_[i]);
        }
        return s + ")";
    }

private:
    void trim() {
        while (!entries_.empty() && entries_.back() == 0) entries_.pop_back();
    }
    std::vector<int> entries_;
};

/// All alpha with weight n, ordered by the underlying partition written with
/// decreasing parts (so singletons-only comes first and (n) itself last).
inline std::vector<MultiIndex> enumerate_weight(int n) {
    if (n < 0) throw std::domain_error("enumerate_weight: negative weight");
    std::vector<int> parts;
    std::vector<MultiIndex> acc;
    // iterate by largest part ascending, then recurse on the remainder
    for (int big = 1; big <= n; ++big) {
        parts.assign(1, big);
        auto sub = [&](auto&& self, int rem, int max_part) -> void {
            if (rem == 0) {
                int hi = 0;
                for (int p : parts) hi = std::max(hi, p);
                std::vector<int> e(hi, 0);
                for (int p : parts) e[p - 1] += 1;
                acc.emplace_back(std::move(e));
                return;
            }
            for (int k = 1; k <= std::min(rem, max_part); ++k) {
                parts.push_back(k);
                self(self, rem - k, k);
                parts.pop_back();
            }
        };
        sub(sub, n - big, big);
    }
    if (n == 0) acc.emplace_back(std::vector<int>{});
    return acc;
}

/// Number of set partitions of weight(alpha) elements with alpha_k blocks of size k:
/// n! / prod_k alpha_k! (k!)^{alpha_k}. Exact.
inline BigInt r_alpha(const MultiIndex& alpha) {
    const int n = alpha.weight();
    BigInt r = big_factorial(n);
    for (int k = 1; k <= alpha.max_order(); ++k) {
        const int ak = alpha.at(k);
        if (ak == 0) continue;
        BigInt den = big_factorial(ak);
        BigInt kf = big_factorial(k);
        for (int i = 0; i < ak; ++i) den *= kf;
        r /= den;
    }
    return r;
}

/// Wick norm coefficient: n!/(alpha_1! alpha_2! ...) prod_k (||P_k||^2/(k!)^2)^{alpha_k},
/// with n = weight(alpha). norms_sq[k-1] = ||P_k||^2.
inline double k_alpha(const MultiIndex& alpha, std::span<const double> norms_sq) {
    const int n = alpha.weight();
    if (alpha.max_order() > static_cast<int>(norms_sq.size()))
        throw std::invalid_argument("k_alpha: norms_sq too short");
    double v = factorial(n);
    for (int k = 1; k <= alpha.max_order(); ++k) {
        const int ak = alpha.at(k);
        if (ak == 0) continue;
        v /= factorial(ak);
        const double ratio = norms_sq[k - 1] / (factorial(k) * factorial(k));
        for (int i = 0; i < ak; ++i) v *= ratio;
    }
    return v;
}

inline Rational k_alpha_exact(const MultiIndex& alpha, std::span<const Rational> norms_sq) {
    const int n = alpha.weight();
    Rational v = big_factorial(n);
    for (int k = 1; k <= alpha.max_order(); ++k) {
        const int ak = alpha.at(k);
        if (ak == 0) continue;
        v /= big_factorial(ak);
        const Rational ratio = norms_sq[k - 1] / Rational(big_factorial(k) * big_factorial(k));
        for (int i = 0; i < ak; ++i) v *= ratio;
    }
    return v;
}

/// Meixner reduction of k_alpha: n! / prod_k alpha_k! k^{alpha_k}.
inline Rational k_alpha_meixner(const MultiIndex& alpha) {
    const int n = alpha.weight();
    Rational v = big_factorial(n);
    for (int k = 1; k <= alpha.max_order(); ++k) {
        const int ak = alpha.at(k);
        if (ak == 0) continue;
        v /= big_factorial(ak);
        for (int i = 0; i < ak; ++i) v /= k;
    }
    return v;
}

/// Chaos norm constant: prod_k (||P_k||^2)^{alpha_k}.
inline double c_alpha(const MultiIndex& alpha, std::span<const double> norms_sq) {
    if (alpha.max_order() > static_cast<int>(norms_sq.size()))
        throw std::invalid_argument("c_alpha: norms_sq too short");
    double v = 1.0;
    for (int k = 1; k <= alpha.max_order(); ++k)
        for (int i = 0; i < alpha.at(k); ++i) v *= norms_sq[k - 1];
    return v;
}

/// Diagonal embedding: g(x_1..x_{|alpha|}) = f with block-wise repeated arguments,
/// alpha_1 slots passed once, then alpha_2 slots doubled, alpha_3 tripled, ...
inline StepKernel d_alpha_apply(const MultiIndex& alpha, const StepKernel& f) {
    if (f.order != alpha.weight())
        throw std::invalid_argument("d_alpha_apply: kernel order must equal weight(alpha)");
    const int m = alpha.length();
    StepKernel g(m, f.cells);
    std::vector<int> full(f.order);
    detail::for_each_index(m, f.cells, [&](std::span<const int> idx, size_t flat) {
        int pos = 0, slot = 0;
        for (int k = 1; k <= alpha.max_order(); ++k)
            for (int i = 0; i < alpha.at(k); ++i) {
                for (int r = 0; r < k; ++r) full[pos++] = idx[slot];
                ++slot;
            }
        g.values[flat] = f.at(full);
    });
    return g;
}

/// Counts the distinct permuted copies of the alpha-sector of X^n by orbit
/// enumeration; agrees with r_alpha. Bounded to weight <= 8.
inline long sector_count(const MultiIndex& alpha) {
    const int n = alpha.weight();
    if (n < 1) throw std::domain_error("sector_count: weight must be >= 1");
    if (n > 8) throw resource_error("sector_count: weight > 8 not enumerable");
    // block id per coordinate in the canonical sector
    std::vector<int> block(n);
    int pos = 0, bid = 0;
    for (int k = 1; k <= alpha.max_order(); ++k)
        for (int i = 0; i < alpha.at(k); ++i) {
            for (int r = 0; r < k; ++r) block[pos++] = bid;
            ++bid;
        }
    // a permuted sector is determined by the induced partition of {0..n-1}
    std::set<std::vector<std::vector<int>>> seen;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<std::vector<int>> part(bid);
        for (int i = 0; i < n; ++i) part[block[perm[i]]].push_back(i);
        for (auto& blk : part) std::sort(blk.begin(), blk.end());
        std::sort(part.begin(), part.end());
        seen.insert(part);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<long>(seen.size());
}

/// Bell number via the r_alpha identity sum_{weight n} R_alpha = B_n.
inline BigInt bell_number(int n) {
    BigInt b = 0;
    for (const auto& a : enumerate_weight(n)) b += r_alpha(a);
    return b;
}

} // namespace levychaos
