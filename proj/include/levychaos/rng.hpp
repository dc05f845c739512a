#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace levychaos {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** stream keyed by (seed, substream index).
///
/// Replicate i of a Monte Carlo run always draws from Stream(seed, i), so
/// results do not depend on how replicates are distributed over workers.
class Stream {
public:
    Stream(uint64_t seed, uint64_t substream) {
        uint64_t init = seed ^ (0x7F4A7C15ULL + substream * 0x9E3779B97F4A7C15ULL);
        for (auto& w : s_) w = splitmix64(init);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1], for logarithms.
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential() { return -std::log(uniform_pos()); }

    /// Exact Poisson sample (Knuth product method, with splitting for large mean).
    long poisson(double mean) {
        if (mean < 0) throw std::invalid_argument("poisson: negative mean");
        long total = 0;
        while (mean > 30.0) {
            // Poisson(m) = Poisson(m/2) + Poisson(m/2), independent
            mean *= 0.5;
            total += poisson(mean);
        }
        double limit = std::exp(-mean), prod = uniform_pos();
        long k = 0;
        while (prod > limit) {
            prod *= uniform_pos();
            ++k;
        }
        return total + k;
    }

    /// Index sample from a cumulative weight table (cdf normalized to cdf.back()).
    size_t discrete(const std::vector<double>& cdf) {
        double u = uniform() * cdf.back();
        size_t lo = 0, hi = cdf.size() - 1;
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cdf[mid] <= u) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

} // namespace levychaos
