#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace levychaos {

using BigInt   = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Raised when an iterative numeric routine fails to reach its tolerance.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a request would exceed a hard combinatorial bound.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline BigInt big_factorial(int n) {
    BigInt r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.convert_to<double>(); }

inline Rational rational_pow(const Rational& base, int e) {
    Rational r = 1;
    for (int i = 0; i < std::abs(e); ++i) r *= base;
    if (e < 0) {
        if (r == 0) throw std::domain_error("rational_pow: zero to negative power");
        r = 1 / r;
    }
    return r;
}

} // namespace levychaos
