#pragma once

// Exact arithmetic companions to the floating-point series operations.
// Doubles convert to rationals without loss (every finite double is a
// dyadic rational), so the exact checks run directly on the stored
// coefficient vectors.

#include <boost/multiprecision/cpp_int.hpp>

#include <cassert>
#include <vector>

#include "abeluniv/polynomial.hpp"

namespace abeluniv {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Exact conversion; asserts on non-finite input.
Rat to_rational(double x);

inline bool is_integer(const Rat& q) { return denominator(q) == 1; }

struct RatComplex {
    Rat re{0};
    Rat im{0};

    RatComplex() = default;
    RatComplex(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}
    explicit RatComplex(const cplx& z) : re(to_rational(z.real())), im(to_rational(z.imag())) {}

    RatComplex& operator+=(const RatComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    RatComplex operator*(const Rat& s) const { return {re * s, im * s}; }
    RatComplex operator*(const RatComplex& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
};

// Exact S_n(f)(x) for real rational x, from the stored coefficients.
RatComplex exact_partial_sum(const std::vector<cplx>& coeffs, int n, const Rat& x);

// Exact sum_{l=0}^{k} S_l(f)(1) (unnormalized Cesaro numerator at 1).
RatComplex exact_cesaro_numerator_at_one(const std::vector<cplx>& coeffs, int k);

// |z|^2 as an exact rational.
inline Rat abs_squared(const RatComplex& z) { return z.re * z.re + z.im * z.im; }

}  // namespace abeluniv
