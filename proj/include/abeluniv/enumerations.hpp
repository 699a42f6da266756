#pragma once

// Bookkeeping sequences shared by all staged builders: a total enumeration
// of polynomials with dyadic-rational coefficients, index schedulers whose
// fibers repeat infinitely often, and the geometric epsilon budget.

#include <cstdint>
#include <utility>

#include "abeluniv/polynomial.hpp"

namespace abeluniv {

// n-th polynomial of a fixed diagonal enumeration over degree x denominator
// x numerator grids; coefficients have dyadic-rational real and imaginary
// parts, and the enumeration is total (every such polynomial appears).
ComplexPolynomial rational_polynomial(std::int64_t n);

// Deterministic scheduler with infinite fibers: every pair (a, b) is hit by
// infinitely many indices.  schedule_pair(0) == (0, 0).
std::pair<std::int64_t, std::int64_t> schedule_pair(std::int64_t n);

// Index bound by which every pair with both entries < B has appeared at
// least three times.
std::int64_t schedule_pair_fiber_bound(std::int64_t B);

// Three-component scheduler with the same infinite-fiber property.
struct Triple {
    std::int64_t a, b, c;
};
Triple schedule_triple(std::int64_t n);

// epsilon_n = c * 2^{-n}; the default scale keeps the total below 1/4 so
// one budget serves every construction.
struct EpsilonBudget {
    double c = 1.0 / 16.0;
    double at(int n) const;
    // sum_{j >= n} epsilon_j = c * 2^{-(n-1)}
    double tail(int n) const;
};

// Enumerates, in rational_polynomial order, the polynomials p with
// |p(1) - a| > 1.  Infinite stream.
class RestrictedEnumeration {
public:
    explicit RestrictedEnumeration(cplx a) : a_(a) {}
    // Next polynomial of the stream together with its clearance
    // |p(1) - a| - 1 > 0, needed by callers that thin their budgets.
    std::pair<ComplexPolynomial, double> next();

private:
    cplx a_;
    std::int64_t cursor_ = 0;
};

}  // namespace abeluniv
