#include "abeluniv/enumerations.hpp"

#include <cassert>
#include <cmath>
#include <mutex>
#include <vector>

namespace abeluniv {

namespace {

using std::int64_t;

int64_t cantor_pair(int64_t a, int64_t b) { return (a + b) * (a + b + 1) / 2 + b; }

std::pair<int64_t, int64_t> cantor_unpair(int64_t n) {
    int64_t t = static_cast<int64_t>((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0);
    while ((t + 1) * (t + 2) / 2 <= n) ++t;
    while (t * (t + 1) / 2 > n) --t;
    int64_t b = n - t * (t + 1) / 2;
    return {t - b, b};
}

// Signed odd integers: 0 -> 1, 1 -> -1, 2 -> 3, 3 -> -3, ...
int64_t odd_int(int64_t t) { return (t % 2 == 0) ? t + 1 : -t; }

// Signed integers: 0 -> 0, 1 -> -1, 2 -> 1, 3 -> -2, 4 -> 2, ...
int64_t signed_int(int64_t t) { return (t % 2 == 0) ? t / 2 : -(t + 1) / 2; }

// Bijection onto the dyadic rationals m * 2^k (m odd, k in Z) plus zero.
double dyadic(int64_t i) {
    if (i == 0) return 0.0;
    auto [u, e] = cantor_unpair(i - 1);
    return std::ldexp(static_cast<double>(odd_int(u)), static_cast<int>(signed_int(e)));
}

// Bijection onto complex numbers with dyadic real and imaginary parts;
// index 0 is zero.
cplx complex_dyadic(int64_t i) {
    auto [u, v] = cantor_unpair(i);
    return {dyadic(u), dyadic(v)};
}

// The enumeration orders canonical coefficient-index tuples by the cost
// max(64 * degree, all indices), ties broken lexicographically by
// (degree, indices).  The weight keeps low levels dominated by low
// degrees, so commonly requested coefficients appear at small indices and
// a linear scan for a given low-degree polynomial stays cheap.
constexpr int64_t kDegreeWeight = 256;

void emit_level(int64_t t, std::vector<ComplexPolynomial>& out) {
    if (t == 0) {
        out.emplace_back();  // the zero polynomial
        return;
    }
    for (int64_t d = 0; d <= t / kDegreeWeight; ++d) {
        // Odometer over index tuples (i_0 .. i_d) in [0, t]^{d+1}; the
        // leading index must map to a nonzero coefficient, so i_d >= 1.
        std::vector<int64_t> idx(static_cast<size_t>(d) + 1, 0);
        idx.back() = 1;
        const bool whole_block = (kDegreeWeight * d == t);
        while (true) {
            int64_t maxi = 0;
            for (int64_t v : idx) maxi = std::max(maxi, v);
            if (maxi <= t && (whole_block || maxi == t)) {
                std::vector<cplx> coeffs(idx.size());
                for (size_t k = 0; k < idx.size(); ++k) coeffs[k] = complex_dyadic(idx[k]);
                out.emplace_back(std::move(coeffs));
            }
            // advance odometer
            size_t pos = 0;
            while (pos < idx.size()) {
                if (++idx[pos] <= t) break;
                idx[pos] = (pos + 1 == idx.size()) ? 1 : 0;
                ++pos;
            }
            if (pos == idx.size()) break;
        }
    }
}

}  // namespace

ComplexPolynomial rational_polynomial(int64_t n) {
    assert(n >= 0);
    static std::mutex mu;
    static std::vector<ComplexPolynomial> cache;
    static int64_t next_level = 0;
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int64_t>(cache.size()) <= n) {
        emit_level(next_level, cache);
        ++next_level;
    }
    return cache[static_cast<size_t>(n)];
}

std::pair<int64_t, int64_t> schedule_pair(int64_t n) {
    assert(n >= 0);
    auto [outer, rest] = cantor_unpair(n);
    (void)outer;  // discarded so every pair recurs for every outer value
    return cantor_unpair(rest);
}

int64_t schedule_pair_fiber_bound(int64_t B) {
    assert(B >= 1);
    const int64_t max_inner = cantor_pair(B - 1, B - 1);
    return cantor_pair(2, max_inner) + 1;  // outer values 0,1,2 all appear
}

Triple schedule_triple(int64_t n) {
    assert(n >= 0);
    auto [outer, rest] = cantor_unpair(n);
    (void)outer;
    auto [a, rest2] = cantor_unpair(rest);
    auto [b, c] = cantor_unpair(rest2);
    return Triple{a, b, c};
}

double EpsilonBudget::at(int n) const {
    assert(n >= 0);
    return c * std::ldexp(1.0, -n);
}

double EpsilonBudget::tail(int n) const {
    assert(n >= 0);
    return c * std::ldexp(1.0, -(n - 1));
}

std::pair<ComplexPolynomial, double> RestrictedEnumeration::next() {
    while (true) {
        ComplexPolynomial p = rational_polynomial(cursor_++);
        const double clearance = std::abs(evaluate(p, cplx{1.0, 0.0}) - a_) - 1.0;
        if (clearance > 0.0) return {std::move(p), clearance};
    }
}

}  // namespace abeluniv
