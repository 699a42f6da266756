#include "abeluniv/rational.hpp"

#include <cmath>

namespace abeluniv {

Rat to_rational(double x) {
    assert(std::isfinite(x) && "cannot convert non-finite double to rational");
    if (x == 0.0) return Rat{0};
    int exp = 0;
    // mant in [0.5,1); mant * 2^53 is an exact integer.
    const double mant = std::frexp(x, &exp);
    const auto mant_int = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rat q{mant_int};
    if (exp >= 0) {
        q *= Rat{BigInt{1} << exp};
    } else {
        q /= Rat{BigInt{1} << (-exp)};
    }
    return q;
}

RatComplex exact_partial_sum(const std::vector<cplx>& coeffs, int n, const Rat& x) {
    assert(n >= 0);
    const int top = std::min(n, static_cast<int>(coeffs.size()) - 1);
    RatComplex acc;
    Rat xk{1};
    for (int k = 0; k <= top; ++k) {
        acc += RatComplex{coeffs[static_cast<size_t>(k)]} * xk;
        xk *= x;
    }
    return acc;
}

RatComplex exact_cesaro_numerator_at_one(const std::vector<cplx>& coeffs, int k) {
    assert(k >= 0);
    // sum_{l<=k} S_l(f)(1) = sum_j (k+1-j) a_j for j <= k.
    const int top = std::min(k, static_cast<int>(coeffs.size()) - 1);
    RatComplex acc;
    for (int j = 0; j <= top; ++j)
        acc += RatComplex{coeffs[static_cast<size_t>(j)]} * Rat{k + 1 - j};
    return acc;
}

}  // namespace abeluniv
