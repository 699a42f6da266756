#include "abeluniv/polynomial.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace abeluniv {

ComplexPolynomial ComplexPolynomial::constant(cplx c) {
    if (c == cplx{0.0, 0.0}) return ComplexPolynomial{};
    return ComplexPolynomial{{c}};
}

ComplexPolynomial ComplexPolynomial::monomial(cplx c, int k) {
    assert(k >= 0 && "monomial power must be nonnegative");
    if (c == cplx{0.0, 0.0}) return ComplexPolynomial{};
    std::vector<cplx> v(static_cast<size_t>(k) + 1, cplx{0.0, 0.0});
    v.back() = c;
    return ComplexPolynomial{std::move(v)};
}

std::optional<int> ComplexPolynomial::degree() const {
    for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 0; --k)
        if (coeffs_[static_cast<size_t>(k)] != cplx{0.0, 0.0}) return k;
    return std::nullopt;
}

std::optional<int> ComplexPolynomial::valuation() const {
    for (int k = 0; k < static_cast<int>(coeffs_.size()); ++k)
        if (coeffs_[static_cast<size_t>(k)] != cplx{0.0, 0.0}) return k;
    return std::nullopt;
}

ComplexPolynomial ComplexPolynomial::operator+(const ComplexPolynomial& other) const {
    std::vector<cplx> out(std::max(coeffs_.size(), other.coeffs_.size()), cplx{0.0, 0.0});
    for (size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
    for (size_t k = 0; k < other.coeffs_.size(); ++k) out[k] += other.coeffs_[k];
    return ComplexPolynomial{std::move(out)};
}

ComplexPolynomial ComplexPolynomial::operator-(const ComplexPolynomial& other) const {
    std::vector<cplx> out(std::max(coeffs_.size(), other.coeffs_.size()), cplx{0.0, 0.0});
    for (size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
    for (size_t k = 0; k < other.coeffs_.size(); ++k) out[k] -= other.coeffs_[k];
    return ComplexPolynomial{std::move(out)};
}

ComplexPolynomial ComplexPolynomial::operator*(cplx scalar) const {
    std::vector<cplx> out = coeffs_;
    for (auto& c : out) c *= scalar;
    return ComplexPolynomial{std::move(out)};
}

void PowerSeriesStage::add(const ComplexPolynomial& p) {
    const auto& pc = p.coeffs();
    if (pc.size() > coeffs_.size()) coeffs_.resize(pc.size(), cplx{0.0, 0.0});
    for (size_t k = 0; k < pc.size(); ++k) coeffs_[k] += pc[k];
    ++stage_count_;
}

cplx evaluate(const ComplexPolynomial& p, cplx z) {
    const auto& c = p.coeffs();
    cplx acc{0.0, 0.0};
    for (size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
}

cplx partial_sum_at(const PowerSeriesStage& f, int n, cplx zeta) {
    assert(n >= 0 && "partial sum order must be nonnegative");
    const auto& c = f.coeffs();
    const int top = std::min(n, static_cast<int>(c.size()) - 1);
    cplx acc{0.0, 0.0};
    for (int k = top; k >= 0; --k) acc = acc * zeta + c[static_cast<size_t>(k)];
    return acc;
}

cplx cesaro_sum_at(const PowerSeriesStage& f, int lambda, cplx zeta) {
    assert(lambda >= 0 && "Cesaro order must be nonnegative");
    // sum_{j<=lambda} S_j = sum_k (lambda+1-k) a_k zeta^k for k <= lambda.
    const auto& c = f.coeffs();
    const int top = std::min(lambda, static_cast<int>(c.size()) - 1);
    cplx acc{0.0, 0.0};
    cplx zk{1.0, 0.0};
    for (int k = 0; k <= top; ++k) {
        acc += static_cast<double>(lambda + 1 - k) * c[static_cast<size_t>(k)] * zk;
        zk *= zeta;
    }
    return acc / static_cast<double>(lambda + 1);
}

ComplexPolynomial derivative(const ComplexPolynomial& p, int l) {
    assert(l >= 0 && "derivative order must be nonnegative");
    const auto& c = p.coeffs();
    if (l == 0) return p;
    if (static_cast<int>(c.size()) <= l) return ComplexPolynomial::zero();
    std::vector<cplx> out(c.size() - static_cast<size_t>(l));
    for (size_t k = 0; k < out.size(); ++k) {
        double fall = 1.0;
        for (int j = 0; j < l; ++j) fall *= static_cast<double>(k + static_cast<size_t>(l) - static_cast<size_t>(j));
        out[k] = c[k + static_cast<size_t>(l)] * fall;
    }
    return ComplexPolynomial{std::move(out)};
}

ComplexPolynomial dilate(const ComplexPolynomial& p, double r) {
    assert(r >= 0.0 && r <= 1.0 && "dilation radius must lie in [0,1]");
    std::vector<cplx> out = p.coeffs();
    double rk = 1.0;
    for (auto& c : out) {
        c *= rk;
        rk *= r;
    }
    return ComplexPolynomial{std::move(out)};
}

}  // namespace abeluniv
