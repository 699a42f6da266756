#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace abeluniv {

using cplx = std::complex<double>;

// Dense complex polynomial, coefficient index = power of z.  Valuation is
// encoded by leading zero slots, so a polynomial built with a prescribed
// minimum valuation keeps those slots explicitly.
class ComplexPolynomial {
public:
    ComplexPolynomial() = default;
    explicit ComplexPolynomial(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) {}

    static ComplexPolynomial zero() { return ComplexPolynomial{}; }
    static ComplexPolynomial constant(cplx c);
    // c * z^k
    static ComplexPolynomial monomial(cplx c, int k);

    const std::vector<cplx>& coeffs() const { return coeffs_; }
    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[static_cast<size_t>(k)] : cplx{0.0, 0.0};
    }

    // Largest index with nonzero coefficient; nullopt for the zero polynomial.
    std::optional<int> degree() const;
    // Smallest index with nonzero coefficient; nullopt for the zero polynomial.
    std::optional<int> valuation() const;
    bool is_zero() const { return !degree().has_value(); }

    ComplexPolynomial operator+(const ComplexPolynomial& other) const;
    ComplexPolynomial operator-(const ComplexPolynomial& other) const;
    ComplexPolynomial operator*(cplx scalar) const;

private:
    std::vector<cplx> coeffs_;
};

// Truncation sum_{k<=stage_count of added pieces} of a staged power series,
// held as one coefficient vector.  Evaluation inside |z|<1 is exact for the
// truncation.
class PowerSeriesStage {
public:
    PowerSeriesStage() = default;
    explicit PowerSeriesStage(std::vector<cplx> coeffs, int stage_count = 0)
        : coeffs_(std::move(coeffs)), stage_count_(stage_count) {}

    const std::vector<cplx>& coeffs() const { return coeffs_; }
    int stage_count() const { return stage_count_; }

    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[static_cast<size_t>(k)] : cplx{0.0, 0.0};
    }

    void add(const ComplexPolynomial& p);
    ComplexPolynomial as_polynomial() const { return ComplexPolynomial{coeffs_}; }

private:
    std::vector<cplx> coeffs_;
    int stage_count_ = 0;
};

// Horner evaluation of sum a_k z^k; exact 0 for the zero polynomial.
cplx evaluate(const ComplexPolynomial& p, cplx z);

// S_n(f)(zeta) = sum_{k<=n} a_k zeta^k; coefficients beyond the stored
// length count as zero.
cplx partial_sum_at(const PowerSeriesStage& f, int n, cplx zeta);

// (1/(lambda+1)) sum_{j=0}^{lambda} S_j(f)(zeta), computed in a single pass
// over the coefficients.
cplx cesaro_sum_at(const PowerSeriesStage& f, int lambda, cplx zeta);

// l-th formal derivative; l beyond the degree yields the zero polynomial.
ComplexPolynomial derivative(const ComplexPolynomial& p, int l);

// p composed with z -> r z, i.e. a_k -> a_k r^k.
ComplexPolynomial dilate(const ComplexPolynomial& p, double r);

}  // namespace abeluniv
