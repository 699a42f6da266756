#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "abeluniv/approx.hpp"

using namespace abeluniv;

namespace {
constexpr double pi = std::numbers::pi;
std::mt19937 rng(4211u);

ComplexPolynomial random_poly(int deg) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<cplx> c(static_cast<size_t>(deg) + 1);
    for (auto& x : c) x = cplx{u(rng), u(rng)};
    return ComplexPolynomial{std::move(c)};
}

// Brute-force unconstrained least squares at a fixed degree on a 5x-denser
// grid, solved by SVD; the reference point for the engine's error levels.
double brute_force_error(const ApproximationTarget& t, int degree) {
    auto pts = sample(t.region, 5.0);
    Eigen::MatrixXcd A(static_cast<long>(pts.size()), degree + 1);
    Eigen::VectorXcd b(static_cast<long>(pts.size()));
    for (long i = 0; i < static_cast<long>(pts.size()); ++i) {
        cplx zk{1.0, 0.0};
        for (int j = 0; j <= degree; ++j) {
            A(i, j) = zk;
            zk *= pts[static_cast<size_t>(i)];
        }
        b(i) = t.value(pts[static_cast<size_t>(i)]);
    }
    Eigen::VectorXcd x = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    std::vector<cplx> coeffs(static_cast<size_t>(degree) + 1);
    for (int j = 0; j <= degree; ++j) coeffs[static_cast<size_t>(j)] = x(j);
    ComplexPolynomial p{std::move(coeffs)};
    double sup = 0.0;
    for (cplx z : sample(t.region, 5.0)) sup = std::max(sup, std::abs(evaluate(p, z) - t.value(z)));
    return sup;
}
}  // namespace

TEST_CASE("two-region fit: zero on a disc, dilation trace on an arc") {
    // The disc-to-carrier radius ratio controls how much coefficient
    // headroom the fit needs; 0.1 against 0.9 keeps it well inside what
    // double precision can certify.
    BoundaryRegion K = BoundaryRegion::arc_union({{-pi / 2, pi / 2}});
    std::vector<ApproximationTarget> targets;
    targets.push_back(
        ApproximationTarget::constant(BoundaryRegion::disc(0.1), cplx{0.0, 0.0}, 0.05, "disc"));
    targets.push_back(ApproximationTarget{dilated(K, 0.9), [](cplx z) { return z / 0.9; }, 0.05,
                                          "carrier"});
    FitOutcome out = approximate(targets, FitConstraints{});
    CHECK(out.achieved[0] <= 0.05);
    CHECK(out.achieved[1] <= 0.05);
}

TEST_CASE("a representable target is hit almost exactly") {
    ComplexPolynomial p = random_poly(6);
    std::vector<ApproximationTarget> targets;
    targets.push_back(ApproximationTarget::polynomial(BoundaryRegion::disc(0.8), p, 1e-9, "self"));
    FitOutcome out = approximate(targets, FitConstraints{});
    CHECK(out.achieved[0] <= 1e-10);
}

TEST_CASE("minimum valuation excludes low coefficients exactly") {
    BoundaryRegion K = BoundaryRegion::arc_union({{pi / 3, 2 * pi / 3}});
    std::vector<ApproximationTarget> targets;
    targets.push_back(
        ApproximationTarget::constant(dilated(K, 0.9), cplx{1.0, 0.0}, 0.05, "carrier"));
    FitConstraints c;
    c.min_valuation = 5;
    FitOutcome out = approximate(targets, c);
    for (int k = 0; k < 5; ++k) CHECK(out.poly.coeff(k) == cplx{0.0, 0.0});
    CHECK(out.achieved[0] <= 0.05);
}

TEST_CASE("oracle: within 2x of brute-force least squares at equal degree") {
    std::uniform_real_distribution<double> ur(0.5, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        double lo = ur(rng) * pi, len = 0.5 + ur(rng);
        BoundaryRegion K = BoundaryRegion::arc_union({{lo, lo + len}});
        ComplexPolynomial target = random_poly(10 + trial % 5);
        ApproximationTarget t =
            ApproximationTarget::polynomial(dilated(K, ur(rng)), target, 1e-6, "t");
        int degree = 24;
        FitOutcome out = approximate_at_degree({t}, FitConstraints{}, degree);
        double reference = brute_force_error(t, degree);
        CHECK(out.achieved[0] <= 2.0 * reference + 1e-12);
    }
}

TEST_CASE("achieved error is non-increasing under degree escalation") {
    BoundaryRegion K = BoundaryRegion::arc_union({{0.3, 2.1}});
    ApproximationTarget t{dilated(K, 0.85), [](cplx z) { return std::exp(3.0 * z); }, 1e-9, "exp"};
    double prev = std::numeric_limits<double>::infinity();
    for (int degree : {8, 16, 32}) {
        FitOutcome out = approximate_at_degree({t}, FitConstraints{}, degree);
        // floor at the solver's rank-cutoff noise level
        double err = std::max(out.achieved[0], 1e-8);
        CHECK(err <= prev * 1.0000001);
        prev = err;
    }
}

TEST_CASE("radial flat fit away from the junction") {
    // carrier arc around -1: the dilated copy misses the real segment
    BoundaryRegion K = BoundaryRegion::arc_union({{pi - 0.8, pi + 0.8}});
    ComplexPolynomial phi = ComplexPolynomial::constant(cplx{1.0, 0.0});
    FitOutcome out = radial_flat_approximate(K, phi, 0.1, 1, 0.12, 0.9);
    CHECK(out.achieved[0] <= 0.1);  // small on the disc
    CHECK(out.achieved[1] <= 0.1);  // matches the trace on rK
    CHECK(out.flat_achieved <= 0.1);
}

TEST_CASE("radial flat fit with the carrier through the junction") {
    BoundaryRegion K = BoundaryRegion::arc_union({{-1.0, 1.0}});  // contains angle 0
    ComplexPolynomial phi = ComplexPolynomial::constant(cplx{1.0, 0.0});
    FitOutcome out = radial_flat_approximate(K, phi, 0.1, 1, 0.12, 0.9);
    CHECK(out.achieved[1] <= 0.1);
    CHECK(out.flat_achieved <= 0.1);
    // derivative grid over [0, 0.12] and [0.9, 0.999]
    for (double x = 0.0; x <= 0.12; x += 0.005)
        CHECK(std::abs(evaluate(derivative(out.poly, 1), cplx{x, 0.0})) <= 0.1 * 1.05);
    for (double x = 0.9; x <= 0.999; x += 0.002)
        CHECK(std::abs(evaluate(derivative(out.poly, 1), cplx{x, 0.0})) <= 0.1 * 1.05);
}

TEST_CASE("radial flat fit accepts the zero target") {
    BoundaryRegion K = BoundaryRegion::arc_union({{pi - 0.5, pi + 0.5}});
    FitOutcome out = radial_flat_approximate(K, ComplexPolynomial::zero(), 0.05, 1, 0.4, 0.8);
    CHECK(out.achieved[0] <= 0.05);
    CHECK(out.achieved[1] <= 0.05);
    CHECK(out.flat_achieved <= 0.05);
}

TEST_CASE("decayed tail fit: valuation, decay and smallness") {
    // carrier of small angular extent far from the origin: there the
    // valuation factor barely rotates over K and the fit is a cheap local
    // correction, which is the regime the tail construction works in
    BoundaryRegion K;
    K.kind = RegionKind::ArcUnion;
    K.pieces.push_back(ArcPiece{cplx{0.0, 0.0}, 5.0, 0.7, 1.2});
    ComplexPolynomial phi = ComplexPolynomial::constant(cplx{1.0, 0.0});
    FitOutcome out = decayed_tail_approximate(K, phi, 0.1, 1, 5, 1.0);

    CHECK(out.poly.valuation().value() >= 5);
    CHECK(out.achieved[0] <= 0.1);  // small on |z| <= R
    CHECK(out.achieved[1] <= 0.1);  // matches phi on K
    const auto& c = out.poly.coeffs();
    for (int k = 1; k < static_cast<int>(c.size()); ++k)
        CHECK(std::abs(c[static_cast<size_t>(k)]) * std::pow(1.0, k) <=
              std::pow(static_cast<double>(k), -3.0));
}

TEST_CASE("decayed tail fit satisfies the Cauchy coefficient bound") {
    BoundaryRegion K;
    K.kind = RegionKind::ArcUnion;
    K.pieces.push_back(ArcPiece{cplx{0.0, 0.0}, 4.5, 2.0, 2.8});
    FitOutcome out =
        decayed_tail_approximate(K, ComplexPolynomial::constant(cplx{0.5, 0.5}), 0.1, 1, 3, 1.0);

    // grid sup on the intermediate circle, then compare coefficients
    double inner = std::numeric_limits<double>::infinity();
    for (cplx z : sample(K, 2.0)) inner = std::min(inner, std::abs(z));
    const double eta = (inner - 1.0) / 2.0;
    double sup = 0.0;
    for (cplx z : sample(BoundaryRegion::disc(1.0 + eta), 4.0))
        sup = std::max(sup, std::abs(evaluate(out.poly, z)));
    const auto& c = out.poly.coeffs();
    for (int k = 0; k < static_cast<int>(c.size()); ++k)
        CHECK(std::abs(c[static_cast<size_t>(k)]) <=
              1.1 * sup * std::pow(1.0 + eta, -static_cast<double>(k)) + 1e-15);
}

TEST_CASE("degree budget exhaustion raises an error") {
    BoundaryRegion K = BoundaryRegion::arc_union({{0.0, 3.0}});
    std::vector<ApproximationTarget> targets;
    // an essentially unreachable tolerance at a tiny degree cap
    targets.push_back(ApproximationTarget{dilated(K, 0.99),
                                          [](cplx z) { return std::exp(10.0 * z); }, 1e-12, "hard"});
    FitConstraints c;
    c.max_degree = 8;
    CHECK_THROWS_AS(approximate(targets, c), BudgetExceeded);
}
