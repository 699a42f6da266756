#pragma once

// Constrained complex polynomial fitting on disjoint unions of regions.
// A fit is a weighted linear least squares over the monomial slice
// z^{min_valuation} .. z^d on sampled points, with column scaling and an
// orthogonal solve; the degree d escalates until an independent, denser
// verification grid certifies every requested bound.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abeluniv/polynomial.hpp"
#include "abeluniv/regions.hpp"

namespace abeluniv {

struct ApproximationTarget {
    BoundaryRegion region;
    std::function<cplx(cplx)> value;  // requested values on the region
    double tolerance = 1e-2;
    std::string label;

    static ApproximationTarget constant(BoundaryRegion r, cplx c, double tol,
                                        std::string label = {});
    static ApproximationTarget polynomial(BoundaryRegion r, ComplexPolynomial p, double tol,
                                          std::string label = {});
};

// Segment [r0, r1] of the nonnegative real axis.
struct FlatSegment {
    double r0 = 0.0;
    double r1 = 0.0;
};

// sup over the segments of |P^{(l)}| must stay below bound.
struct FlatDerivativeConstraint {
    int l = 1;
    std::vector<FlatSegment> segments;
    double bound = 1e-2;
};

// Every coefficient must satisfy |a_k| R^k <= k^{-(l+2)}.
struct DecayConstraint {
    double R = 1.0;
    int l = 1;
};

struct FitConstraints {
    int min_valuation = 0;
    int max_degree = 1024;
    std::optional<DecayConstraint> decay;
    std::optional<FlatDerivativeConstraint> flat;
};

struct FitOutcome {
    ComplexPolynomial poly;
    std::vector<double> achieved;  // per-target verification-grid sup errors
    double flat_achieved = 0.0;    // verification-grid sup of |P^{(l)}| if requested
    int degree = 0;
    double verify_factor = 3.0;    // verification grid density over fit grid
};

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};
struct ConstraintInfeasible : std::runtime_error {
    explicit ConstraintInfeasible(const std::string& what) : std::runtime_error(what) {}
};

// Fit with degree escalation: start at min_valuation plus a multiple of the
// total sampled arclength, double up to max_degree, certify on the 3x grid.
FitOutcome approximate(const std::vector<ApproximationTarget>& targets,
                       const FitConstraints& constraints);

// Single solve at a fixed top degree, no escalation and no pass/fail gate;
// used by the engine internally and by the solver cross-checks.
FitOutcome approximate_at_degree(const std::vector<ApproximationTarget>& targets,
                                 const FitConstraints& constraints, int degree);

// P with |P| <= eps on the disc |z| <= r_prime, |P^{(l)}| <= eps on
// [0, r_prime] and [r, 1-h] (h = 1e-3), and |P(z) - phi(z/r)| <= eps on rK.
// If rK meets the real segment the boundary trace is bridged continuously
// into the constant phi(1) near the junction, at a cost of eps/2.
// carrier_eps > 0 relaxes only the carrier bound (the staged builders use
// this to keep smallness and flatness tight when the trace is unreachable).
FitOutcome radial_flat_approximate(const BoundaryRegion& K, const ComplexPolynomial& phi,
                                   double eps, int l, double r_prime, double r,
                                   int max_degree = 1024, double carrier_eps = 0.0);

// P = sum_{k >= max(N, M)} a_k z^k with |P| <= eps on |z| <= R,
// |P(z) - phi(z)| <= eps on K, and |a_k| R^k <= k^{-(l+2)} for every k;
// M realizes eps k^{l+2} R^k / (R+eta)^k <= 1 with eta half the gap
// between K and the disc.
FitOutcome decayed_tail_approximate(const BoundaryRegion& K, const ComplexPolynomial& phi,
                                    double eps, int l, int N, double R,
                                    int max_degree = 1024);

constexpr double kFlatnessEdge = 1e-3;  // open endpoint cutoff: flatness is checked up to 1 - kFlatnessEdge

}  // namespace abeluniv
