#pragma once

// Recomputation layer: everything a builder log claims is recomputed here
// from the bare coefficient series — visit sets, stage-log replays, exact
// averaged-partial-sum growth, derivative bounds, and parametrized-family
// membership.  All grid checks double their resolution near a threshold
// before declaring a verdict.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abeluniv/density.hpp"
#include "abeluniv/polynomial.hpp"
#include "abeluniv/staged.hpp"

namespace abeluniv {

// Basic neighborhood: functions whose dilation trace on the carrier arc
// K_{carrier} stays within `radius` of the center polynomial.
struct NeighborhoodSpec {
    int carrier = 0;             // index into the arc exhaustion (never the full circle)
    ComplexPolynomial center;    // g_n
    double radius = 0.5;         // delta_n > 0
};

struct CheckResult {
    std::string id;
    bool pass = true;
    double measured = 0.0;
    double bound = 0.0;
    int grid = 0;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Raised when a truncated series is queried at radii its tail bound cannot
// support: the documented tail model is the caller-supplied bound on the
// omitted stages' sup over the queried radii, and the gate triggers exactly
// when tail_bound >= radius/10.
struct TailUnreliable : std::runtime_error {
    explicit TailUnreliable(const std::string& what) : std::runtime_error(what) {}
};

// Indices k (1-based into `radii`) whose dilation trace lands in V; grid sup
// with resolution doubling when within 10% of the threshold.
DensitySet visit_set(const PowerSeriesStage& f, const NeighborhoodSpec& V,
                     const std::vector<double>& radii, double tail_bound);

// Uniform r-grid variant: maximal sub-intervals of consecutive passing grid
// points, as an interval union.
DensitySet visit_set(const PowerSeriesStage& f, const NeighborhoodSpec& V, double r_lo,
                     double r_hi, int count, double tail_bound);

// Recomputes every recorded inequality from the raw series at twice the
// original sampling resolution; grid checks pass with a 5% relaxation,
// exact checks with none.  Also re-checks the series/stage-sum invariant.
VerificationReport replay_stage_log(const StagedFunction& sf);

// Exact-arithmetic check of |sum_{j<=k} S_j(f)(1)| >= k for k in
// [k_lo, k_hi].
VerificationReport cesaro_growth_check(const PowerSeriesStage& f, int k_lo, int k_hi);

// |f^{(l)}(r)| <= bound for each radius, on the stored truncation.
VerificationReport derivative_bound_check(const PowerSeriesStage& f, int l,
                                          const std::vector<double>& radii, double bound);

// For each lambda in the grid, some n <= n_max has
// sup_{K_l} |f(r_n(lambda) zeta) - phi(zeta)| < 1/s; the family's
// lambda-continuity is checked by a neighbor-difference bound first.
VerificationReport common_membership_check(const PowerSeriesStage& f, const ComplexPolynomial& phi,
                                           int carrier_l, int s,
                                           const std::function<double(double, int)>& rho_family,
                                           const std::vector<double>& lambda_grid, int n_max,
                                           double tail_bound);

// JSON document for a report ("schema": "abeluniv/1"), deterministic bytes.
std::string report_to_json_text(const VerificationReport& report);

}  // namespace abeluniv
