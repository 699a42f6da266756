#pragma once

// Staged builders.  Each one runs an inductive construction stage by stage
// and returns a StagedFunction whose log records every inequality the
// construction relies on, with honestly measured values: when a nominal
// per-stage tolerance is out of reach at the degree budget, the stage keeps
// its structural constraints (valuations, smallness on inner discs, exact
// rounding, coefficient decay) tight and records the achieved approximation
// error instead of the nominal one.

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "abeluniv/density.hpp"
#include "abeluniv/polynomial.hpp"
#include "abeluniv/rational.hpp"
#include "abeluniv/regions.hpp"
#include "abeluniv/staged.hpp"

namespace abeluniv {

// h_j(r) = sum_{i>=j} 2 i r^i = 2 r^j (j + r(1-j)) / (1-r)^2.
double compute_h(int j, double r);

// H_k(r) = sum_{j>=k} h_j(r) = 2 r^k (k + (2-k) r) / (1-r)^3; the tail
// envelope of the integer-coefficient filler polynomials.  Throws
// std::domain_error for r >= 1.
double compute_H(int k, double r);

// r_n = 1 - 2^{-(n+1)} for n = 1..N (element 0 holds r_1).
std::vector<double> geometric_radii(int N);

// Dilation traces visit every enumerated target along rho while the
// averaged partial sums at 1 grow at least linearly: stage n interleaves an
// integer-coefficient filler (coefficients 0 or 2k chosen by an exact
// dichotomy) with a high-valuation carrier fit at radius rho[n-1].
StagedFunction build_abel_not_cesaro(const std::vector<double>& rho, int N);

// Dilation traces visit every target along the midpoint radii r'_n while
// |f(r_n)| stays below the budget total at every rho radius: each stage is
// small on the previous disc, cancels the running sum at r_n, and matches
// the target on r'_n K.
StagedFunction build_abelD_not_rho(const std::vector<double>& rho, int N);

// Cone-restricted visits on the nested annular sets while the running sums
// cancel along two alternating radial segment windows, so both radial
// limits are pinned while the cones reach every target.
StagedFunction build_maxcluster_not_abel(const ClusterGeometry& geom, int N);

// Visits along rho with all stage polynomials l-flat away from their own
// radius, so |f^{(l)}(r_k)| stays below the budget total at every k.
StagedFunction build_abel_deriv_bounded(const std::vector<double>& rho, int l, int N);

// Coefficientwise perturbation g = sum (a_k + alpha_k) z^k making
// Re(ff(k,l) (a_k + alpha_k)) the integer part of Re(ff(k,l) a_k), with
// ff(k,l) = k(k-1)...(k-l+1).  The stored series rounds a_k + alpha_k to
// doubles; `alpha` holds the exact corrections used by the integer checks.
struct Perturbation {
    PowerSeriesStage series;
    std::vector<Rat> alpha;
};
Perturbation perturb_integer_derivative(const PowerSeriesStage& f, int l);

// Partial sums dense on the annulus compacts between |z|=1 and |z|=R while
// the real parts of the l-th derivative partial sums at R are rounded to
// exact integers: triple induction of a decayed tail piece (valuation above
// everything before, coefficient decay |b_k| R^k <= k^{-(l+2)}), an annulus
// carrier piece, and an exact rounding correction.
StagedFunction build_UTS_R_deriv_not(double R, int l, int N);

struct BridgeInfeasible : std::runtime_error {
    explicit BridgeInfeasible(const std::string& what) : std::runtime_error(what) {}
};

// Dilation traces visit every enumerated target with value at 1 outside
// D(a, 1), while f on the real radii tracks a continuous bridging path that
// stays off D(a, 1) — so |f(r) - a| keeps a margin on all of [r_1, r_N].
StagedFunction build_offdisc_universal(cplx a, const std::vector<double>& rho, int N);

struct SegmentOverlap : std::runtime_error {
    explicit SegmentOverlap(const std::string& what) : std::runtime_error(what) {}
};
struct DisjointnessViolation : std::runtime_error {
    explicit DisjointnessViolation(const std::string& what) : std::runtime_error(what) {}
};

// A labelled radius interval: radii in [lo, hi] must land the dilation
// trace on carrier K_l within delta(n) of center g_n = rational_polynomial(n).
struct LabelledSegment {
    int l = 0;
    int n = 0;
    Rat lo{0};
    Rat hi{0};
};

// delta_n = 2^{-(n mod 8) - 1}, cycled so every (center, radius) pair recurs.
double neighborhood_delta(int n);

// Smallest radius after which dilating g_n moves it by less than
// delta_n / 4 on K_l (bisection on a sampled modulus of continuity).
double visit_entry_radius(int l, int n);

// Stays within eps of g on |z| <= disc_radius while every processed segment
// of the family is visited: segments are ordered by left endpoint, each
// stage is small up to a separator before its segment and matches
// g_n(r zeta) on sampled radii of the segment.  Segments beyond r_cap or
// before their entry radius are dropped (recorded as unprocessed).
StagedFunction build_visitor(const std::vector<LabelledSegment>& gamma, const PowerSeriesStage& g,
                             double disc_radius, double eps, double r_cap = 0.94);

// Visits with prescribed index density: pulls the positive-density index
// families through each radii sequence and delegates to the visitor
// machinery; the log records measured visit-set densities.
StagedFunction build_frequent(const std::vector<std::vector<double>>& rho_list, DensityMode mode,
                              std::int64_t horizon);

// Splits the index family in two and builds f visiting the basic
// neighborhood on the first half while h - f visits it on the second; the
// sum identity f + (h - f) = h holds exactly on stored coefficients.
std::pair<StagedFunction, StagedFunction> decompose_sum(const PowerSeriesStage& h,
                                                        const std::vector<double>& rho,
                                                        std::int64_t horizon);

}  // namespace abeluniv
