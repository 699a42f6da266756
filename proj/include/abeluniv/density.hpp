#pragma once

// Natural densities of integer sets, uniform densities of subsets of [0,1),
// the explicit labelled families with prescribed densities used by the
// frequent-visit constructions, and their transfer under monotone
// reparametrizations of the radius.  Interval endpoints and measures are
// exact rationals throughout.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "abeluniv/rational.hpp"

namespace abeluniv {

enum class DensityMode { Lower, Upper };

// Closed interval [lo, hi] inside [0, 1).
struct RatInterval {
    Rat lo{0};
    Rat hi{0};
};

// Either a strictly increasing integer set up to a horizon, or a sorted
// union of pairwise disjoint closed rational subintervals of [0,1).
struct DensitySet {
    enum class Kind { Integers, Intervals };
    Kind kind = Kind::Integers;
    std::vector<std::int64_t> integers;
    std::vector<RatInterval> intervals;
    std::int64_t horizon = 0;

    // Exact total length of the interval union.
    Rat measure() const;
};

// min (Lower) or max (Upper) over n in [N/2, N] of |E ∩ {1..n}| / n — the
// finite window proxy for liminf/limsup of the natural density.
double natural_density(const DensitySet& E, DensityMode mode, std::int64_t N);

// min/max over n in [N/2, N] of n * |G ∩ [1-1/n, 1)|, the window proxy for
// the uniform density; the measure arithmetic is exact.
double uniform_density(const DensitySet& G, DensityMode mode, std::int64_t N);

// Complement of an interval union within [0, 1), again as a sorted union.
DensitySet unit_complement(const DensitySet& G);

// Exact |G ∩ [t, 1)| for an interval union.
Rat tail_measure(const DensitySet& G, const Rat& t);

struct LabelledSet {
    int l = 1;  // 1-based labels: 1 <= l, n <= L
    int n = 1;
    DensitySet set;
    double declared_lower = 0.0;  // construction's lower-density bound
    std::int64_t witness_M = 0;   // scaling witness: m <= j_m <= M*m
};

struct LabelledFamily {
    int labels = 0;  // L
    std::vector<LabelledSet> sets;
};

// Pairwise disjoint A(l,n) ⊂ N with positive lower density: label (l,n)
// (pair index p = (l-1)L + n-1) owns the odd multiples of 2L * 2^p, a
// syndetic progression of gap 4L * 2^p.  Every element is >= n and cross
// pairs satisfy |j - j'| >= n + n'; both properties are verified
// exhaustively up to the horizon before returning.
LabelledFamily make_A_families(int L, std::int64_t horizon);

// mode == Lower: intervals around 1 - 1/j with one-third spacings,
//   [1-1/j - (1/3)(1/(j-1) - 1/j), 1-1/j + (1/3)(1/j - 1/(j+1))],
//   over j in A(l,n); uniform lower density >= 2/(3M^2) with M the gap.
// mode == Upper: disjoint dyadic blocks [1-2^{-N_i}, 1-2^{-M_i}] with
//   M_i - N_i = 4, distributed to labels round-robin (injective block
//   indices), so each label's uniform upper density reaches 1 - 2^{-4}.
LabelledFamily make_Gamma_family(DensityMode mode, int L, std::int64_t horizon);

// Radius reparametrization r -> h(a, r), increasing on [0,1) with
// h(1, r) = r, and derivative pinched in [c, C] on the terminal interval.
struct Reparametrization {
    double a = 1.0;
    std::function<double(double, double)> h;  // (a, r) -> h_a(r)
    double c = 1.0;
    double C = 1.0;
};

struct NonMonotone : std::runtime_error {
    explicit NonMonotone(const std::string& what) : std::runtime_error(what) {}
};

// Preimage h_a^{-1}(G) as an interval union (monotone bisection per
// endpoint), returned as (measured uniform density of the preimage,
// (c/C) * measured uniform density of G).
std::pair<double, double> pullback_density_bound(const DensitySet& G,
                                                 const Reparametrization& rep, DensityMode mode,
                                                 std::int64_t N);

// JSON document for a labelled family; interval endpoints appear as exact
// "p/q" strings ("schema": "abeluniv/1").
std::string density_to_json_text(const LabelledFamily& family);

}  // namespace abeluniv
