#pragma once

// Stage-by-stage record of an inductively built power series.  Every
// inequality a builder relies on is stored as a self-describing record that
// the verification harness can recompute from the raw series alone, and the
// whole object round-trips through a versioned, deterministic JSON document.

#include <string>
#include <utility>
#include <vector>

#include "abeluniv/polynomial.hpp"
#include "abeluniv/rational.hpp"
#include "abeluniv/regions.hpp"

namespace abeluniv {

// One recorded inequality: measured <= bound, together with a replay recipe.
//
// Recipe vocabulary (field `kind`):
//   "sup"        sup over sample(region, factor) of
//                |L^{(deriv)}(dilation * z) - rhs(z)|, where L is selected by
//                `lhs` and rhs(z) means rhs(z/|z|) when rhs_direction is set.
//   "coeff_sum"  sum_k |c_k| * args[0]^k over L's coefficients (a rigorous
//                disc bound by the triangle inequality).
//   "coeff_cap"  max_k |c_k| / (2k) over L's coefficients (k >= 1).
//   "decay"      max_k |c_k| * args[0]^k * k^(args[1]+2) over L (k >= 1).
//   "valuation"  max(0, args[0] - valuation(L)); bound 0.
//   "hcond"      max(H_u(r), q^u/(1-q)) / eps with args = {u, r, q, eps};
//                H is the double-sum tail of sum 2 i r^i.
//   "cesaro"     number of k in [args[0], args[1]] with
//                |sum_{j<=k} S_j(series)(1)| < k, in exact arithmetic.
//   "alpha_cap"  max_k |alpha_k| * ff(k,l) * R^(k-l) with args = {R, l},
//                over the stage's exact alpha list; exact arithmetic.
//   "int_sums"   number of j in [0, args[2]] with Re(S_j(L^{(l)})(R)) not an
//                exact integer, args = {R, l, j_max}; L's coefficients are
//                corrected by the stage's exact alpha list; exact arithmetic.
//   "note"       not replayed; measured/bound stored for the report only.
//
// `lhs` selects the polynomial the recipe reads:
//   "stage:<name>"   the named polynomial of this stage;
//   "prefix:<name>"  coefficientwise sum of the named polynomials over all
//                    stages up to and including this one;
//   "prefix"         sum of every polynomial up to this stage;
//   "series"         the full stored series.
struct InequalityRecord {
    std::string id;
    std::string kind = "note";
    double bound = 0.0;
    double measured = 0.0;
    int grid = 0;          // sample count behind `measured`; 0 = exact check
    double factor = 1.0;   // sampling factor used for region kinds
    std::string lhs = "prefix";
    int deriv = 0;
    double dilation = 1.0;
    bool rhs_direction = false;
    ComplexPolynomial rhs;   // comparison values; empty polynomial = zero
    BoundaryRegion region;   // region for "sup"; unused otherwise
    std::vector<double> args;
};

struct NamedPolynomial {
    std::string name;
    ComplexPolynomial poly;
};

struct StageRecord {
    int index = 0;
    std::vector<NamedPolynomial> polynomials;
    // scalar stage parameters in insertion order (kept as pairs, not a map,
    // so serialization order is deterministic and documented)
    std::vector<std::pair<std::string, double>> parameters;
    std::vector<InequalityRecord> checks;
    // exact rational corrections for integer-rounding stages: (k, alpha_k);
    // the stored double coefficients are rounded, the exact checks use these
    std::vector<std::pair<int, Rat>> exact_alphas;

    void param(std::string key, double value) { parameters.emplace_back(std::move(key), value); }
    double param_or(const std::string& key, double fallback) const;
};

struct StagedFunction {
    std::string builder;       // identifier of the producing construction
    PowerSeriesStage series;   // coefficientwise sum of all stage polynomials
    std::vector<StageRecord> stages;
    std::vector<std::pair<std::string, double>> environment;

    void env(std::string key, double value) { environment.emplace_back(std::move(key), value); }
    double env_or(const std::string& key, double fallback) const;
};

// Sum of every stage polynomial, in stage order (the series invariant's
// right-hand side).
ComplexPolynomial stage_sum(const StagedFunction& sf);

// Versioned deterministic JSON ("schema": "abeluniv/1").  Two calls on equal
// inputs produce byte-identical text; doubles round-trip exactly.
std::string to_json_text(const StagedFunction& sf);
StagedFunction staged_from_json_text(const std::string& text);

}  // namespace abeluniv
