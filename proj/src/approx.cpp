#include "abeluniv/approx.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace abeluniv {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Rank cutoff for the orthogonal solve.  Directions below this relative
// singular value carry coefficient blow-up past what double precision can
// certify, so they are dropped rather than inverted.
constexpr double kSvdThreshold = 1e-10;

// The minimum-norm candidates keep more of the spectrum; when the target is
// nearly representable the directions below the conservative cutoff carry the
// last accurate digits, and when they instead blow the solution up the
// verification pass discards the candidate anyway.  Which cutoff wins depends
// on the conditioning of the particular region mix, so several are tried.
constexpr double kSvdThresholdsSharp[] = {1e-13, 1e-15};

double falling(int k, int l) {
    double f = 1.0;
    for (int j = 0; j < l; ++j) f *= static_cast<double>(k - j);
    return f;
}

// |P^{(l)}(x)| for real x, straight evaluation of the derivative series.
double derivative_abs_at(const ComplexPolynomial& p, int l, double x) {
    return std::abs(evaluate(derivative(p, l), cplx{x, 0.0}));
}

// Real grid on a flat segment, dense enough that x^degree cannot slip
// between neighbouring points.
std::vector<double> segment_grid(const FlatSegment& seg, int degree, double mult) {
    const double len = seg.r1 - seg.r0;
    const int count =
        std::max(16, static_cast<int>(std::ceil(mult * len * (8.0 + 1.5 * degree))));
    std::vector<double> xs(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        xs[static_cast<size_t>(i)] = seg.r0 + len * i / (count - 1);
    return xs;
}

// Sampling factor under which every piece of the region resolves z^degree.
// An arc of angular width dtheta sees degree * dtheta / 2pi full waves of
// the top monomial and needs a few points per wave; straight pieces see an
// exponential ramp with a comparable scale.
double piece_need(const RegionPiece& piece, int degree) {
    if (const auto* arc = std::get_if<ArcPiece>(&piece)) {
        const double dtheta = arc->angle1 - arc->angle0;
        if (std::abs(arc->center) <= 1e-9 * arc->radius)
            return 8.0 + 3.2 * (degree + 1) * dtheta / two_pi;
        // off-center arcs see the monomial ramp of a curve of their own
        // arclength, not full waves of z^degree
        return 8.0 + 1.5 * degree * arc->radius * dtheta;
    }
    const auto& seg = std::get<SegPiece>(piece);
    return 8.0 + 1.5 * degree * std::abs(seg.z1 - seg.z0);
}

double piece_base(const BoundaryRegion& region, const RegionPiece& piece) {
    if (const auto* arc = std::get_if<ArcPiece>(&piece))
        return region.sample_density * arc->radius * (arc->angle1 - arc->angle0) / region.scale;
    const auto& seg = std::get<SegPiece>(piece);
    return region.sample_density * std::abs(seg.z1 - seg.z0) / region.scale;
}

double region_fit_factor(const BoundaryRegion& region, int degree) {
    double factor = 1.0;
    for (const auto& piece : region.pieces) {
        const double base = piece_base(region, piece);
        if (base > 0.0) factor = std::max(factor, piece_need(piece, degree) / base);
    }
    return factor;
}

// Degree-resolving grid with per-piece counts, so one tiny piece cannot
// force oversampling of the large ones.
std::vector<cplx> degree_sample(const BoundaryRegion& region, int degree, double mult,
                                bool clustered) {
    std::vector<cplx> pts;
    for (const auto& piece : region.pieces) {
        BoundaryRegion single = region;
        single.pieces = {piece};
        const double base = piece_base(region, piece);
        const double factor = (base > 0.0) ? std::max(1.0, mult * piece_need(piece, degree) / base)
                                           : 1.0;
        auto ps = clustered ? sample_clustered(single, factor) : sample(single, factor);
        pts.insert(pts.end(), ps.begin(), ps.end());
    }
    return pts;
}

struct Problem {
    const std::vector<ApproximationTarget>* targets;
    const FitConstraints* constraints;
};

// Coefficient cap |a_k| <= k^{-(l+2)} R^{-k}; index 0 is left free.
double decay_cap(const DecayConstraint& decay, int k) {
    if (k == 0) return 1.0;
    return std::pow(static_cast<double>(k), -(decay.l + 2)) / std::pow(decay.R, k);
}

// Sup of |P - target| over the verification grid of each target, and the
// verification-grid derivative sup when a flatness constraint is present.
void verify(const Problem& prob, const ComplexPolynomial& p, int degree, FitOutcome& out) {
    out.achieved.clear();
    for (const auto& t : *prob.targets) {
        double sup = 0.0;
        for (cplx z : degree_sample(t.region, degree, out.verify_factor, false)) {
            const double e = std::abs(evaluate(p, z) - t.value(z));
            sup = std::isfinite(e) ? std::max(sup, e) : std::numeric_limits<double>::infinity();
        }
        out.achieved.push_back(sup);
    }
    out.flat_achieved = 0.0;
    if (prob.constraints->flat) {
        const auto& flat = *prob.constraints->flat;
        for (const auto& seg : flat.segments)
            for (double x : segment_grid(seg, degree, out.verify_factor))
                out.flat_achieved = std::max(out.flat_achieved, derivative_abs_at(p, flat.l, x));
    }
}

bool decay_holds(const ComplexPolynomial& p, const DecayConstraint& decay) {
    const auto& c = p.coeffs();
    for (int k = 1; k < static_cast<int>(c.size()); ++k) {
        const double lhs = std::abs(c[static_cast<size_t>(k)]) * std::pow(decay.R, k);
        const double rhs = std::pow(static_cast<double>(k), -(decay.l + 2));
        if (lhs > rhs) return false;
    }
    return true;
}

// Damped and minimum-norm solutions of the same least-squares system.  The
// damped one behaves between sample points, the minimum-norm ones are the
// accuracy optimum when the target is nearly representable; the caller
// verifies every candidate and keeps the best.
std::vector<ComplexPolynomial> solve_at_degree(const Problem& prob, int degree) {
    const auto& targets = *prob.targets;
    const auto& constraints = *prob.constraints;
    const int v = constraints.min_valuation;
    assert(degree >= v);
    const int ncols = degree - v + 1;

    // Gather weighted rows: value rows per target, then derivative rows.
    struct ValueRow {
        cplx z;
        cplx rhs;
        double w;
        double tol;
    };
    std::vector<ValueRow> vrows;
    for (const auto& t : targets) {
        auto pts = degree_sample(t.region, degree, 1.0, true);
        if (pts.empty()) continue;
        const double w = 1.0 / (t.tolerance * std::sqrt(static_cast<double>(pts.size())));
        for (cplx z : pts) vrows.push_back({z, t.value(z), w, t.tolerance});
    }
    struct DerivRow {
        double x;
        double w;
        double tol;
    };
    std::vector<DerivRow> drows;
    if (constraints.flat) {
        size_t total = 0;
        for (const auto& seg : constraints.flat->segments)
            total += segment_grid(seg, degree, 1.0).size();
        const double w =
            1.0 / (constraints.flat->bound * std::sqrt(static_cast<double>(std::max<size_t>(total, 1))));
        for (const auto& seg : constraints.flat->segments)
            for (double x : segment_grid(seg, degree, 1.0))
                drows.push_back({x, w, constraints.flat->bound});
    }

    const long rows = static_cast<long>(vrows.size() + drows.size());
    if (rows == 0) return {ComplexPolynomial::zero()};
    const int l = constraints.flat ? constraints.flat->l : 0;

    // Base system; Lawson reweighting multiplies rows on top of it.
    Eigen::MatrixXcd A0(rows, ncols);
    Eigen::VectorXcd b0(rows);
    Eigen::VectorXd wtol(rows);  // per-row weight times its tolerance (block-normalized)
    long r = 0;
    for (const auto& row : vrows) {
        cplx zk = std::pow(row.z, v);
        for (int j = 0; j < ncols; ++j) {
            A0(r, j) = row.w * zk;
            zk *= row.z;
        }
        b0(r) = row.w * row.rhs;
        wtol(r) = row.w * row.tol;
        ++r;
    }
    for (const auto& row : drows) {
        for (int j = 0; j < ncols; ++j) {
            const int k = v + j;
            A0(r, j) = (k >= l) ? cplx{row.w * falling(k, l) * std::pow(row.x, k - l), 0.0}
                                : cplx{0.0, 0.0};
        }
        b0(r) = cplx{0.0, 0.0};
        wtol(r) = row.w * row.tol;
        ++r;
    }

    // |row residual| of p against the base (unit-Lawson) system; entry i is
    // the pointwise error in tolerance-and-density units.
    auto base_residuals = [&](const ComplexPolynomial& p) {
        Eigen::VectorXd res(rows);
        long i = 0;
        for (const auto& row : vrows)
            res(i++) = row.w * std::abs(evaluate(p, row.z) - row.rhs);
        for (const auto& row : drows) res(i++) = row.w * derivative_abs_at(p, l, row.x);
        return res;
    };

    std::vector<ComplexPolynomial> cands;
    Eigen::VectorXd lawson = Eigen::VectorXd::Ones(rows);

    // Plain least squares minimizes the mean square error, which lets the
    // pointwise error pile up at region endpoints; a few Lawson reweighting
    // rounds push the solution toward the minimax one, where that spike is
    // traded away.  Every round contributes a candidate and the caller keeps
    // whichever certifies best on the dense grid.
    for (int iter = 0; iter < 4; ++iter) {
        Eigen::MatrixXcd A = lawson.asDiagonal() * A0;
        Eigen::VectorXcd b = lawson.asDiagonal() * b0;

        // Columns scaled to unit max modulus; the minimum-norm solve then
        // keeps each coefficient near the reciprocal of its largest sampled
        // monomial, which already sits far below any decay cap in the cases
        // that use one.
        Eigen::VectorXd scale(ncols);
        for (int j = 0; j < ncols; ++j) {
            double m = A.col(j).cwiseAbs().maxCoeff();
            scale(j) = (m > 0.0) ? m : 1.0;
            A.col(j) /= scale(j);
        }
        // Entries this far below the rank cutoff are numerically zero;
        // leaving them denormal derails the SVD's deflation.
        A = A.unaryExpr([](cplx z) {
            const double m = std::abs(z);
            return (!std::isfinite(m) || m < 1e-200) ? cplx{0.0, 0.0} : z;
        });
        auto svd = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(kSvdThreshold);

        auto finish = [&](const Eigen::VectorXcd& x) {
            std::vector<cplx> coeffs(static_cast<size_t>(degree) + 1, cplx{0.0, 0.0});
            for (int j = 0; j < ncols; ++j)
                coeffs[static_cast<size_t>(v + j)] = x(j) / scale(j);

            // Rounding can leave a coefficient a hair over its cap; clip it
            // back so the decay inequality holds verbatim.
            if (constraints.decay) {
                for (int j = 0; j < ncols; ++j) {
                    const int k = v + j;
                    if (k == 0) continue;
                    const double cap = decay_cap(*constraints.decay, k) * (1.0 - 1e-9);
                    auto& c = coeffs[static_cast<size_t>(k)];
                    const double mag = std::abs(c);
                    if (mag > cap) c *= cap / mag;
                }
            }
            return ComplexPolynomial{std::move(coeffs)};
        };

        // Tikhonov damping picked by the discrepancy principle: the largest
        // damping whose residual still sits comfortably below "every point at
        // tolerance", so the smoothest adequate coefficient vector wins and
        // the minimum-norm solution's oscillation between samples is avoided.
        const Eigen::VectorXd& sv = svd.singularValues();
        const Eigen::VectorXcd beta = svd.matrixU().adjoint() * b;
        const double base_res2 = std::max(0.0, b.squaredNorm() - beta.squaredNorm());
        const double smax = sv.size() ? sv(0) : 1.0;
        const double res_goal2 =
            0.35 * 0.35 * (lawson.asDiagonal() * wtol).squaredNorm();
        Eigen::VectorXcd y = Eigen::VectorXcd::Zero(sv.size());
        bool found = false;
        for (double lam = smax; lam >= smax * 1e-12; lam *= 0.4) {
            double res2 = base_res2;
            for (long i = 0; i < sv.size(); ++i) {
                const double damp = lam * lam / (sv(i) * sv(i) + lam * lam);
                res2 += damp * damp * std::norm(beta(i));
            }
            if (res2 <= res_goal2) {
                for (long i = 0; i < sv.size(); ++i)
                    y(i) = (sv(i) > kSvdThreshold * smax)
                               ? beta(i) * sv(i) / (sv(i) * sv(i) + lam * lam)
                               : cplx{0.0, 0.0};
                found = true;
                break;
            }
        }

        ComplexPolynomial driver;
        if (found) {
            cands.push_back(finish((svd.matrixV() * y).eval()));
            driver = cands.back();
        }
        if (iter == 0) {
            // The minimum-norm candidates keep more of the spectrum; when the
            // target is nearly representable the directions below the
            // conservative cutoff carry the last accurate digits, and when
            // they instead blow the solution up the dense-grid pass discards
            // the candidate anyway.
            for (double thr : kSvdThresholdsSharp) {
                svd.setThreshold(thr);
                cands.push_back(finish(svd.solve(b)));
            }
            if (!found) driver = cands.front();
        } else if (!found) {
            svd.setThreshold(kSvdThresholdsSharp[0]);
            cands.push_back(finish(svd.solve(b)));
            driver = cands.back();
        }

        Eigen::VectorXd res = base_residuals(driver);
        // Worst fit-grid error over its tolerance; nothing left to gain from
        // further reweighting once it is comfortable.
        double worst = 0.0;
        for (long i = 0; i < rows; ++i) worst = std::max(worst, res(i) / wtol(i));
        if (worst <= 0.7 || iter == 3) break;

        const double rmax = res.maxCoeff();
        if (!(rmax > 0.0) || !std::isfinite(rmax)) break;
        for (long i = 0; i < rows; ++i) lawson(i) *= res(i) + 0.05 * rmax;
        lawson /= lawson.maxCoeff();
        lawson = lawson.cwiseMax(1e-6);
    }
    return cands;
}

bool within_bounds(const Problem& prob, const FitOutcome& out) {
    const auto& targets = *prob.targets;
    for (size_t i = 0; i < targets.size(); ++i)
        if (out.achieved[i] > targets[i].tolerance) return false;
    if (prob.constraints->flat && out.flat_achieved > prob.constraints->flat->bound) return false;
    if (prob.constraints->decay && !decay_holds(out.poly, *prob.constraints->decay)) return false;
    return true;
}

}  // namespace

ApproximationTarget ApproximationTarget::constant(BoundaryRegion r, cplx c, double tol,
                                                  std::string label) {
    return ApproximationTarget{std::move(r), [c](cplx) { return c; }, tol, std::move(label)};
}

ApproximationTarget ApproximationTarget::polynomial(BoundaryRegion r, ComplexPolynomial p,
                                                    double tol, std::string label) {
    return ApproximationTarget{std::move(r), [p = std::move(p)](cplx z) { return evaluate(p, z); },
                               tol, std::move(label)};
}

namespace {
// Worst margin over every requested bound; < 1 means the outcome certifies.
double bound_ratio(const Problem& prob, const FitOutcome& out) {
    double worst = 0.0;
    const auto& targets = *prob.targets;
    for (size_t i = 0; i < targets.size(); ++i)
        worst = std::max(worst, out.achieved[i] / targets[i].tolerance);
    if (prob.constraints->flat)
        worst = std::max(worst, out.flat_achieved / prob.constraints->flat->bound);
    return worst;
}
}  // namespace

FitOutcome approximate_at_degree(const std::vector<ApproximationTarget>& targets,
                                 const FitConstraints& constraints, int degree) {
    Problem prob{&targets, &constraints};
    const int d = std::max(degree, constraints.min_valuation);
    std::vector<ComplexPolynomial> cands = solve_at_degree(prob, d);

    FitOutcome best;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (auto& p : cands) {
        FitOutcome out;
        out.degree = d;
        out.poly = std::move(p);
        verify(prob, out.poly, d, out);
        const double ratio = bound_ratio(prob, out);
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = std::move(out);
        }
    }
    return best;
}

FitOutcome approximate(const std::vector<ApproximationTarget>& targets,
                       const FitConstraints& constraints) {
    for (const auto& t : targets) assert(t.tolerance > 0.0 && "tolerances must be positive");
    Problem prob{&targets, &constraints};
    const int v = constraints.min_valuation;
    if (v >= constraints.max_degree)
        throw ConstraintInfeasible("minimum valuation exceeds the degree budget");
    int width = 64;
    while (true) {
        const int degree = std::min(v + width, constraints.max_degree);
        FitOutcome out = approximate_at_degree(targets, constraints, degree);
        if (std::getenv("ABELUNIV_FIT_DEBUG")) {
            std::fprintf(stderr, "fit d=%d v=%d:", degree, v);
            for (size_t i = 0; i < targets.size(); ++i)
                std::fprintf(stderr, " %s=%.3g/%.3g", targets[i].label.c_str(), out.achieved[i],
                             targets[i].tolerance);
            if (constraints.flat)
                std::fprintf(stderr, " flat=%.3g/%.3g", out.flat_achieved,
                             constraints.flat->bound);
            std::fprintf(stderr, "\n");
        }
        if (within_bounds(prob, out)) return out;
        if (degree == constraints.max_degree) break;
        width *= 2;
    }
    throw BudgetExceeded("degree budget exhausted at max_degree = " +
                         std::to_string(constraints.max_degree));
}

FitOutcome radial_flat_approximate(const BoundaryRegion& K, const ComplexPolynomial& phi,
                                   double eps, int l, double r_prime, double r,
                                   int max_degree, double carrier_eps) {
    assert(r_prime < r && r < 1.0 - kFlatnessEdge);
    assert(eps > 0.0 && l >= 0);
    const double ceps = carrier_eps > 0.0 ? carrier_eps : eps;
    const double h = kFlatnessEdge;
    const BoundaryRegion rK = dilated(K, r);
    const cplx phi1 = evaluate(phi, cplx{1.0, 0.0});
    const bool bridging = contains_angle(K, 0.0);

    // Thin enough that the rectangle stays inside the unit disc; points with
    // modulus past 1 would dominate every high-degree column.
    double delta = std::min((r - r_prime) / 4.0, 0.04);
    if (!bridging) {
        // keep the tube clear of the carrier
        double gap = std::numeric_limits<double>::infinity();
        for (cplx z : sample(rK, 2.0)) {
            const double x = std::clamp(z.real(), r, 1.0 - h);
            gap = std::min(gap, std::abs(z - cplx{x, 0.0}));
        }
        delta = std::min(delta, gap / 2.0);
    }

    // Rectangle around the outer radial segment; a polynomial close to a
    // constant there has small derivatives on the segment itself.
    BoundaryRegion tube;
    tube.kind = RegionKind::RadialSegment;
    const double x0 = r - delta, x1 = 1.0 - h;
    tube.pieces = {SegPiece{cplx{x0, -delta}, cplx{x1, -delta}},
                   SegPiece{cplx{x1, -delta}, cplx{x1, delta}},
                   SegPiece{cplx{x1, delta}, cplx{x0, delta}},
                   SegPiece{cplx{x0, delta}, cplx{x0, -delta}}};
    const cplx tube_value = bridging ? phi1 : cplx{0.0, 0.0};

    // Push-out around the junction: the part of the carrier within an angular
    // window of the real axis is dropped from the fit and handed to the tube,
    // which carries the constant phi(1) across it.  The window is sized so
    // phi moves by at most eps/4 over it.
    double lip = 1e-9;
    for (cplx z : sample(BoundaryRegion::disc(1.0), 4.0))
        lip = std::max(lip, std::abs(evaluate(derivative(phi, 1), z)));
    // No wider than the tube's angular reach, so the excluded part of the
    // carrier stays inside the region where the tube pins the value down.
    const double window =
        bridging ? std::min({0.5, ceps / (4.0 * lip), 0.9 * delta / r}) : 0.0;
    auto trace = [phi, phi1, r, bridging, window](cplx z) {
        const cplx zeta = z / r;
        const cplx raw = evaluate(phi, zeta);
        if (!bridging) return raw;
        const double s = std::min(std::abs(zeta - cplx{1.0, 0.0}) / std::max(window, 1e-12), 1.0);
        return (1.0 - s) * phi1 + s * raw;
    };

    // Carrier with the junction window excluded.
    BoundaryRegion carrier = rK;
    if (bridging && window > 0.0) {
        carrier.pieces.clear();
        const double lo = window, hi = two_pi - window;
        for (const auto& piece : rK.pieces) {
            const auto* arc = std::get_if<ArcPiece>(&piece);
            if (!arc) continue;
            for (int k = -1; k <= 1; ++k) {
                const double a = std::max(arc->angle0, lo + k * two_pi);
                const double b2 = std::min(arc->angle1, hi + k * two_pi);
                if (b2 - a > 1e-9)
                    carrier.pieces.push_back(ArcPiece{arc->center, arc->radius, a, b2});
            }
        }
    }

    std::vector<ApproximationTarget> targets;
    targets.push_back(
        ApproximationTarget::constant(BoundaryRegion::disc(r_prime), cplx{0.0, 0.0}, eps / 2.0, "disc"));
    targets.push_back(ApproximationTarget{carrier, trace, ceps / 2.0, "carrier"});
    targets.push_back(ApproximationTarget::constant(tube, tube_value, eps / 2.0, "tube"));

    FitConstraints constraints;
    constraints.max_degree = max_degree;
    constraints.flat = FlatDerivativeConstraint{
        l, {FlatSegment{0.0, r_prime}, FlatSegment{r, 1.0 - h}}, eps / 2.0};

    FitOutcome out = approximate(targets, constraints);

    // Re-certify against the unbridged trace; the blend costs at most eps/4.
    double carrier_sup = 0.0;
    const double cf = out.verify_factor * region_fit_factor(rK, out.degree);
    for (cplx z : sample(rK, cf))
        carrier_sup = std::max(carrier_sup, std::abs(evaluate(out.poly, z) - evaluate(phi, z / r)));
    out.achieved[1] = carrier_sup;
    if (carrier_sup > ceps)
        throw BudgetExceeded("bridged carrier fit exceeds the requested bound");
    return out;
}

FitOutcome decayed_tail_approximate(const BoundaryRegion& K, const ComplexPolynomial& phi,
                                    double eps, int l, int N, double R, int max_degree) {
    assert(R >= 1.0 && eps > 0.0 && N >= 0);
    double inner = std::numeric_limits<double>::infinity();
    for (cplx z : sample(K, 2.0)) inner = std::min(inner, std::abs(z));
    if (!(inner > R))
        throw ConstraintInfeasible("carrier must keep a positive distance from the disc");
    const double eta = (inner - R) / 2.0;

    // Smallest M with (eps/2) k^{l+2} (R/(R+eta))^k <= 1 for all k >= M.
    const double q = R / (R + eta);
    int M = 1;
    for (int k = 1; k <= 500000 && k < M + 1000; ++k)
        if ((eps / 2.0) * std::pow(static_cast<double>(k), l + 2) * std::pow(q, k) > 1.0)
            M = k + 1;
    if (M >= max_degree) throw ConstraintInfeasible("decay start index exceeds the degree budget");

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<ApproximationTarget> targets;
        targets.push_back(ApproximationTarget::constant(BoundaryRegion::disc(R), cplx{0.0, 0.0},
                                                        eps, "disc"));
        targets.push_back(ApproximationTarget::polynomial(K, phi, eps, "carrier"));

        FitConstraints constraints;
        constraints.max_degree = max_degree;
        constraints.min_valuation = std::max(N, M) + 16 * attempt;
        constraints.decay = DecayConstraint{R, l};
        try {
            return approximate(targets, constraints);
        } catch (const BudgetExceeded&) {
            if (attempt == 1) throw;
        }
    }
    throw BudgetExceeded("decayed fit failed after valuation escalation");
}

}  // namespace abeluniv
