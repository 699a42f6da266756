#pragma once

// Sampled compact subsets of the closed unit disc used by the staged
// builders: arc unions on the unit circle, circle boundaries of closed
// discs, radial segments, and pieces of cone boundaries.  Every region is
// a finite union of circular-arc and straight-segment components, so
// deterministic arclength-uniform sampling covers all of them.
//
// Discs are represented by their boundary circle: for polynomials the sup
// over a closed disc equals the sup over its boundary, so fitting and
// checking on the circle is equivalent and much cheaper.

#include <complex>
#include <utility>
#include <variant>
#include <vector>

#include "abeluniv/polynomial.hpp"

namespace abeluniv {

// Arc of the circle |z - center| = radius, angles angle0 < angle1 (radians,
// measured at center); a full circle has angle1 = angle0 + 2*pi.
struct ArcPiece {
    cplx center{0.0, 0.0};
    double radius = 1.0;
    double angle0 = 0.0;
    double angle1 = 0.0;
};

// Straight segment from z0 to z1.
struct SegPiece {
    cplx z0{0.0, 0.0};
    cplx z1{0.0, 0.0};
};

using RegionPiece = std::variant<ArcPiece, SegPiece>;

enum class RegionKind { ArcUnion, Disc, RadialSegment, ConePiece, Dilated };

struct BoundaryRegion {
    RegionKind kind = RegionKind::ArcUnion;
    std::vector<RegionPiece> pieces;
    double sample_density = 8.0;  // points per unit of arclength
    double scale = 1.0;           // accumulated dilation factor

    bool empty() const { return pieces.empty(); }
    double total_length() const;

    // Finite union of closed arcs on the unit circle; each arc given as
    // (start angle, end angle) with end > start and total measure < 2*pi.
    static BoundaryRegion arc_union(const std::vector<std::pair<double, double>>& arcs);
    // Boundary circle of the closed disc D(0, radius).
    static BoundaryRegion disc(double radius);
    // Segment [r0, r1] * zeta for a unit-modulus direction zeta.
    static BoundaryRegion radial_segment(double r0, double r1, cplx zeta);
};

// rE = {r z : z in E}.
BoundaryRegion dilated(const BoundaryRegion& region, double r);

// n-th set of a fixed enumeration of complements (in the unit circle) of
// open arcs with dyadic-fraction center angle and rational length; always a
// single closed arc, never the full circle.
BoundaryRegion exhaustion_K(int n);

// Deterministic arclength-uniform samples, component endpoints included;
// per component at least ceil(factor * sample_density * length) points.
std::vector<cplx> sample(const BoundaryRegion& region, double factor = 1.0);

// Same counts, but the parameter is cosine-warped so samples cluster
// quadratically toward each component's endpoints, where polynomial error
// concentrates; used for fitting grids.
std::vector<cplx> sample_clustered(const BoundaryRegion& region, double factor = 1.0);

// True iff the direction e^{i theta} lies on the arc union (unit-circle
// regions only).
bool contains_angle(const BoundaryRegion& region, double theta);

// Smallest pairwise distance between samples of two regions.
double sample_distance(const BoundaryRegion& a, const BoundaryRegion& b, double factor = 1.0);

/// Geometry of the nested annular sets used by the cluster-set builder:
// radii a_n increasing to 1, clearances eta_n, and two unit directions.
struct ClusterGeometry {
    cplx zeta1{1.0, 0.0};
    cplx zeta2{-1.0, 0.0};

    // a_n = 1 - 2^{-(n+1)} by default.
    double a(int n) const;
    // Half the largest clearance allowed by the strict inequalities
    // eta_n < min(a_{2n+2}-a_{2n+1}, a_{2n+3}-a_{2n+2}, |zeta1-zeta2|/(2 pi)).
    double eta(int n) const;
    // Radius of the outer circle of L_n.
    double outer_radius(int n) const { return a(2 * n + 2) + eta(n); }

    // Boundary of L_n = D(0, a_{2n+2}+eta_n) minus the open disc
    // D((a_{2n+2}+eta_n) zeta1, 2 eta_n).
    BoundaryRegion boundary_L(int n) const;
};

// C_n(I) = C(I) cap boundary(L_n), where C(I) is the cone of points whose
// direction lies in the arc union I.
BoundaryRegion cone_segment(const ClusterGeometry& geom, int n, const BoundaryRegion& I);

}  // namespace abeluniv
