#include "abeluniv/regions.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace abeluniv {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double piece_length(const RegionPiece& piece) {
    if (const auto* arc = std::get_if<ArcPiece>(&piece))
        return arc->radius * (arc->angle1 - arc->angle0);
    const auto& seg = std::get<SegPiece>(piece);
    return std::abs(seg.z1 - seg.z0);
}

cplx piece_at(const RegionPiece& piece, double t) {
    if (const auto* arc = std::get_if<ArcPiece>(&piece)) {
        double th = arc->angle0 + t * (arc->angle1 - arc->angle0);
        return arc->center + arc->radius * cplx{std::cos(th), std::sin(th)};
    }
    const auto& seg = std::get<SegPiece>(piece);
    return seg.z0 + t * (seg.z1 - seg.z0);
}

double wrap_to(double theta, double lo) {
    // representative of theta in [lo, lo + 2 pi)
    double t = std::fmod(theta - lo, two_pi);
    if (t < 0) t += two_pi;
    return lo + t;
}

// Intersection of the angular intervals [a0,a1] and [b0,b1] on the circle,
// appended to out as sub-intervals of [a0,a1].
void intersect_angular(double a0, double a1, double b0, double b1,
                       std::vector<std::pair<double, double>>& out) {
    for (int k = -2; k <= 2; ++k) {
        double lo = std::max(a0, b0 + k * two_pi);
        double hi = std::min(a1, b1 + k * two_pi);
        if (hi - lo > 1e-12) out.emplace_back(lo, hi);
    }
}

}  // namespace

double BoundaryRegion::total_length() const {
    double s = 0.0;
    for (const auto& p : pieces) s += piece_length(p);
    return s;
}

BoundaryRegion BoundaryRegion::arc_union(const std::vector<std::pair<double, double>>& arcs) {
    BoundaryRegion region;
    region.kind = RegionKind::ArcUnion;
    double total = 0.0;
    for (auto [a0, a1] : arcs) {
        assert(a1 > a0 && "arc endpoints must be increasing");
        assert(a1 - a0 < two_pi && "a single arc must be proper");
        total += a1 - a0;
        region.pieces.push_back(ArcPiece{cplx{0.0, 0.0}, 1.0, a0, a1});
    }
    assert(total < two_pi && "arc union must miss part of the circle");
    return region;
}

BoundaryRegion BoundaryRegion::disc(double radius) {
    assert(radius >= 0.0);
    BoundaryRegion region;
    region.kind = RegionKind::Disc;
    if (radius > 0.0)
        region.pieces.push_back(ArcPiece{cplx{0.0, 0.0}, radius, 0.0, two_pi});
    return region;
}

BoundaryRegion BoundaryRegion::radial_segment(double r0, double r1, cplx zeta) {
    assert(r0 <= r1);
    BoundaryRegion region;
    region.kind = RegionKind::RadialSegment;
    region.pieces.push_back(SegPiece{r0 * zeta, r1 * zeta});
    return region;
}

BoundaryRegion dilated(const BoundaryRegion& region, double r) {
    assert(r >= 0.0);
    BoundaryRegion out = region;
    out.kind = RegionKind::Dilated;
    out.scale = region.scale * r;
    for (auto& piece : out.pieces) {
        if (auto* arc = std::get_if<ArcPiece>(&piece)) {
            arc->center *= r;
            arc->radius *= r;
        } else {
            auto& seg = std::get<SegPiece>(piece);
            seg.z0 *= r;
            seg.z1 *= r;
        }
    }
    return out;
}

BoundaryRegion exhaustion_K(int n) {
    assert(n >= 0);
    // Cantor unpairing n -> (a, b).
    long t = 0;
    long nn = n;
    while ((t + 1) * (t + 2) / 2 <= nn) ++t;
    long b = nn - t * (t + 1) / 2;
    long a = t - b;
    // a -> dyadic fraction p / 2^j, enumerated level by level.
    int j = 0;
    long base = 0;
    while (base + (1L << j) <= a) {
        base += 1L << j;
        ++j;
    }
    long p = a - base;
    const double center = two_pi * static_cast<double>(p) / static_cast<double>(1L << j);
    const double len = 1.0 / static_cast<double>(b + 1);  // removed open arc, radians
    return BoundaryRegion::arc_union({{center + len / 2.0, center + two_pi - len / 2.0}});
}

namespace {
std::vector<cplx> sample_impl(const BoundaryRegion& region, double factor, bool clustered) {
    assert(factor >= 1.0);
    std::vector<cplx> pts;
    for (const auto& piece : region.pieces) {
        // density counts points per unit of scale-normalized arclength, so a
        // dilated copy keeps the sample count of its parent
        const double len = piece_length(piece) / region.scale;
        const int count =
            std::max(2, static_cast<int>(std::ceil(factor * region.sample_density * len)));
        for (int i = 0; i < count; ++i) {
            double t = static_cast<double>(i) / (count - 1);
            if (clustered) t = 0.5 * (1.0 - std::cos(std::numbers::pi * t));
            pts.push_back(piece_at(piece, t));
        }
    }
    return pts;
}
}  // namespace

std::vector<cplx> sample(const BoundaryRegion& region, double factor) {
    return sample_impl(region, factor, false);
}

std::vector<cplx> sample_clustered(const BoundaryRegion& region, double factor) {
    return sample_impl(region, factor, true);
}

bool contains_angle(const BoundaryRegion& region, double theta) {
    for (const auto& piece : region.pieces) {
        const auto* arc = std::get_if<ArcPiece>(&piece);
        if (!arc) continue;
        double t = wrap_to(theta, arc->angle0);
        if (t <= arc->angle1 + 1e-12) return true;
    }
    return false;
}

double sample_distance(const BoundaryRegion& a, const BoundaryRegion& b, double factor) {
    auto pa = sample(a, factor);
    auto pb = sample(b, factor);
    double best = std::numeric_limits<double>::infinity();
    for (cplx x : pa)
        for (cplx y : pb) best = std::min(best, std::abs(x - y));
    return best;
}

double ClusterGeometry::a(int n) const {
    assert(n >= 0);
    return 1.0 - std::ldexp(1.0, -(n + 1));
}

double ClusterGeometry::eta(int n) const {
    const double gap1 = a(2 * n + 2) - a(2 * n + 1);
    const double gap2 = a(2 * n + 3) - a(2 * n + 2);
    const double gap3 = std::abs(zeta1 - zeta2) / two_pi;
    return 0.5 * std::min({gap1, gap2, gap3});
}

BoundaryRegion ClusterGeometry::boundary_L(int n) const {
    const double rho = outer_radius(n);
    const double eta_n = eta(n);
    const double phi1 = std::arg(zeta1);
    // Outer circle minus the band cut out by the removed disc: chord length
    // 2 rho sin(theta/2) = 2 eta at the crossing angles.
    const double band = 2.0 * std::asin(eta_n / rho);

    BoundaryRegion region;
    region.kind = RegionKind::ConePiece;
    region.pieces.push_back(ArcPiece{cplx{0.0, 0.0}, rho, phi1 + band, phi1 + two_pi - band});

    // Portion of the removed disc's circle lying inside the outer disc; it
    // straddles the local angle phi1 + pi (the point nearest the origin).
    const cplx small_center = rho * zeta1;
    const cplx crossing = rho * cplx{std::cos(phi1 + band), std::sin(phi1 + band)};
    double d = wrap_to(std::arg(crossing - small_center), phi1);  // in [phi1, phi1 + 2 pi)
    double half = std::abs(d - (phi1 + std::numbers::pi));
    region.pieces.push_back(ArcPiece{small_center, 2.0 * eta_n,
                                     phi1 + std::numbers::pi - half,
                                     phi1 + std::numbers::pi + half});
    return region;
}

BoundaryRegion cone_segment(const ClusterGeometry& geom, int n, const BoundaryRegion& I) {
    BoundaryRegion shell = geom.boundary_L(n);
    BoundaryRegion region;
    region.kind = RegionKind::ConePiece;
    region.sample_density = shell.sample_density;

    // Outer arc pieces: direction equals the angle, so intersect angle
    // intervals directly.
    const auto& outer = std::get<ArcPiece>(shell.pieces[0]);
    for (const auto& piece : I.pieces) {
        const auto* arc = std::get_if<ArcPiece>(&piece);
        if (!arc) continue;
        std::vector<std::pair<double, double>> hits;
        intersect_angular(outer.angle0, outer.angle1, arc->angle0, arc->angle1, hits);
        for (auto [lo, hi] : hits)
            region.pieces.push_back(ArcPiece{outer.center, outer.radius, lo, hi});
    }

    // Small-circle piece: direction varies nonlinearly along the arc, so
    // find the runs of in-cone samples and keep them as sub-arcs.
    const auto& inner = std::get<ArcPiece>(shell.pieces[1]);
    const int probe = 512;
    std::vector<bool> in(probe + 1);
    for (int i = 0; i <= probe; ++i) {
        double th = inner.angle0 + (inner.angle1 - inner.angle0) * i / probe;
        cplx z = inner.center + inner.radius * cplx{std::cos(th), std::sin(th)};
        in[static_cast<size_t>(i)] = contains_angle(I, std::arg(z));
    }
    int i = 0;
    while (i <= probe) {
        if (!in[static_cast<size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= probe && in[static_cast<size_t>(j + 1)]) ++j;
        double lo = inner.angle0 + (inner.angle1 - inner.angle0) * i / probe;
        double hi = inner.angle0 + (inner.angle1 - inner.angle0) * j / probe;
        if (hi > lo) region.pieces.push_back(ArcPiece{inner.center, inner.radius, lo, hi});
        i = j + 1;
    }
    return region;
}

}  // namespace abeluniv
