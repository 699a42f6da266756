#include "abeluniv/density.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace abeluniv {

namespace {

// Exact interval lengths, accumulated suffix-first in long double for the
// window sweeps.  Per-interval arithmetic stays rational; only the running
// sums over thousands of intervals are rounded (their denominators have no
// common structure, so exact accumulation is quadratic in bit size).
std::vector<long double> suffix_lengths(const DensitySet& G) {
    std::vector<long double> s(G.intervals.size() + 1, 0.0L);
    for (size_t i = G.intervals.size(); i-- > 0;) {
        const Rat len = G.intervals[i].hi - G.intervals[i].lo;
        s[i] = s[i + 1] + static_cast<long double>(len.convert_to<double>());
    }
    return s;
}

long double tail_measure_ld(const DensitySet& G, const std::vector<long double>& suffix,
                            const Rat& t) {
    // first interval with hi > t
    size_t lo = 0, hi = G.intervals.size();
    while (lo < hi) {
        const size_t mid = (lo + hi) / 2;
        if (G.intervals[mid].hi > t)
            hi = mid;
        else
            lo = mid + 1;
    }
    if (lo == G.intervals.size()) return 0.0L;
    long double m = suffix[lo];
    if (G.intervals[lo].lo < t) {
        const Rat cut = t - G.intervals[lo].lo;
        m -= static_cast<long double>(cut.convert_to<double>());
    }
    return m;
}

std::string rat_to_string(const Rat& q) {
    std::ostringstream os;
    os << numerator(q) << "/" << denominator(q);
    return os.str();
}

}  // namespace

Rat DensitySet::measure() const {
    Rat total{0};
    for (const auto& iv : intervals) total += iv.hi - iv.lo;
    return total;
}

Rat tail_measure(const DensitySet& G, const Rat& t) {
    Rat total{0};
    for (const auto& iv : G.intervals) {
        if (iv.hi <= t) continue;
        total += iv.hi - std::max(iv.lo, t);
    }
    return total;
}

double natural_density(const DensitySet& E, DensityMode mode, std::int64_t N) {
    assert(E.kind == DensitySet::Kind::Integers && N >= 1);
    double best = (mode == DensityMode::Lower) ? 2.0 : -1.0;
    size_t count = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        while (count < E.integers.size() && E.integers[count] <= n) ++count;
        if (n < N / 2 || n < 1) continue;
        const double v = static_cast<double>(count) / static_cast<double>(n);
        best = (mode == DensityMode::Lower) ? std::min(best, v) : std::max(best, v);
    }
    return best;
}

double uniform_density(const DensitySet& G, DensityMode mode, std::int64_t N) {
    assert(G.kind == DensitySet::Kind::Intervals && N >= 1);
    const auto suffix = suffix_lengths(G);
    double best = (mode == DensityMode::Lower) ? 2.0 : -1.0;
    for (std::int64_t n = std::max<std::int64_t>(1, N / 2); n <= N; ++n) {
        const Rat t = Rat(1) - Rat(1, n);
        const long double m = tail_measure_ld(G, suffix, t);
        const double v = static_cast<double>(static_cast<long double>(n) * m);
        best = (mode == DensityMode::Lower) ? std::min(best, v) : std::max(best, v);
    }
    return best;
}

DensitySet unit_complement(const DensitySet& G) {
    assert(G.kind == DensitySet::Kind::Intervals);
    DensitySet out;
    out.kind = DensitySet::Kind::Intervals;
    out.horizon = G.horizon;
    Rat cursor{0};
    for (const auto& iv : G.intervals) {
        if (iv.lo > cursor) out.intervals.push_back(RatInterval{cursor, iv.lo});
        cursor = std::max(cursor, iv.hi);
    }
    if (cursor < Rat(1)) out.intervals.push_back(RatInterval{cursor, Rat(1)});
    return out;
}

LabelledFamily make_A_families(int L, std::int64_t horizon) {
    assert(L >= 1 && horizon >= 1);
    LabelledFamily family;
    family.labels = L;
    const std::int64_t C = 2 * L;
    for (int l = 1; l <= L; ++l) {
        for (int n = 1; n <= L; ++n) {
            const int p = (l - 1) * L + (n - 1);
            LabelledSet s;
            s.l = l;
            s.n = n;
            s.witness_M = C * (std::int64_t{2} << p);  // the gap 4L * 2^p
            s.declared_lower = 1.0 / static_cast<double>(s.witness_M);
            s.set.kind = DensitySet::Kind::Integers;
            s.set.horizon = horizon;
            const std::int64_t base = C << p;
            for (std::int64_t j = base; j <= horizon; j += 2 * base) s.set.integers.push_back(j);
            family.sets.push_back(std::move(s));
        }
    }
    // post-hoc verification of the separation scheme
    std::vector<std::pair<std::int64_t, int>> all;  // (element, n+label bound)
    for (const auto& s : family.sets) {
        for (std::int64_t j : s.set.integers) {
            if (j < s.n) throw std::logic_error("family element below its label index");
            all.emplace_back(j, s.n);
        }
    }
    std::sort(all.begin(), all.end());
    for (size_t i = 1; i < all.size(); ++i) {
        const std::int64_t diff = all[i].first - all[i - 1].first;
        if (diff < all[i].second + all[i - 1].second)
            throw std::logic_error("separation |j-j'| >= n+n' violated");
    }
    return family;
}

LabelledFamily make_Gamma_family(DensityMode mode, int L, std::int64_t horizon) {
    assert(L >= 1 && horizon >= 2);
    LabelledFamily family;
    family.labels = L;
    if (mode == DensityMode::Lower) {
        LabelledFamily A = make_A_families(L, horizon);
        for (const auto& a : A.sets) {
            LabelledSet s;
            s.l = a.l;
            s.n = a.n;
            s.witness_M = a.witness_M;
            const double M = static_cast<double>(a.witness_M);
            s.declared_lower = 2.0 / (3.0 * M * M);
            s.set.kind = DensitySet::Kind::Intervals;
            s.set.horizon = horizon;
            for (std::int64_t j : a.set.integers) {
                if (j < 2) continue;
                const Rat center = Rat(1) - Rat(1, j);
                const Rat left = center - (Rat(1, j - 1) - Rat(1, j)) / 3;
                const Rat right = center + (Rat(1, j) - Rat(1, j + 1)) / 3;
                s.set.intervals.push_back(RatInterval{left, right});
            }
            family.sets.push_back(std::move(s));
        }
    } else {
        // Dyadic blocks [1-2^{-N_i}, 1-2^{-M_i}], N_i = 2+5i, M_i = N_i+4,
        // block i owned by label index i mod L^2; each block contributes
        // uniform density 1 - 2^{N_i - M_i} = 15/16 at n = 2^{N_i}.
        for (int l = 1; l <= L; ++l) {
            for (int n = 1; n <= L; ++n) {
                LabelledSet s;
                s.l = l;
                s.n = n;
                s.witness_M = 16;
                s.declared_lower = 1.0 - 1.0 / 16.0;  // upper-density floor per block
                s.set.kind = DensitySet::Kind::Intervals;
                s.set.horizon = horizon;
                family.sets.push_back(std::move(s));
            }
        }
        for (int i = 0;; ++i) {
            const int Ni = 2 + 5 * i;
            const int Mi = Ni + 4;
            if (Mi > 62) break;
            if ((std::int64_t{1} << Ni) > 4 * horizon) break;
            const int p = i % (L * L);
            auto& s = family.sets[static_cast<size_t>(p)];
            s.set.intervals.push_back(
                RatInterval{Rat(1) - Rat(1, std::int64_t{1} << Ni),
                            Rat(1) - Rat(1, std::int64_t{1} << Mi)});
        }
    }
    // exact pairwise-disjointness check across the whole family
    std::vector<RatInterval> all;
    for (const auto& s : family.sets)
        all.insert(all.end(), s.set.intervals.begin(), s.set.intervals.end());
    std::sort(all.begin(), all.end(),
              [](const RatInterval& x, const RatInterval& y) { return x.lo < y.lo; });
    for (size_t i = 1; i < all.size(); ++i)
        if (!(all[i - 1].hi < all[i].lo))
            throw std::logic_error("family intervals are not pairwise disjoint");
    return family;
}

std::pair<double, double> pullback_density_bound(const DensitySet& G,
                                                 const Reparametrization& rep, DensityMode mode,
                                                 std::int64_t N) {
    assert(G.kind == DensitySet::Kind::Intervals);
    // monotonicity sample check
    const int probes = 256;
    double prev = rep.h(rep.a, 0.0);
    for (int i = 1; i <= probes; ++i) {
        const double r = (1.0 - 1e-9) * static_cast<double>(i) / probes;
        const double v = rep.h(rep.a, r);
        if (!(v >= prev)) throw NonMonotone("reparametrization decreases on samples");
        prev = v;
    }

    const double lo_image = rep.h(rep.a, 0.0);
    auto invert = [&](double y) {
        double lo = 0.0, hi = 1.0 - 1e-12;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (rep.h(rep.a, mid) < y)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };

    DensitySet pre;
    pre.kind = DensitySet::Kind::Intervals;
    pre.horizon = G.horizon;
    for (const auto& iv : G.intervals) {
        const double hi_d = iv.hi.convert_to<double>();
        if (hi_d <= lo_image) continue;
        const double lo_d = std::max(iv.lo.convert_to<double>(), lo_image);
        const Rat plo = to_rational(invert(lo_d));
        const Rat phi = to_rational(invert(hi_d));
        if (!(plo < phi)) continue;
        if (!pre.intervals.empty() && !(pre.intervals.back().hi < plo))
            pre.intervals.back().hi = phi;  // merge touching preimages
        else
            pre.intervals.push_back(RatInterval{plo, phi});
    }

    const double measured = uniform_density(pre, mode, N);
    const double bound = (rep.c / rep.C) * uniform_density(G, mode, N);
    return {measured, bound};
}

std::string density_to_json_text(const LabelledFamily& family) {
    using nlohmann::json;
    json sets = json::array();
    for (const auto& s : family.sets) {
        json js{{"M", s.witness_M},
                {"declared", s.declared_lower},
                {"horizon", s.set.horizon},
                {"l", s.l},
                {"n", s.n}};
        if (s.set.kind == DensitySet::Kind::Integers) {
            js["integers"] = s.set.integers;
        } else {
            json ivs = json::array();
            for (const auto& iv : s.set.intervals)
                ivs.push_back(json::array({rat_to_string(iv.lo), rat_to_string(iv.hi)}));
            js["intervals"] = ivs;
        }
        sets.push_back(std::move(js));
    }
    json doc{{"labels", family.labels}, {"schema", "abeluniv/1"}, {"sets", sets}};
    return doc.dump(1);
}

}  // namespace abeluniv
