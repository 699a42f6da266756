#include "abeluniv/verification.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "abeluniv/constructions.hpp"
#include "abeluniv/enumerations.hpp"
#include "abeluniv/rational.hpp"
#include "abeluniv/regions.hpp"

namespace abeluniv {

namespace {

double region_sup(const ComplexPolynomial& p, const BoundaryRegion& region, double factor,
                  double dilation, const std::function<cplx(cplx)>& rhs, int* count = nullptr) {
    double sup = 0.0;
    auto pts = sample(region, factor);
    for (cplx z : pts) {
        const double e = std::abs(evaluate(p, dilation * z) - rhs(z));
        sup = std::max(sup, std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
    }
    if (count) *count = static_cast<int>(pts.size());
    return sup;
}

ComplexPolynomial truncated(const ComplexPolynomial& p, int deg) {
    const auto& c = p.coeffs();
    const size_t n = std::min(c.size(), static_cast<size_t>(std::max(deg + 1, 0)));
    return ComplexPolynomial{std::vector<cplx>(c.begin(), c.begin() + n)};
}

// violations of |sum_{j<=k} S_j(f)(1)| >= k for k in [k_lo, k_hi], exact,
// one incremental sweep
int cesaro_violations(const std::vector<cplx>& coeffs, int k_lo, int k_hi, int* first = nullptr) {
    RatComplex C, s;
    if (!coeffs.empty()) s += RatComplex(coeffs[0]);  // S_0 = a_0
    C += s;
    int bad = 0;
    for (int k = 1; k <= k_hi; ++k) {
        // S_k = S_{k-1} + a_k, C_k = C_{k-1} + S_k
        const cplx a = (k < static_cast<int>(coeffs.size())) ? coeffs[static_cast<size_t>(k)]
                                                             : cplx{0.0, 0.0};
        s += RatComplex(a);
        C += s;
        if (k >= k_lo && abs_squared(C) < Rat(k) * Rat(k)) {
            if (bad == 0 && first) *first = k;
            ++bad;
        }
    }
    return bad;
}

}  // namespace

DensitySet visit_set(const PowerSeriesStage& f, const NeighborhoodSpec& V,
                     const std::vector<double>& radii, double tail_bound) {
    if (tail_bound >= V.radius / 10.0)
        throw TailUnreliable("tail bound too large for the requested neighborhood radius");
    const BoundaryRegion K = exhaustion_K(V.carrier);
    const ComplexPolynomial p = f.as_polynomial();
    DensitySet out;
    out.kind = DensitySet::Kind::Integers;
    out.horizon = static_cast<std::int64_t>(radii.size());
    for (size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        auto rhs = [&](cplx z) { return evaluate(V.center, z); };
        double sup = region_sup(p, K, 2.0, r, rhs);
        if (std::abs(sup + tail_bound - V.radius) <= 0.1 * V.radius)
            sup = region_sup(p, K, 4.0, r, rhs);
        if (sup + tail_bound < V.radius) out.integers.push_back(static_cast<std::int64_t>(i) + 1);
    }
    return out;
}

DensitySet visit_set(const PowerSeriesStage& f, const NeighborhoodSpec& V, double r_lo,
                     double r_hi, int count, double tail_bound) {
    if (tail_bound >= V.radius / 10.0)
        throw TailUnreliable("tail bound too large for the requested neighborhood radius");
    const BoundaryRegion K = exhaustion_K(V.carrier);
    const ComplexPolynomial p = f.as_polynomial();
    std::vector<double> grid(static_cast<size_t>(count));
    std::vector<bool> pass(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double r = (count == 1) ? r_lo : r_lo + (r_hi - r_lo) * i / (count - 1);
        grid[static_cast<size_t>(i)] = r;
        auto rhs = [&](cplx z) { return evaluate(V.center, z); };
        double sup = region_sup(p, K, 2.0, r, rhs);
        if (std::abs(sup + tail_bound - V.radius) <= 0.1 * V.radius)
            sup = region_sup(p, K, 4.0, r, rhs);
        pass[static_cast<size_t>(i)] = sup + tail_bound < V.radius;
    }
    DensitySet out;
    out.kind = DensitySet::Kind::Intervals;
    out.horizon = count;
    int i = 0;
    while (i < count) {
        if (!pass[static_cast<size_t>(i)]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < count && pass[static_cast<size_t>(j + 1)]) ++j;
        out.intervals.push_back(RatInterval{to_rational(grid[static_cast<size_t>(i)]),
                                            to_rational(grid[static_cast<size_t>(j)])});
        i = j + 1;
    }
    return out;
}

VerificationReport replay_stage_log(const StagedFunction& sf) {
    VerificationReport report;

    // series invariant: the stored series is the stage-ordered floating sum
    {
        const ComplexPolynomial sum = stage_sum(sf);
        const auto& a = sum.coeffs();
        const auto& b = sf.series.coeffs();
        bool same = true;
        const size_t n = std::max(a.size(), b.size());
        for (size_t k = 0; k < n && same; ++k) {
            const cplx x = (k < a.size()) ? a[k] : cplx{0.0, 0.0};
            const cplx y = (k < b.size()) ? b[k] : cplx{0.0, 0.0};
            same = (x == y);
        }
        report.checks.push_back(CheckResult{"series-invariant", same, same ? 0.0 : 1.0, 0.0, 0});
    }

    PowerSeriesStage prefix_all;
    std::map<std::string, PowerSeriesStage> named_prefix;
    std::map<int, Rat> alphas;  // cumulative exact corrections by coefficient

    for (const auto& st : sf.stages) {
        for (const auto& np : st.polynomials) {
            prefix_all.add(np.poly);
            named_prefix[np.name].add(np.poly);
        }
        for (const auto& [k, a] : st.exact_alphas) alphas[k] += a;

        auto select = [&](const std::string& lhs) -> ComplexPolynomial {
            if (lhs.rfind("stage:", 0) == 0) {
                const std::string name = lhs.substr(6);
                for (const auto& np : st.polynomials)
                    if (np.name == name) return np.poly;
                return ComplexPolynomial::zero();
            }
            if (lhs.rfind("prefix:", 0) == 0) {
                auto it = named_prefix.find(lhs.substr(7));
                return it == named_prefix.end() ? ComplexPolynomial::zero()
                                                : it->second.as_polynomial();
            }
            if (lhs == "series") return sf.series.as_polynomial();
            return prefix_all.as_polynomial();
        };

        for (const auto& rec : st.checks) {
            CheckResult res;
            res.id = rec.id;
            res.bound = rec.bound;
            if (rec.kind == "note") {
                res.measured = rec.measured;
                report.checks.push_back(res);
                continue;
            }

            if (rec.kind == "sup") {
                ComplexPolynomial L = select(rec.lhs);
                if (!rec.args.empty()) L = truncated(L, static_cast<int>(rec.args[0]));
                if (rec.deriv > 0) L = derivative(L, rec.deriv);
                auto rhs = [&](cplx z) {
                    const cplx w = rec.rhs_direction ? z / std::abs(z) : z;
                    return evaluate(rec.rhs, w);
                };
                res.measured =
                    region_sup(L, rec.region, 2.0 * rec.factor, rec.dilation, rhs, &res.grid);
                res.pass = res.measured <= rec.bound * 1.05 + 1e-12;
            } else if (rec.kind == "coeff_sum") {
                const ComplexPolynomial L = select(rec.lhs);
                double s = 0.0, rk = 1.0;
                for (const cplx& c : L.coeffs()) {
                    s += std::abs(c) * rk;
                    rk *= rec.args.at(0);
                }
                res.measured = s;
                res.pass = res.measured <= rec.bound + 1e-12;
            } else if (rec.kind == "coeff_cap") {
                const ComplexPolynomial L = select(rec.lhs);
                double m = 0.0;
                for (size_t k = 1; k < L.coeffs().size(); ++k)
                    m = std::max(m, std::abs(L.coeffs()[k]) / (2.0 * static_cast<double>(k)));
                res.measured = m;
                res.pass = res.measured <= rec.bound + 1e-12;
            } else if (rec.kind == "decay") {
                const ComplexPolynomial L = select(rec.lhs);
                const double R = rec.args.at(0), l = rec.args.at(1);
                double m = 0.0;
                for (size_t k = 1; k < L.coeffs().size(); ++k)
                    if (L.coeffs()[k] != cplx{0.0, 0.0})
                        m = std::max(m,
                                     std::exp(std::log(std::abs(L.coeffs()[k])) +
                                              static_cast<double>(k) * std::log(R) +
                                              (l + 2.0) * std::log(static_cast<double>(k))));
                res.measured = m;
                res.pass = res.measured <= rec.bound + 1e-9;
            } else if (rec.kind == "valuation") {
                const ComplexPolynomial L = select(rec.lhs);
                res.measured = L.is_zero()
                                   ? 0.0
                                   : std::max(0.0, rec.args.at(0) -
                                                       static_cast<double>(L.valuation().value()));
                res.pass = res.measured <= rec.bound;
            } else if (rec.kind == "hcond") {
                const double u = rec.args.at(0), r = rec.args.at(1), q = rec.args.at(2),
                             eps = rec.args.at(3);
                res.measured = std::max(compute_H(static_cast<int>(u), r),
                                        std::pow(q, u) / (1.0 - q)) /
                               eps;
                res.pass = res.measured <= rec.bound + 1e-12;
            } else if (rec.kind == "cesaro") {
                res.measured = cesaro_violations(sf.series.coeffs(),
                                                 static_cast<int>(rec.args.at(0)),
                                                 static_cast<int>(rec.args.at(1)));
                res.pass = res.measured <= rec.bound;
            } else if (rec.kind == "alpha_cap") {
                const Rat R = to_rational(rec.args.at(0));
                const int l = static_cast<int>(rec.args.at(1));
                Rat m{0};
                for (const auto& [k, a] : st.exact_alphas) {
                    BigInt ff{1};
                    for (int i = 0; i < l; ++i) ff *= BigInt(k - i);
                    Rat mult = Rat(ff);
                    for (int i = 0; i < k - l; ++i) mult *= R;
                    const Rat v = abs(Rat(a * mult));
                    if (v > m) m = v;
                }
                res.measured = m.convert_to<double>();
                res.pass = m <= to_rational(rec.bound);
            } else if (rec.kind == "int_sums") {
                const Rat R = to_rational(rec.args.at(0));
                const int l = static_cast<int>(rec.args.at(1));
                const int j_max = static_cast<int>(rec.args.at(2));
                const ComplexPolynomial L = select(rec.lhs);
                Rat sum{0}, pw{1};  // pw = R^{j-l}, started at j = l
                int bad = 0;
                for (int j = l; j <= j_max; ++j) {
                    BigInt ff{1};
                    for (int i = 0; i < l; ++i) ff *= BigInt(j - i);
                    Rat c = to_rational(L.coeff(j).real());
                    auto it = alphas.find(j);
                    if (it != alphas.end()) c += it->second;
                    sum += Rat(ff) * c * pw;
                    if (!is_integer(sum)) ++bad;
                    pw *= R;
                }
                res.measured = bad;
                res.pass = res.measured <= rec.bound;
            } else if (rec.kind == "clearance") {
                const ComplexPolynomial L = select(rec.lhs);
                const cplx a{rec.args.at(0), rec.args.at(1)};
                const double margin = rec.args.at(2);
                double mind = std::numeric_limits<double>::infinity();
                auto pts = sample(rec.region, 2.0 * rec.factor);
                for (cplx z : pts)
                    mind = std::min(mind, std::abs(evaluate(L, rec.dilation * z) - a));
                res.grid = static_cast<int>(pts.size());
                res.measured = margin - mind;
                res.pass = res.measured <= rec.bound + 0.05 * margin;
            } else {
                res.pass = false;  // unknown kind: fail loudly
                res.measured = std::numeric_limits<double>::quiet_NaN();
            }
            report.checks.push_back(res);
        }
    }
    return report;
}

VerificationReport cesaro_growth_check(const PowerSeriesStage& f, int k_lo, int k_hi) {
    VerificationReport report;
    int first = 0;
    const int bad = cesaro_violations(f.coeffs(), k_lo, k_hi, &first);
    CheckResult res;
    res.id = "cesaro-growth[" + std::to_string(k_lo) + "," + std::to_string(k_hi) + "]";
    res.measured = bad;
    res.bound = 0.0;
    res.pass = (bad == 0);
    if (bad > 0) res.grid = first;  // first violating index, for the report
    report.checks.push_back(res);
    return report;
}

VerificationReport derivative_bound_check(const PowerSeriesStage& f, int l,
                                          const std::vector<double>& radii, double bound) {
    VerificationReport report;
    const ComplexPolynomial d = derivative(f.as_polynomial(), l);
    for (double r : radii) {
        CheckResult res;
        res.id = "deriv-bound@" + std::to_string(r);
        res.measured = std::abs(evaluate(d, cplx{r, 0.0}));
        res.bound = bound;
        res.pass = res.measured <= bound;
        report.checks.push_back(res);
    }
    return report;
}

VerificationReport common_membership_check(const PowerSeriesStage& f, const ComplexPolynomial& phi,
                                           int carrier_l, int s,
                                           const std::function<double(double, int)>& rho_family,
                                           const std::vector<double>& lambda_grid, int n_max,
                                           double tail_bound) {
    VerificationReport report;
    const double thresh = 1.0 / static_cast<double>(s);
    if (tail_bound >= thresh / 10.0)
        throw TailUnreliable("tail bound too large for the membership threshold");
    const BoundaryRegion K = exhaustion_K(carrier_l);
    const ComplexPolynomial p = f.as_polynomial();

    {
        // neighbor-difference continuity of the radius family on the grid
        double md = 0.0;
        for (size_t i = 0; i + 1 < lambda_grid.size(); ++i)
            for (int n = 1; n <= n_max; ++n)
                md = std::max(md, std::abs(rho_family(lambda_grid[i], n) -
                                           rho_family(lambda_grid[i + 1], n)));
        CheckResult res;
        res.id = "rho-continuity";
        res.measured = md;
        res.bound = 0.1;
        res.pass = md <= res.bound;
        report.checks.push_back(res);
    }

    for (double lambda : lambda_grid) {
        double best = std::numeric_limits<double>::infinity();
        for (int n = 1; n <= n_max; ++n) {
            const double r = rho_family(lambda, n);
            if (!(r > 0.0 && r < 1.0)) continue;
            const double sup =
                region_sup(p, K, 2.0, r, [&](cplx z) { return evaluate(phi, z); });
            best = std::min(best, sup);
        }
        CheckResult res;
        res.id = "lambda=" + std::to_string(lambda);
        res.measured = best + tail_bound;
        res.bound = thresh;
        res.pass = res.measured < thresh;
        report.checks.push_back(res);
    }
    return report;
}

std::string report_to_json_text(const VerificationReport& report) {
    using nlohmann::json;
    json checks = json::array();
    for (const auto& c : report.checks)
        checks.push_back(json{{"bound", c.bound},
                              {"grid", c.grid},
                              {"id", c.id},
                              {"measured", c.measured},
                              {"pass", c.pass}});
    json doc{{"all_pass", report.all_pass()}, {"checks", checks}, {"schema", "abeluniv/1"}};
    return doc.dump(1);
}

}  // namespace abeluniv
