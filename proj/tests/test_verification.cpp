#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "abeluniv/constructions.hpp"
#include "abeluniv/enumerations.hpp"
#include "abeluniv/verification.hpp"

using namespace abeluniv;

namespace {

std::vector<double> dense_radii(int count) {
    std::vector<double> r;
    for (int n = 1; n <= count; ++n) r.push_back(1.0 - std::pow(0.8, n));
    return r;
}

}  // namespace

TEST_CASE("visit set: a function equal to the center visits everywhere") {
    const ComplexPolynomial phi{std::vector<cplx>{{0.2, 0.0}, {0.3, -0.1}, {0.0, 0.25}}};
    PowerSeriesStage f{phi.coeffs()};
    NeighborhoodSpec V;
    V.carrier = 1;
    V.center = phi;
    V.radius = 0.5;
    auto radii = dense_radii(12);
    DensitySet hits = visit_set(f, V, radii, 0.0);
    // dilation by r close to 1 moves a fixed polynomial by O(1-r), so the
    // high radii certainly land; all indices from some point on are present
    CHECK(!hits.integers.empty());
    CHECK(hits.integers.back() == 12);
    for (size_t i = 1; i < hits.integers.size(); ++i)
        CHECK(hits.integers[i] > hits.integers[i - 1]);

    // a constant far outside the neighborhood never visits
    PowerSeriesStage far{std::vector<cplx>{{10.0, 0.0}}};
    CHECK(visit_set(far, V, radii, 0.0).integers.empty());

    // the visit set grows with the neighborhood radius
    NeighborhoodSpec W = V;
    W.radius = 1.0;
    DensitySet more = visit_set(f, W, radii, 0.0);
    for (std::int64_t k : hits.integers)
        CHECK(std::find(more.integers.begin(), more.integers.end(), k) != more.integers.end());
}

TEST_CASE("visit set: interval variant returns maximal passing windows") {
    const ComplexPolynomial phi{std::vector<cplx>{{0.1, 0.0}, {0.4, 0.0}}};
    PowerSeriesStage f{phi.coeffs()};
    NeighborhoodSpec V;
    V.carrier = 2;
    V.center = phi;
    V.radius = 0.25;
    DensitySet iv = visit_set(f, V, 0.5, 0.99, 200, 0.0);
    REQUIRE(iv.kind == DensitySet::Kind::Intervals);
    REQUIRE(!iv.intervals.empty());
    Rat prev{-1};
    for (const auto& seg : iv.intervals) {
        CHECK(seg.lo <= seg.hi);
        CHECK(seg.lo > prev);
        prev = seg.hi;
    }
    // the top of the range passes: |phi(r zeta) - phi(zeta)| -> 0
    CHECK(iv.intervals.back().hi.convert_to<double>() == doctest::Approx(0.99).epsilon(1e-6));
}

TEST_CASE("visit set refuses unreliable tails") {
    PowerSeriesStage f{std::vector<cplx>{{0.0, 0.0}}};
    NeighborhoodSpec V;
    V.carrier = 1;
    V.radius = 0.5;
    CHECK_THROWS_AS(visit_set(f, V, dense_radii(3), 0.05), TailUnreliable);
    CHECK_NOTHROW(visit_set(f, V, dense_radii(3), 0.049));
}

TEST_CASE("stage-log replay accepts honest logs and rejects tampered ones") {
    StagedFunction sf = build_abelD_not_rho(geometric_radii(3), 3);
    CHECK(replay_stage_log(sf).all_pass());

    // tampering with a record's comparison values fails on replay: the
    // re-measured sup against the altered target exceeds the stored bound
    StagedFunction bad = sf;
    bool tampered = false;
    for (auto& st : bad.stages) {
        for (auto& c : st.checks) {
            if (c.kind == "sup" && c.bound < 0.5) {
                c.rhs = ComplexPolynomial::constant(cplx{1.0, 0.0});
                tampered = true;
                break;
            }
        }
        if (tampered) break;
    }
    REQUIRE(tampered);
    CHECK(!replay_stage_log(bad).all_pass());

    // tampering with the series itself breaks the stage-sum invariant
    StagedFunction shifted = sf;
    auto coeffs = shifted.series.coeffs();
    coeffs[0] += cplx{1e-3, 0.0};
    shifted.series = PowerSeriesStage{std::move(coeffs), shifted.series.stage_count()};
    CHECK(!replay_stage_log(shifted).all_pass());

    // a log with no stages and an empty series is vacuously consistent
    CHECK(replay_stage_log(StagedFunction{}).all_pass());
}

TEST_CASE("averaged-sum growth check is exact") {
    // the zero series fails immediately: |0| < k for every k >= 1
    PowerSeriesStage zero{std::vector<cplx>{}};
    CHECK(!cesaro_growth_check(zero, 1, 5).all_pass());

    // a_0 = 100 gives C_k = 100 (k+1), which dominates k for small k
    PowerSeriesStage big{std::vector<cplx>{{100.0, 0.0}}};
    CHECK(cesaro_growth_check(big, 1, 50).all_pass());

    // threshold behaviour is exact: C_k = k+1 >= k always, C_k = 0.5(k+1)
    // fails from k = 2 on but holds at k = 1
    PowerSeriesStage one{std::vector<cplx>{{1.0, 0.0}}};
    CHECK(cesaro_growth_check(one, 1, 100).all_pass());
    PowerSeriesStage half{std::vector<cplx>{{0.5, 0.0}}};
    CHECK(cesaro_growth_check(half, 1, 1).all_pass());
    CHECK(!cesaro_growth_check(half, 2, 2).all_pass());
}

TEST_CASE("derivative bound check") {
    // f(z) = z^3: f'(r) = 3r^2
    PowerSeriesStage f{std::vector<cplx>{{0, 0}, {0, 0}, {0, 0}, {1.0, 0.0}}};
    CHECK(derivative_bound_check(f, 1, {0.1, 0.5}, 0.76).all_pass());
    CHECK(!derivative_bound_check(f, 1, {0.1, 0.5, 0.9}, 0.76).all_pass());
}

TEST_CASE("membership across a parametrized radius family") {
    const ComplexPolynomial phi{std::vector<cplx>{{0.3, 0.0}, {0.2, 0.05}}};
    PowerSeriesStage f{phi.coeffs()};
    auto rho = [](double lambda, int n) {
        return 1.0 - (1.0 - lambda / 20.0) * std::pow(2.0, -n);
    };
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
    // f equals the target polynomial, so high radii land for every lambda
    CHECK(common_membership_check(f, phi, 1, 10, rho, grid, 20, 0.0).all_pass());
    // an unreachable target fails for every lambda
    const ComplexPolynomial off{std::vector<cplx>{{5.0, 0.0}}};
    CHECK(!common_membership_check(f, off, 1, 10, rho, grid, 20, 0.0).all_pass());
}

TEST_CASE("staged JSON round-trips byte-identically and replays") {
    StagedFunction sf = build_abel_deriv_bounded(geometric_radii(2), 1, 2);
    const std::string text = to_json_text(sf);
    CHECK(text == to_json_text(sf));
    CHECK(text.find("\"schema\": \"abeluniv/1\"") != std::string::npos);
    StagedFunction back = staged_from_json_text(text);
    CHECK(to_json_text(back) == text);
    CHECK(replay_stage_log(back).all_pass());
    // coefficients survive exactly
    REQUIRE(back.series.coeffs().size() == sf.series.coeffs().size());
    for (size_t k = 0; k < sf.series.coeffs().size(); ++k)
        CHECK(back.series.coeffs()[k] == sf.series.coeffs()[k]);
}

TEST_CASE("report JSON is deterministic") {
    VerificationReport rep = cesaro_growth_check(
        PowerSeriesStage{std::vector<cplx>{{100.0, 0.0}}}, 1, 10);
    const std::string text = report_to_json_text(rep);
    CHECK(text == report_to_json_text(rep));
    CHECK(text.find("\"schema\": \"abeluniv/1\"") != std::string::npos);
}
