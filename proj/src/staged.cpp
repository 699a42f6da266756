#include "abeluniv/staged.hpp"

#include <json.hpp>

#include <sstream>
#include <stdexcept>

namespace abeluniv {

using nlohmann::json;

double StageRecord::param_or(const std::string& key, double fallback) const {
    for (const auto& [k, v] : parameters)
        if (k == key) return v;
    return fallback;
}

double StagedFunction::env_or(const std::string& key, double fallback) const {
    for (const auto& [k, v] : environment)
        if (k == key) return v;
    return fallback;
}

ComplexPolynomial stage_sum(const StagedFunction& sf) {
    PowerSeriesStage acc;
    for (const auto& st : sf.stages)
        for (const auto& np : st.polynomials) acc.add(np.poly);
    return acc.as_polynomial();
}

namespace {

json coeffs_to_json(const std::vector<cplx>& coeffs) {
    json a = json::array();
    for (const cplx& c : coeffs) a.push_back(json::array({c.real(), c.imag()}));
    return a;
}

std::vector<cplx> coeffs_from_json(const json& a) {
    std::vector<cplx> coeffs;
    coeffs.reserve(a.size());
    for (const auto& c : a) coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
    return coeffs;
}

json region_to_json(const BoundaryRegion& region) {
    json pieces = json::array();
    for (const auto& piece : region.pieces) {
        if (const auto* arc = std::get_if<ArcPiece>(&piece)) {
            pieces.push_back(json{{"a0", arc->angle0},
                                  {"a1", arc->angle1},
                                  {"c", json::array({arc->center.real(), arc->center.imag()})},
                                  {"r", arc->radius},
                                  {"t", "arc"}});
        } else {
            const auto& seg = std::get<SegPiece>(piece);
            pieces.push_back(json{{"t", "seg"},
                                  {"z0", json::array({seg.z0.real(), seg.z0.imag()})},
                                  {"z1", json::array({seg.z1.real(), seg.z1.imag()})}});
        }
    }
    return json{{"density", region.sample_density},
                {"kind", static_cast<int>(region.kind)},
                {"pieces", pieces},
                {"scale", region.scale}};
}

BoundaryRegion region_from_json(const json& j) {
    BoundaryRegion region;
    region.kind = static_cast<RegionKind>(j.at("kind").get<int>());
    region.sample_density = j.at("density").get<double>();
    region.scale = j.at("scale").get<double>();
    for (const auto& p : j.at("pieces")) {
        if (p.at("t") == "arc") {
            ArcPiece arc;
            arc.center = cplx{p.at("c").at(0).get<double>(), p.at("c").at(1).get<double>()};
            arc.radius = p.at("r").get<double>();
            arc.angle0 = p.at("a0").get<double>();
            arc.angle1 = p.at("a1").get<double>();
            region.pieces.push_back(arc);
        } else {
            SegPiece seg;
            seg.z0 = cplx{p.at("z0").at(0).get<double>(), p.at("z0").at(1).get<double>()};
            seg.z1 = cplx{p.at("z1").at(0).get<double>(), p.at("z1").at(1).get<double>()};
            region.pieces.push_back(seg);
        }
    }
    return region;
}

json pairs_to_json(const std::vector<std::pair<std::string, double>>& pairs) {
    json a = json::array();
    for (const auto& [k, v] : pairs) a.push_back(json::array({k, v}));
    return a;
}

std::vector<std::pair<std::string, double>> pairs_from_json(const json& a) {
    std::vector<std::pair<std::string, double>> pairs;
    for (const auto& p : a) pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<double>());
    return pairs;
}

json check_to_json(const InequalityRecord& c) {
    json j{{"args", c.args},
           {"bound", c.bound},
           {"deriv", c.deriv},
           {"dilation", c.dilation},
           {"factor", c.factor},
           {"grid", c.grid},
           {"id", c.id},
           {"kind", c.kind},
           {"lhs", c.lhs},
           {"measured", c.measured},
           {"rhs", coeffs_to_json(c.rhs.coeffs())},
           {"rhs_direction", c.rhs_direction}};
    j["region"] = region_to_json(c.region);
    return j;
}

InequalityRecord check_from_json(const json& j) {
    InequalityRecord c;
    c.id = j.at("id").get<std::string>();
    c.kind = j.at("kind").get<std::string>();
    c.bound = j.at("bound").get<double>();
    c.measured = j.at("measured").get<double>();
    c.grid = j.at("grid").get<int>();
    c.factor = j.at("factor").get<double>();
    c.lhs = j.at("lhs").get<std::string>();
    c.deriv = j.at("deriv").get<int>();
    c.dilation = j.at("dilation").get<double>();
    c.rhs_direction = j.at("rhs_direction").get<bool>();
    c.rhs = ComplexPolynomial{coeffs_from_json(j.at("rhs"))};
    c.region = region_from_json(j.at("region"));
    c.args = j.at("args").get<std::vector<double>>();
    return c;
}

std::string rat_to_string(const Rat& q) {
    std::ostringstream os;
    os << numerator(q) << "/" << denominator(q);
    return os.str();
}

Rat rat_from_string(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(BigInt(s));
    return Rat(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

}  // namespace

std::string to_json_text(const StagedFunction& sf) {
    json stages = json::array();
    for (const auto& st : sf.stages) {
        json polys = json::array();
        for (const auto& np : st.polynomials)
            polys.push_back(json{{"coeffs", coeffs_to_json(np.poly.coeffs())}, {"name", np.name}});
        json alphas = json::array();
        for (const auto& [k, a] : st.exact_alphas)
            alphas.push_back(json::array({k, rat_to_string(a)}));
        json checks = json::array();
        for (const auto& c : st.checks) checks.push_back(check_to_json(c));
        stages.push_back(json{{"alphas", alphas},
                              {"checks", checks},
                              {"index", st.index},
                              {"parameters", pairs_to_json(st.parameters)},
                              {"polynomials", polys}});
    }
    json doc{{"builder", sf.builder},
             {"environment", pairs_to_json(sf.environment)},
             {"schema", "abeluniv/1"},
             {"series", json{{"coeffs", coeffs_to_json(sf.series.coeffs())},
                             {"stage_count", sf.series.stage_count()}}},
             {"stages", stages}};
    return doc.dump(1);
}

StagedFunction staged_from_json_text(const std::string& text) {
    json doc = json::parse(text);
    if (doc.at("schema").get<std::string>() != "abeluniv/1")
        throw std::runtime_error("unsupported schema tag");
    StagedFunction sf;
    sf.builder = doc.at("builder").get<std::string>();
    sf.environment = pairs_from_json(doc.at("environment"));
    sf.series = PowerSeriesStage{coeffs_from_json(doc.at("series").at("coeffs")),
                                 doc.at("series").at("stage_count").get<int>()};
    for (const auto& js : doc.at("stages")) {
        StageRecord st;
        st.index = js.at("index").get<int>();
        st.parameters = pairs_from_json(js.at("parameters"));
        for (const auto& jp : js.at("polynomials"))
            st.polynomials.push_back(NamedPolynomial{
                jp.at("name").get<std::string>(),
                ComplexPolynomial{coeffs_from_json(jp.at("coeffs"))}});
        for (const auto& jc : js.at("checks")) st.checks.push_back(check_from_json(jc));
        for (const auto& ja : js.at("alphas"))
            st.exact_alphas.emplace_back(ja.at(0).get<int>(),
                                         rat_from_string(ja.at(1).get<std::string>()));
        sf.stages.push_back(std::move(st));
    }
    return sf;
}

}  // namespace abeluniv
