#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "abeluniv/staged.hpp"

namespace {

std::string g_binary;
std::filesystem::path g_dir;

int run(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string at(const std::string& name) { return (g_dir / name).string(); }

}  // namespace

TEST_CASE("construct then verify round-trips with exit 0") {
    CHECK(run("construct abelD-not-rho --stages 3 --out " + at("run.json")) == 0);
    CHECK(std::filesystem::exists(at("run.json")));
    CHECK(std::filesystem::exists(at("run.json.meta")));
    CHECK(run("verify " + at("run.json") + " --out " + at("rep.json")) == 0);
    CHECK(slurp(at("rep.json")).find("\"schema\": \"abeluniv/1\"") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
    CHECK(run("construct deriv-bounded --stages 2 --l 1 --out " + at("a.json")) == 0);
    CHECK(run("construct deriv-bounded --stages 2 --l 1 --out " + at("b.json")) == 0);
    const std::string a = slurp(at("a.json")), b = slurp(at("b.json"));
    CHECK(!a.empty());
    CHECK(a == b);

    CHECK(run("density gamma-lower --labels 2 --horizon 5000 --out " + at("d1.json")) == 0);
    CHECK(run("density gamma-lower --labels 2 --horizon 5000 --out " + at("d2.json")) == 0);
    CHECK(slurp(at("d1.json")) == slurp(at("d2.json")));

    CHECK(run("export-csv " + at("a.json") + " --out " + at("c1.csv")) == 0);
    CHECK(run("export-csv " + at("a.json") + " --out " + at("c2.csv")) == 0);
    const std::string csv = slurp(at("c1.csv"));
    CHECK(csv == slurp(at("c2.csv")));
    CHECK(csv.rfind("r,sup_error,target_id,carrier_id\n", 0) == 0);
}

TEST_CASE("verification failures exit 1") {
    REQUIRE(run("construct abelD-not-rho --stages 3 --out " + at("ok.json")) == 0);
    abeluniv::StagedFunction sf = abeluniv::staged_from_json_text(slurp(at("ok.json")));
    auto coeffs = sf.series.coeffs();
    REQUIRE(!coeffs.empty());
    coeffs[0] += abeluniv::cplx{0.25, 0.0};  // break the stage-sum invariant
    sf.series = abeluniv::PowerSeriesStage{std::move(coeffs), sf.series.stage_count()};
    std::ofstream(at("tampered.json"), std::ios::binary) << abeluniv::to_json_text(sf);
    CHECK(run("verify " + at("tampered.json")) == 1);
}

TEST_CASE("configuration errors exit 2 and write nothing") {
    CHECK(run("construct no-such-builder --out " + at("never.json")) == 2);
    CHECK(!std::filesystem::exists(at("never.json")));
    CHECK(run("construct abelD-not-rho --radii 0.9,0.5 --out " + at("never.json")) == 2);
    CHECK(!std::filesystem::exists(at("never.json")));
    CHECK(run("no-such-subcommand") == 2);
    CHECK(run("construct") == 2);  // missing required arguments
    CHECK(run("verify " + at("missing-file.json")) == 2);
    CHECK(run("density no-such-family --out " + at("never.json")) == 2);
    CHECK(!std::filesystem::exists(at("never.json")));
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli-binary> [doctest args]\n");
        return 1;
    }
    g_binary = argv[1];
    g_dir = std::filesystem::temp_directory_path() / "abeluniv-cli-test";
    std::filesystem::remove_all(g_dir);
    std::filesystem::create_directories(g_dir);

    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv + 1);
    const int rc = ctx.run();
    std::filesystem::remove_all(g_dir);
    return rc;
}
