#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "homodefect/rate_study.hpp"

using namespace homodefect;

namespace {

std::string study_json(const char* defect, const char* eps) {
    std::string j = R"({
      "coefficient": {"dim": 1,
        "periodic": {"kind": "sin_product", "base": 2.0, "amp": 1.0},)";
    j += std::string("\"defect\": ") + defect + R"(, "r": 2.0, "mu": 8.0},
      "source": "one",
      "eps": )" + eps + R"(,
      "nodes_per_eps": 16,
      "cell_resolution": 64,
      "box_resolution": 8
    })";
    return j;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("nu_r: paper instances and the critical case") {
    CHECK(nu_r(3, 2.0) == 1.0);
    CHECK(nu_r(3, 6.0) == 0.5);
    CHECK(nu_r(1, 4.0) == 0.25);
    CHECK_THROWS_AS((void)nu_r(3, 3.0), CriticalExponent);
    CHECK_THROWS_AS((void)nu_r(2, 0.5), ConfigError);
}

TEST_CASE("fit_slope: synthetic power data") {
    std::vector<std::pair<double, double>> pts;
    for (int k = 3; k <= 8; ++k) {
        double e = std::pow(2.0, -k);
        pts.emplace_back(e, std::pow(e, 0.75));
    }
    auto [slope, se] = fit_slope(pts);
    CHECK(slope == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(se < 1e-10);

    // v = eps * ln(2 + 1/eps), corrected fit recovers 1.0
    pts.clear();
    for (int k = 3; k <= 8; ++k) {
        double e = std::pow(2.0, -k);
        pts.emplace_back(e, e * std::log(2.0 + 1.0 / e));
    }
    auto [cslope, cse] = fit_slope(pts, true);
    CHECK(cslope == doctest::Approx(1.0).epsilon(0.02));

    CHECK_THROWS_AS((void)fit_slope({{0.5, 1.0}, {0.25, 0.5}, {0.125, 0.25}}),
                    InsufficientPoints);
    CHECK_THROWS_AS((void)fit_slope({{0.5, 1.0}, {0.25, -1.0}, {0.125, 0.2}, {0.1, 0.1}}),
                    NonPositiveValue);
}

TEST_CASE("config parsing: defaults, eps monotonicity, memory gate") {
    StudyConfig c = parse_study_config(study_json(R"({"kind":"none"})",
                                                  "[0.125, 0.0625, 0.03125, 0.015625]"));
    CHECK(c.spec.dim == 1);
    CHECK(c.eps.size() == 4);
    CHECK_NOTHROW(c.validate());

    CHECK_THROWS_AS(parse_study_config(study_json(R"({"kind":"none"})", "[0.125, 0.25]"))
                        .validate(),
                    ConfigError);
    CHECK_THROWS_AS((void)parse_study_config("{"), ConfigError);

    StudyConfig big = parse_study_config(study_json(R"({"kind":"none"})",
                                                    "[0.125, 0.0625, 0.03125, 0.015625]"));
    big.spec.dim = 3;
    CHECK_THROWS_AS(big.validate(), ConfigError);
}

TEST_CASE("periodic baseline study: L2 slope ~ 1, determinism of outputs") {
    StudyConfig c = parse_study_config(
        study_json(R"({"kind":"none"})", "[0.125, 0.0625, 0.03125, 0.015625, 0.0078125]"));
    // 16 nodes per eps leaves an eps-independent O((h/eps)^2) floor in the
    // sup-norm gradient channel that flattens its slope at the small-eps end
    c.nodes_per_eps = 32;
    RateStudyReport rep = run_rate_study(c);
    double l2slope = 0;
    for (const auto& f : rep.fits)
        if (f.channel == "l2_R" && f.mode == "full") l2slope = f.slope;
    CHECK(l2slope >= 0.9);
    CHECK(rep.pass);
    REQUIRE(!rep.oracle_runs.empty());  // 1D embeds the oracle cross-check

    namespace fs = std::filesystem;
    fs::path out1 = fs::temp_directory_path() / "hd_study_a";
    fs::path out2 = fs::temp_directory_path() / "hd_study_b";
    emit_outputs(rep, out1.string());
    emit_outputs(rep, out2.string());
    CHECK(slurp(out1 / "rates.csv") == slurp(out2 / "rates.csv"));
    CHECK(slurp(out1 / "slopes.csv") == slurp(out2 / "slopes.csv"));
    CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
    CHECK(!slurp(out1 / "summary.txt").empty());
    // row count: |eps| x raw channels x modes
    std::string rates = slurp(out1 / "rates.csv");
    std::size_t rows = std::count(rates.begin(), rates.end(), '\n') - 1;
    CHECK(rows == 5 * 5 * 2);
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("degenerate study: constant coefficient yields DEGENERATE verdicts") {
    StudyConfig c = parse_study_config(study_json(
        R"({"kind":"none"})", "[0.125, 0.0625, 0.03125, 0.015625]"));
    c.spec.periodic.kind = PeriodicKind::constant;
    c.spec.periodic.base = 2.0;
    c.spec.periodic.amp = 0.0;
    RateStudyReport rep = run_rate_study(c);
    for (const auto& f : rep.fits)
        if (f.mode == "full" && f.channel == "l2_R") CHECK(f.verdict == "DEGENERATE");
    CHECK(rep.pass);  // DEGENERATE is not FAIL
}

TEST_CASE("compare_correctors: gaussian defect, rho decays") {
    StudyConfig c = parse_study_config(study_json(
        R"({"kind":"gaussian","amplitude":1.0,"width":0.5})",
        "[0.125, 0.0625, 0.03125, 0.015625]"));
    // off-center source so grad u* != 0 at the defect (else no per-only floor)
    c.source.kind = SourceKind::gaussian;
    c.source.center = make_point(0.4);
    CompareReport rep = compare_correctors(c);
    REQUIRE(rep.rho.size() == 4);
    CHECK(rep.rho.back() < rep.rho.front());
    CHECK(rep.rho.back() <= 0.6);

    namespace fs = std::filesystem;
    fs::path out = fs::temp_directory_path() / "hd_compare";
    emit_outputs(rep, out.string());
    CHECK(fs::exists(out / "compare.csv"));
    fs::remove_all(out);
}

TEST_CASE("compare_correctors rejects defect-free specs") {
    StudyConfig c = parse_study_config(study_json(
        R"({"kind":"none"})", "[0.125, 0.0625, 0.03125, 0.015625]"));
    CHECK_THROWS_AS((void)compare_correctors(c), ConfigError);
}
