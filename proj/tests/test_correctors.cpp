#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "homodefect/correctors.hpp"
#include "homodefect/oracle1d.hpp"

using namespace homodefect;

namespace {

CoefficientSpec sin_1d() {
    CoefficientSpec s;
    s.dim = 1;
    s.periodic.kind = PeriodicKind::sin_product;
    s.periodic.base = 2.0;
    s.periodic.amp = 1.0;
    s.r = 2.0;
    s.mu = 8.0;
    return s;
}

CoefficientSpec sin_gaussian_1d() {
    CoefficientSpec s = sin_1d();
    s.defect.kind = DefectKind::gaussian;
    s.defect.amplitude = 1.0;
    s.defect.width = 0.5;
    return s;
}

}  // namespace

TEST_CASE("periodic corrector matches the 1D closed form") {
    CoefficientSpec s = sin_1d();
    GridField w = solve_periodic_corrector(s, 1024, 0);
    OracleCorrector1D oracle(s, 2.0);
    double worst = 0;
    for (int i = 0; i < w.grid.n[0]; ++i) {
        double y = w.grid.coord(i)[0];
        worst = std::max(worst, std::abs(w.at(w.grid.idx(i)) - oracle.w_per(y)));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("constant coefficient: corrector vanishes") {
    CoefficientSpec s;
    s.dim = 2;
    s.periodic.base = 3.0;
    s.r = 4.0;
    GridField w = solve_periodic_corrector(s, 32, 1);
    for (double v : w.data) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("defect corrector matches the 1D closed form away from the boundary") {
    CoefficientSpec s = sin_gaussian_1d();
    int R = 64, res = 32;
    GridField w_per_box = solve_periodic_corrector(s, res, 0);
    GridField wt = solve_defect_corrector(s, w_per_box, R, res, 0);
    OracleCorrector1D oracle(s, 512.0);
    // compare increments from the center (gauges differ: FD has w~(+-R) = 0,
    // the oracle w~(0) = 0); truncation adds an O(1/R) linear drift
    const Grid& g = wt.grid;
    auto fd = [&](double y) { return sample(wt, make_point(y)); };
    double worst = 0;
    for (double y = -8.0; y <= 8.0; y += 0.25) {
        double d_fd = fd(y) - fd(0.0);
        double d_or = oracle.w_tilde(y) - oracle.w_tilde(0.0);
        worst = std::max(worst, std::abs(d_fd - d_or));
    }
    CHECK(worst < 5e-2);  // O(1/R) truncation drift plus O(h^2) discretization
    // boundary values are pinned to zero
    CHECK(wt.at(g.idx(0)) == 0.0);
    CHECK(wt.at(g.idx(g.n[0] - 1)) == 0.0);
}

TEST_CASE("defect corrector rejects off-center defects and tiny boxes") {
    CoefficientSpec s = sin_gaussian_1d();
    GridField w_per_box = solve_periodic_corrector(s, 8, 0);
    CHECK_THROWS_AS((void)solve_defect_corrector(s, w_per_box, 2, 8, 0), ConfigError);
    s.defect.center = make_point(20.0);
    CHECK_THROWS_AS((void)solve_defect_corrector(s, w_per_box, 16, 8, 0),
                    DefectNotCentered);
}

TEST_CASE("build_corrector_set: cache hit returns identical fields") {
    namespace fs = std::filesystem;
    CoefficientSpec s = sin_gaussian_1d();
    fs::path cache = fs::temp_directory_path() / "hd_cache_test";
    fs::remove_all(cache);
    fs::create_directories(cache);
    CorrectorSet cold = build_corrector_set(s, 64, 8, 16, SolverOptions{},
                                            CorrectorMethod::fd, cache.string());
    CorrectorSet warm = build_corrector_set(s, 64, 8, 16, SolverOptions{},
                                            CorrectorMethod::fd, cache.string());
    REQUIRE(cold.w_per.size() == warm.w_per.size());
    CHECK(cold.w_per[0].data == warm.w_per[0].data);
    CHECK(cold.w_tilde[0].data == warm.w_tilde[0].data);
    // the cache is content-addressed: different spec, different key
    CoefficientSpec s2 = s;
    s2.defect.amplitude = 0.5;
    CorrectorSet other = build_corrector_set(s2, 64, 8, 16, SolverOptions{},
                                             CorrectorMethod::fd, cache.string());
    CHECK(other.w_tilde[0].data != cold.w_tilde[0].data);
    fs::remove_all(cache);
}

TEST_CASE("oracle-backed 1D set agrees with quadrature corrector") {
    CoefficientSpec s = sin_gaussian_1d();
    CorrectorSet set = build_corrector_set(s, 512, 32, 32, SolverOptions{},
                                           CorrectorMethod::oracle);
    CHECK(set.oracle_backed);
    OracleCorrector1D oracle(s, 64.0);
    double w_fd = sample_corrector(set, 0, make_point(0.4));
    // same gauge up to the boundary-pinning linear shift; compare increments
    double d_set = w_fd - sample_corrector(set, 0, make_point(0.0));
    double d_or = oracle.w(0.4) - oracle.w(0.0);
    CHECK(d_set == doctest::Approx(d_or).epsilon(0.02));
}

TEST_CASE("sample_corrector: zero extension outside the box") {
    CoefficientSpec s = sin_gaussian_1d();
    CorrectorSet set = build_corrector_set(s, 64, 4, 16);
    double inside = sample_corrector(set, 0, make_point(0.3));
    double outside = sample_corrector(set, 0, make_point(9.3));
    // outside: periodic part only
    CHECK(inside != doctest::Approx(outside));
    CHECK(outside == doctest::Approx(sample(set.w_per[0], make_point(9.3))).epsilon(1e-12));
}

TEST_CASE("oscillation_slope: exact power law recovered") {
    auto f = [](const Point& y) { return std::pow(std::abs(y[0]) + 1e-9, 0.6); };
    std::vector<double> radii{2, 4, 8, 16, 32, 64};
    double slope = oscillation_slope(f, 1, make_point(0), radii, 7);
    CHECK(slope == doctest::Approx(0.6).epsilon(0.05));
    CHECK_THROWS_AS((void)oscillation_slope(f, 1, make_point(0), {1, 2}, 7),
                    InsufficientRadii);
    auto flat = [](const Point&) { return 0.0; };
    CHECK_THROWS_AS((void)oscillation_slope(flat, 1, make_point(0), radii, 7),
                    DegenerateOscillation);
}

TEST_CASE("2D corrector residual: discrete conservation at two resolutions") {
    CoefficientSpec s;
    s.dim = 2;
    s.periodic.kind = PeriodicKind::sin_product;
    s.periodic.base = 2.0;
    s.periodic.amp = 1.0;
    s.r = 4.0;
    s.mu = 8.0;
    for (int res : {32, 64}) {
        GridField w = solve_periodic_corrector(s, res, 0);
        const Grid& g = w.grid;
        double h = g.h[0];
        // staggered divergence of a(e_0 + grad w) at every node
        double worst = 0;
        auto flux = [&](int i, int p, int q) {
            Point fc = g.coord(p, q);
            fc[i] += 0.5 * g.h[i];
            int pp = (p + (i == 0)) % g.n[0], qq = (q + (i == 1)) % g.n[1];
            double dw = (w.at(g.idx(pp, qq)) - w.at(g.idx(p, q))) / g.h[i];
            return s.periodic_at(fc) * ((i == 0 ? 1.0 : 0.0) + dw);
        };
        for (int p = 0; p < g.n[0]; ++p)
            for (int q = 0; q < g.n[1]; ++q) {
                double div = (flux(0, p, q) - flux(0, (p + g.n[0] - 1) % g.n[0], q)) / h +
                             (flux(1, p, q) - flux(1, p, (q + g.n[1] - 1) % g.n[1])) / h;
                worst = std::max(worst, std::abs(div));
            }
        CHECK(worst < 1e-6 / h);  // solver-level, scaled by the stencil weights
    }
}
