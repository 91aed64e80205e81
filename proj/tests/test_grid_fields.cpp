#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "homodefect/grid_fields.hpp"

using namespace homodefect;

TEST_CASE("grid construction and indexing") {
    Grid g = make_dirichlet_grid(2, make_point(-1, -1), make_point(1, 1), {5, 5, 1});
    CHECK(g.nodes() == 25);
    CHECK(g.h[0] == doctest::Approx(0.5));
    Point p = g.coord(4, 0);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(-1.0));

    Grid per = make_periodic_cell(1, 8);
    CHECK(per.nodes() == 8);
    CHECK(per.length(0) == doctest::Approx(1.0));
}

TEST_CASE("norm: constant field integrates exactly") {
    Grid g = make_dirichlet_grid(2, make_point(0, 0), make_point(1, 1), {17, 17, 1});
    GridField f(g, 1);
    for (auto& v : f.data) v = 1.0;
    CHECK(norm(f, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(f, kInfExponent) == doctest::Approx(1.0));
}

TEST_CASE("norm: f = x on (0,1), L2 = 1/sqrt(3) with midpoint quadrature") {
    Grid g = make_dirichlet_grid(1, make_point(0), make_point(1), {4097, 1, 1});
    GridField f(g, 1);
    for (int i = 0; i < g.n[0]; ++i) f.at(g.idx(i)) = g.coord(i)[0];
    CHECK(norm(f, 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-5));
}

TEST_CASE("norm over subdomain") {
    Grid g = make_dirichlet_grid(1, make_point(-1), make_point(1), {201, 1, 1});
    GridField f(g, 1);
    for (auto& v : f.data) v = 2.0;
    Box half{make_point(-0.5), make_point(0.5)};
    CHECK(norm(f, 2.0, half) == doctest::Approx(2.0).epsilon(1e-12));
    Box empty{make_point(5.0), make_point(6.0)};
    CHECK_THROWS_AS((void)norm(f, 2.0, empty), EmptySubdomain);
}

TEST_CASE("gradient of a linear field is exact, including one-sided edges") {
    Grid g = make_dirichlet_grid(2, make_point(-1, -1), make_point(1, 1), {33, 33, 1});
    GridField f(g, 1);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j) {
            Point p = g.coord(i, j);
            f.at(g.idx(i, j)) = 3.0 * p[0] - 2.0 * p[1];
        }
    GridField grad = gradient(f);
    for (std::size_t n = 0; n < g.nodes(); ++n) {
        CHECK(grad.at(n, 0) == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(grad.at(n, 1) == doctest::Approx(-2.0).epsilon(1e-10));
    }
}

TEST_CASE("gradient wraps on periodic grids") {
    Grid g = make_periodic_cell(1, 64);
    GridField f(g, 1);
    for (int i = 0; i < g.n[0]; ++i)
        f.at(g.idx(i)) = std::sin(2 * M_PI * g.coord(i)[0]);
    GridField grad = gradient(f);
    // check at the seam node 0
    CHECK(grad.at(g.idx(0), 0) == doctest::Approx(2 * M_PI).epsilon(1e-2));
}

TEST_CASE("sample: multilinear interpolation and domain checks") {
    Grid g = make_dirichlet_grid(1, make_point(0), make_point(1), {11, 1, 1});
    GridField f(g, 1);
    for (int i = 0; i < g.n[0]; ++i) f.at(g.idx(i)) = g.coord(i)[0];
    CHECK(sample(f, make_point(0.55)) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK_THROWS_AS((void)sample(f, make_point(1.5)), OutOfDomain);

    Grid per = make_periodic_cell(1, 10);
    GridField fp(per, 1);
    for (int i = 0; i < per.n[0]; ++i) fp.at(per.idx(i)) = double(i);
    // x = 1.05 wraps to 0.05, halfway between node 0 and node 1
    CHECK(sample(fp, make_point(1.05)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mean subtraction") {
    Grid g = make_periodic_cell(2, 16);
    GridField f(g, 1);
    for (std::size_t n = 0; n < g.nodes(); ++n) f.at(n) = double(n % 7);
    subtract_mean(f);
    CHECK(field_mean(f) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("field file roundtrip is bit exact") {
    Grid g = make_dirichlet_grid(2, make_point(-1, 0), make_point(1, 2), {9, 7, 1});
    GridField f(g, 2);
    for (std::size_t n = 0; n < g.nodes(); ++n) {
        f.at(n, 0) = std::sin(double(n)) * 1e-7;
        f.at(n, 1) = std::cos(double(n)) * 1e3;
    }
    auto path = std::filesystem::temp_directory_path() / "hd_roundtrip.hdf1";
    save_field(f, path.string());
    GridField back = load_field(path.string());
    REQUIRE(back.grid == f.grid);
    REQUIRE(back.components == f.components);
    CHECK(back.data == f.data);  // exact bytes
    std::filesystem::remove(path);
}

TEST_CASE("load_field rejects garbage") {
    auto path = std::filesystem::temp_directory_path() / "hd_bad.hdf1";
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    std::fputs("NOTAFIELD", fp);
    std::fclose(fp);
    CHECK_THROWS_AS((void)load_field(path.string()), FormatError);
    std::filesystem::remove(path);
}

TEST_CASE("assert_finite catches NaN") {
    Grid g = make_periodic_cell(1, 4);
    GridField f(g, 1);
    f.at(2) = std::nan("");
    CHECK_THROWS_AS(assert_finite(f, "test"), Error);
}
