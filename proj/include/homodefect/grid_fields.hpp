#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "homodefect/common.hpp"

namespace homodefect {

enum class BcTag { periodic, dirichlet };

// Uniform tensor grid in d = 1, 2, 3. Periodic grids store n_k nodes per
// axis (the node at index n_k is identified with index 0); Dirichlet grids
// include both boundary nodes, spacing h_k = (hi_k - lo_k) / (n_k - 1).
struct Grid {
    int dim = 1;
    std::array<int, 3> n{1, 1, 1};
    Point origin{0, 0, 0};
    Point h{1, 1, 1};
    BcTag bc = BcTag::dirichlet;

    std::size_t nodes() const {
        return std::size_t(n[0]) * std::size_t(n[1]) * std::size_t(n[2]);
    }
    std::size_t idx(int i, int j = 0, int k = 0) const {
        return (std::size_t(i) * n[1] + j) * n[2] + k;
    }
    Point coord(int i, int j = 0, int k = 0) const {
        return {origin[0] + i * h[0], origin[1] + j * h[1], origin[2] + k * h[2]};
    }
    // Physical extent per axis (periodic: one full period).
    double length(int axis) const {
        return bc == BcTag::periodic ? n[axis] * h[axis] : (n[axis] - 1) * h[axis];
    }
    bool operator==(const Grid&) const = default;
};

Grid make_dirichlet_grid(int dim, const Point& lo, const Point& hi, const std::array<int, 3>& nodes);
Grid make_periodic_cell(int dim, int resolution);  // unit cell [0,1)^d, h = 1/resolution

struct GridField {
    Grid grid;
    int components = 1;  // 1 scalar, d vector, d*d matrix field
    std::vector<double> data;  // row-major over nodes, component-fastest

    GridField() = default;
    GridField(const Grid& g, int comps)
        : grid(g), components(comps), data(g.nodes() * comps, 0.0) {}

    double& at(std::size_t node, int c = 0) { return data[node * components + c]; }
    double at(std::size_t node, int c = 0) const { return data[node * components + c]; }
};

struct Box {
    Point lo{0, 0, 0};
    Point hi{0, 0, 0};
    bool contains(const Point& p, int dim) const {
        for (int k = 0; k < dim; ++k)
            if (p[k] < lo[k] || p[k] > hi[k]) return false;
        return true;
    }
};

// Central differences in the interior, second-order one-sided at Dirichlet
// boundaries, wrap-around on periodic grids. Scalar in, d-component out;
// for a multi-component input the gradient of component 0 is returned.
GridField gradient(const GridField& f);

constexpr double kInfExponent = -1.0;  // sentinel for p = infinity

// Midpoint quadrature over grid cells (cell-center values by multilinear
// interpolation of the corner nodes); p = inf takes the max of |f| over
// nodes. Vector/matrix fields use the pointwise Euclidean magnitude.
double norm(const GridField& f, double p, const std::optional<Box>& subdomain = std::nullopt);

// Multilinear interpolation. Periodic grids reduce x modulo the period.
double sample(const GridField& f, const Point& x, int component = 0);

double field_mean(const GridField& f, int component = 0);
void subtract_mean(GridField& f);
void assert_finite(const GridField& f, const char* what);

// Bit-exact file format: magic "HDFLD01\0", u64 little-endian JSON length,
// JSON metadata {dim, extents, origin, spacing, components, bc}, then raw
// little-endian doubles, row-major, component-fastest.
void save_field(const GridField& f, const std::string& path);
GridField load_field(const std::string& path);

}  // namespace homodefect
