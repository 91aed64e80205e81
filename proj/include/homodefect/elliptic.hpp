#pragma once

#include <functional>

#include "homodefect/grid_fields.hpp"

namespace homodefect {

using ScalarFn = std::function<double(const Point&)>;
// Flux rhs g, evaluated componentwise at face centers: fn(x, axis) = g_axis(x).
using FluxFn = std::function<double(const Point&, int)>;

struct SolverReport {
    long iterations = 0;
    double residual = 0.0;  // final relative residual
    double seconds = 0.0;
};

enum class Preconditioner { automatic, jacobi, ic0 };

struct SolverOptions {
    double tol = 1e-10;
    long max_iter = 200000;
    Preconditioner precond = Preconditioner::automatic;
};

// Discrete -div(a grad u) = f + div g with the 2d+1-point flux stencil.
// face_a[ax][node] holds a at the face between `node` and its +e_ax
// neighbour. Dirichlet problems keep boundary nodes in the arrays with
// u = 0 pinned; periodic problems have the rhs projected to zero mean.
struct DiscreteProblem {
    Grid grid;
    std::array<std::vector<double>, 3> face_a;
    std::vector<double> rhs;
};

// Coefficient evaluated at face_center / scale (scale = 1 for cell problems,
// scale = eps for oscillatory solves).
DiscreteProblem assemble(const Grid& grid, const ScalarFn& coeff, double scale,
                         const ScalarFn* rhs_volume, const FluxFn* rhs_flux);

// out = A u (Dirichlet boundary entries are zeroed). Exposed for residual
// diagnostics; u and out must have grid.nodes() entries.
void apply_operator(const DiscreteProblem& p, const double* u, double* out);

// Thomas in 1D, preconditioned CG otherwise. Periodic solutions come back
// with exact zero mean. Throws NoConvergence past max_iter.
std::pair<GridField, SolverReport> solve(const DiscreteProblem& p,
                                         const SolverOptions& opts = {});

}  // namespace homodefect
