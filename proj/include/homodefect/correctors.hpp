#pragma once

#include <functional>
#include <string>
#include <vector>

#include "homodefect/coefficients.hpp"
#include "homodefect/elliptic.hpp"
#include "homodefect/grid_fields.hpp"

namespace homodefect {

// Per-direction correctors. w_per_j lives on the periodic unit cell at
// cell_resolution (zero mean); w~_j on the Dirichlet box
// [-R, R]^d at box_resolution nodes per unit, extended by zero outside.
// w_per_box_j is the periodic corrector re-solved at box_resolution so the
// defect problem's flux stencil is discretely consistent on the box grid.
struct CorrectorSet {
    CoefficientSpec spec;
    int dim = 1;
    double truncation_radius = 0.0;  // 0 when no defect part is present
    int cell_resolution = 0;
    int box_resolution = 0;
    bool oracle_backed = false;

    std::vector<GridField> w_per;        // d scalar cell fields
    std::vector<GridField> grad_w_per;   // cached gradients (d-component)
    std::vector<GridField> w_per_box;    // d scalar cell fields at box_resolution
    std::vector<GridField> w_tilde;      // d scalar box fields (empty if no defect)
    std::vector<GridField> grad_w_tilde;

    bool has_defect() const { return !w_tilde.empty(); }
};

// Cell problem -div(a_per grad w) = div(a_per e_j), periodic, zero mean.
GridField solve_periodic_corrector(const CoefficientSpec& spec, int cell_resolution, int j,
                                   const SolverOptions& opts = {});

// Defect problem -div(a grad w~_j) = div(a~ (e_j + grad w_per_j)) on
// [-R, R]^d with homogeneous Dirichlet data. w_per_box_j must live on the
// unit cell at the box resolution (nodes per unit length); R is integral.
GridField solve_defect_corrector(const CoefficientSpec& spec, const GridField& w_per_box_j,
                                 int truncation_radius, int box_resolution, int j,
                                 const SolverOptions& opts = {});

enum class CorrectorMethod { fd, oracle };  // oracle available in 1D only

CorrectorSet build_corrector_set(const CoefficientSpec& spec, int cell_resolution,
                                 int truncation_radius, int box_resolution,
                                 const SolverOptions& opts = {},
                                 CorrectorMethod method = CorrectorMethod::fd,
                                 const std::string& cache_dir = "");

// w_j(y) = w_per_j(y mod 1) + w~_j(y), w~ taken as 0 outside the box.
double sample_corrector(const CorrectorSet& set, int j, const Point& y);
Point sample_corrector_gradient(const CorrectorSet& set, int j, const Point& y);

// Least-squares slope of log osc(rho) vs log rho where osc is estimated
// from 64 random pairs per radius plus axis-aligned pairs anchored at
// `center`. Needs >= 4 radii spanning a factor >= 8.
double oscillation_slope(const std::function<double(const Point&)>& value, int dim,
                         const Point& center, const std::vector<double>& radii,
                         unsigned seed);

double sublinearity_exponent(const CorrectorSet& set, int j, const std::vector<double>& radii,
                             unsigned seed = 0);

}  // namespace homodefect
