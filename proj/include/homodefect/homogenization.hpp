#pragma once

#include <vector>

#include "homodefect/correctors.hpp"

namespace homodefect {

struct HomogenizedTensor {
    int dim = 1;
    std::array<std::array<double, 3>, 3> a{};  // symmetrized
    double asymmetry = 0.0;  // max |raw_ik - raw_ki| before symmetrization
    int cell_resolution = 0;
    std::string spec_hash;

    double at(int i, int k) const { return a[std::size_t(i)][std::size_t(k)]; }
    // smallest quadratic-form eigenvalue estimate over random directions
    double min_rayleigh(unsigned seed = 0, int trials = 100) const;
};

// a*_ik = cell average of a_per (delta_ik + d_i w_per_k), taken over face
// fluxes so the 1D case reduces to the discrete harmonic mean exactly.
HomogenizedTensor homogenized_tensor(const CoefficientSpec& spec,
                                     const std::vector<GridField>& w_per);

// Oversampled tensor discrepancy |a*_R(with defect) - a*_R(without)| in max
// norm for each truncation radius; radii are integers (whole periods).
std::vector<double> defect_invariance_probe(const CoefficientSpec& spec,
                                            const std::vector<int>& radii,
                                            int box_resolution,
                                            const SolverOptions& opts = {});

// M_k^i(y) = a*_ik - a(y)(delta_ik + d_i w_k(y)), nodewise with central
// differences; include_defect switches between the periodic cell field and
// the full coefficient on the truncation box.
GridField flux_residual(const CoefficientSpec& spec, const CorrectorSet& set,
                        const HomogenizedTensor& astar, int k, bool include_defect = false);

// Max-norm of the discrete (central-difference) divergence of a nodewise M.
double max_divergence(const GridField& M);

// Antisymmetric potential, div B_k = M_k. Stored upper triangle (i < j),
// periodic part on the cell (cell centers), defect part on the truncation
// box. In 1D the potential is identically zero.
struct PotentialField {
    int dim = 1;
    std::vector<GridField> B_per;    // one field per k, d(d-1)/2 components
    std::vector<GridField> B_tilde;  // same on the box; empty without defect
    double div_residual_rel = 0.0;   // ||div B - M||_2 / ||M||_2, periodic part
    double div_residual_rel_tilde = 0.0;

    double component(int k, int i, int j, const Point& y) const;  // B_k^{ij}(y)
    static int tri_index(int i, int j, int dim);
};

// d = 2: exact conservative (stream-function) construction from staggered
// face fluxes; the div B = M residual is at solver level. d = 3 falls back
// to vector-Poisson antisymmetrization with an O(h) residual.
PotentialField solve_potential(const CoefficientSpec& spec, const CorrectorSet& set,
                               const HomogenizedTensor& astar,
                               const SolverOptions& opts = {});

// Max growth exponent over components (i,j) and directions k.
double potential_sublinearity(const PotentialField& B, const std::vector<double>& radii,
                              unsigned seed = 0);

}  // namespace homodefect
