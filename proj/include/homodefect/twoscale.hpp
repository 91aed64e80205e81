#pragma once

#include <optional>

#include "homodefect/homogenization.hpp"
#include "homodefect/norms.hpp"
#include "homodefect/sources.hpp"

namespace homodefect {

// Oscillatory Dirichlet problem -div(a(x/eps) grad u) = f on (-L,L)^d.
// Requires h <= eps/16 (ResolutionTooCoarse otherwise); nodes_per_axis
// counts nodes, so h = 2L/(nodes_per_axis - 1).
std::pair<GridField, SolverReport> solve_oscillatory(const CoefficientSpec& spec,
                                                     const SourceSpec& source, double L,
                                                     double eps, int nodes_per_axis,
                                                     const SolverOptions& opts = {});

// Homogenized problem with the constant (symmetrized) tensor on the same
// domain. Off-diagonal entries must be resolved too, so the stencil uses
// the diagonal part and checks the rest is negligible (the prototype
// library is mirror-symmetric, a* is diagonal up to discretization error).
std::pair<GridField, SolverReport> solve_homogenized(const HomogenizedTensor& astar,
                                                     const SourceSpec& source, double L,
                                                     int nodes_per_axis,
                                                     const SolverOptions& opts = {});

// R_eps = u_eps - u_star - eps sum_j w_j(x/eps) d_j u_star on the common
// grid. periodic_only drops the defect corrector. Throws TruncationTooSmall
// when the corrector box does not cover (-L/eps, L/eps)^d.
GridField assemble_remainder(const GridField& u_eps, const GridField& u_star,
                             const CorrectorSet& set, double eps, bool periodic_only = false);

// H_eps_i = eps sum_k a(x/eps) w_k(x/eps) d_ik u*
//         - eps sum_{j,k} B_k^{ij}(x/eps) d_jk u*.
// B may be null in 1D (where it vanishes identically).
GridField assemble_H(const CoefficientSpec& spec, const CorrectorSet& set,
                     const PotentialField* B, const GridField& u_star, double eps,
                     bool periodic_only = false);

// Relative L2(Omega1) defect of -div(a(x/eps) grad R) = div H, both sides
// discretized on R's grid. Throws NonPositiveValue when div H degenerates.
double residual_identity_check(const CoefficientSpec& spec, const GridField& R,
                               const GridField& H, double eps,
                               const std::optional<Box>& omega1 = std::nullopt);

NormsRecord remainder_norms(const GridField& R, const GridField& u_eps,
                            const GridField& u_star, const Box& omega1,
                            const std::vector<double>& extra_p = {});

}  // namespace homodefect
