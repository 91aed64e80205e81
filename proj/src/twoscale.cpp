#include "homodefect/twoscale.hpp"

#include <cmath>

namespace homodefect {

namespace {

Grid domain_grid(int dim, double L, int nodes_per_axis) {
    std::array<int, 3> n{1, 1, 1};
    for (int k = 0; k < dim; ++k) n[std::size_t(k)] = nodes_per_axis;
    return make_dirichlet_grid(dim, make_point(-L, dim > 1 ? -L : 0, dim > 2 ? -L : 0),
                               make_point(L, dim > 1 ? L : 0, dim > 2 ? L : 0), n);
}

// Nodal second differences d_jk u, one layer inside the boundary; the
// outermost layer copies its interior neighbour (u* is smooth there and the
// values only enter through eps-weighted terms).
GridField second_differences(const GridField& u) {
    const Grid& g = u.grid;
    int d = g.dim;
    GridField d2(g, d * d);
    auto val = [&](int p, int q, int s) { return u.at(g.idx(p, q, s)); };
    for (int p = 0; p < g.n[0]; ++p)
        for (int q = 0; q < (d > 1 ? g.n[1] : 1); ++q)
            for (int s = 0; s < (d > 2 ? g.n[2] : 1); ++s) {
                int pc = std::min(std::max(p, 1), g.n[0] - 2);
                int qc = d > 1 ? std::min(std::max(q, 1), g.n[1] - 2) : 0;
                int sc = d > 2 ? std::min(std::max(s, 1), g.n[2] - 2) : 0;
                std::size_t node = g.idx(p, q, s);
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k) {
                        double v;
                        if (j == k) {
                            int pp = pc + (j == 0), qq = qc + (j == 1), ss = sc + (j == 2);
                            int pm = pc - (j == 0), qm = qc - (j == 1), sm = sc - (j == 2);
                            v = (val(pp, qq, ss) - 2.0 * val(pc, qc, sc) + val(pm, qm, sm)) /
                                (g.h[j] * g.h[j]);
                        } else {
                            int pj = (j == 0), qj = (j == 1), sj = (j == 2);
                            int pk = (k == 0), qk = (k == 1), sk = (k == 2);
                            v = (val(pc + pj + pk, qc + qj + qk, sc + sj + sk) -
                                 val(pc + pj - pk, qc + qj - qk, sc + sj - sk) -
                                 val(pc - pj + pk, qc - qj + qk, sc - sj + sk) +
                                 val(pc - pj - pk, qc - qj - qk, sc - sj - sk)) /
                                (4.0 * g.h[j] * g.h[k]);
                        }
                        d2.at(node, j * d + k) = v;
                    }
            }
    return d2;
}

}  // namespace

std::pair<GridField, SolverReport> solve_oscillatory(const CoefficientSpec& spec,
                                                     const SourceSpec& source, double L,
                                                     double eps, int nodes_per_axis,
                                                     const SolverOptions& opts) {
    if (eps <= 0 || L <= 0) throw ConfigError("solve_oscillatory: eps, L must be positive");
    Grid g = domain_grid(spec.dim, L, nodes_per_axis);
    if (g.h[0] > eps / 16.0 + 1e-14)
        throw ResolutionTooCoarse("solve_oscillatory: h = " + std::to_string(g.h[0]) +
                                  " exceeds eps/16 = " + std::to_string(eps / 16.0));
    ScalarFn a = [&spec](const Point& y) { return spec.eval(y); };
    ScalarFn f = [&](const Point& x) { return source.eval(x, spec.dim); };
    DiscreteProblem prob = assemble(g, a, eps, &f, nullptr);
    return solve(prob, opts);
}

std::pair<GridField, SolverReport> solve_homogenized(const HomogenizedTensor& astar,
                                                     const SourceSpec& source, double L,
                                                     int nodes_per_axis,
                                                     const SolverOptions& opts) {
    int d = astar.dim;
    double offdiag = 0.0;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            if (i != k) offdiag = std::max(offdiag, std::abs(astar.at(i, k)));
    if (offdiag > 1e-6 * astar.at(0, 0))
        throw ConfigError("solve_homogenized: tensor has significant off-diagonal part " +
                          std::to_string(offdiag) + "; only diagonal a* is supported");
    Grid g = domain_grid(d, L, nodes_per_axis);
    // diagonal anisotropic constant coefficient: fold a*_ii into the face
    // arrays directly (assemble() only takes an isotropic scalar)
    ScalarFn one = [](const Point&) { return 1.0; };
    ScalarFn f = [&](const Point& x) { return source.eval(x, d); };
    DiscreteProblem prob = assemble(g, one, 1.0, &f, nullptr);
    for (int ax = 0; ax < d; ++ax)
        for (double& v : prob.face_a[std::size_t(ax)]) v *= astar.at(ax, ax);
    return solve(prob, opts);
}

GridField assemble_remainder(const GridField& u_eps, const GridField& u_star,
                             const CorrectorSet& set, double eps, bool periodic_only) {
    const Grid& g = u_eps.grid;
    if (!(u_star.grid == g)) throw ConfigError("assemble_remainder: grid mismatch");
    int d = g.dim;
    double reach = 0.0;
    for (int k = 0; k < d; ++k)
        reach = std::max(reach, std::max(std::abs(g.origin[k]),
                                         std::abs(g.origin[k] + (g.n[k] - 1) * g.h[k])));
    if (!periodic_only && set.has_defect() && set.truncation_radius < reach / eps - 1e-12)
        throw TruncationTooSmall("assemble_remainder: box radius " +
                                 std::to_string(set.truncation_radius) + " < |Omega|/eps = " +
                                 std::to_string(reach / eps));
    GridField grad = gradient(u_star);
    GridField R(g, 1);
    for (int p = 0; p < g.n[0]; ++p)
        for (int q = 0; q < (d > 1 ? g.n[1] : 1); ++q)
            for (int s = 0; s < (d > 2 ? g.n[2] : 1); ++s) {
                std::size_t node = g.idx(p, q, s);
                Point x = g.coord(p, q, s);
                Point y = {x[0] / eps, x[1] / eps, x[2] / eps};
                double corr = 0.0;
                for (int j = 0; j < d; ++j) {
                    double wj = periodic_only ? sample(set.w_per[std::size_t(j)], y)
                                              : sample_corrector(set, j, y);
                    corr += wj * grad.at(node, j);
                }
                R.at(node) = u_eps.at(node) - u_star.at(node) - eps * corr;
            }
    return R;
}

GridField assemble_H(const CoefficientSpec& spec, const CorrectorSet& set,
                     const PotentialField* B, const GridField& u_star, double eps,
                     bool periodic_only) {
    const Grid& g = u_star.grid;
    int d = g.dim;
    if (d > 1 && B == nullptr) throw ConfigError("assemble_H: potential required for d > 1");
    GridField d2u = second_differences(u_star);
    GridField H(g, d);
    for (int p = 0; p < g.n[0]; ++p)
        for (int q = 0; q < (d > 1 ? g.n[1] : 1); ++q)
            for (int s = 0; s < (d > 2 ? g.n[2] : 1); ++s) {
                std::size_t node = g.idx(p, q, s);
                Point x = g.coord(p, q, s);
                Point y = {x[0] / eps, x[1] / eps, x[2] / eps};
                double a = periodic_only ? spec.periodic_at(y) : spec.eval(y);
                for (int i = 0; i < d; ++i) {
                    double v = 0.0;
                    for (int k = 0; k < d; ++k) {
                        double wk = periodic_only ? sample(set.w_per[std::size_t(k)], y)
                                                  : sample_corrector(set, k, y);
                        v += a * wk * d2u.at(node, i * d + k);
                        // sign: with M_k = a* e_k - a(e_k + grad w_k) and
                        // div B_k = M_k, the divergence-form rewrite of the
                        // M_k grad(d_k u*) term carries +B (antisymmetry of B
                        // kills the third-derivative contraction)
                        if (d > 1)
                            for (int j = 0; j < d; ++j)
                                v += B->component(k, i, j, y) * d2u.at(node, j * d + k);
                    }
                    H.at(node, i) = eps * v;
                }
            }
    return H;
}

double residual_identity_check(const CoefficientSpec& spec, const GridField& R,
                               const GridField& H, double eps,
                               const std::optional<Box>& omega1) {
    const Grid& g = R.grid;
    if (!(H.grid == g)) throw ConfigError("residual_identity_check: grid mismatch");
    int d = g.dim;
    ScalarFn a = [&spec](const Point& y) { return spec.eval(y); };
    DiscreteProblem prob = assemble(g, a, eps, nullptr, nullptr);
    std::vector<double> lhs(g.nodes(), 0.0);
    apply_operator(prob, R.data.data(), lhs.data());
    double num = 0.0, den = 0.0;
    for (int p = 1; p < g.n[0] - 1; ++p)
        for (int q = (d > 1 ? 1 : 0); q < (d > 1 ? g.n[1] - 1 : 1); ++q)
            for (int s = (d > 2 ? 1 : 0); s < (d > 2 ? g.n[2] - 1 : 1); ++s) {
                Point x = g.coord(p, q, s);
                if (omega1 && !omega1->contains(x, d)) continue;
                double divH = 0.0;
                for (int i = 0; i < d; ++i) {
                    int pp = p + (i == 0), qq = q + (i == 1), ss = s + (i == 2);
                    int pm = p - (i == 0), qm = q - (i == 1), sm = s - (i == 2);
                    divH += (H.at(g.idx(pp, qq, ss), i) - H.at(g.idx(pm, qm, sm), i)) /
                            (2.0 * g.h[i]);
                }
                double l = lhs[g.idx(p, q, s)];
                num += (l - divH) * (l - divH);
                den += divH * divH;
            }
    if (den <= 0.0)
        throw NonPositiveValue("residual_identity_check: div H vanishes on the subdomain");
    return std::sqrt(num / den);
}

NormsRecord remainder_norms(const GridField& R, const GridField& u_eps,
                            const GridField& u_star, const Box& omega1,
                            const std::vector<double>& extra_p) {
    NormsRecord rec;
    GridField diff(R.grid, 1);
    for (std::size_t n = 0; n < R.grid.nodes(); ++n)
        diff.at(n) = u_eps.at(n) - u_star.at(n);
    GridField gradR = gradient(R);
    rec.l2_R = norm(R, 2.0);
    rec.l2_diff = norm(diff, 2.0);
    rec.linf_diff = norm(diff, kInfExponent);
    rec.l2_grad_R_1 = norm(gradR, 2.0, omega1);
    rec.linf_grad_R_1 = norm(gradR, kInfExponent, omega1);
    for (double p : extra_p) rec.lp_R.emplace_back(p, norm(R, p));
    return rec;
}

}  // namespace homodefect
