#include "homodefect/homogenization.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace homodefect {

namespace {

// Wrapped node index on a periodic cell grid.
inline int wrap(int i, int n) { return ((i % n) + n) % n; }

// Staggered flux through the +e_i face of node (p,q,s) for corrector
// direction k: a(face center)(delta_ik + forward difference of w_k).
// `w` is a scalar field on a periodic cell grid.
double cell_face_flux(const GridField& w, const CoefficientSpec& spec, bool full,
                      int i, int k, int p, int q, int s) {
    const Grid& g = w.grid;
    Point fc = g.coord(p, q, s);
    fc[i] += 0.5 * g.h[i];
    int pp = p, qq = q, ss = s;
    if (i == 0) pp = wrap(p + 1, g.n[0]);
    if (i == 1) qq = wrap(q + 1, g.n[1]);
    if (i == 2) ss = wrap(s + 1, g.n[2]);
    double dw = (w.at(g.idx(pp, qq, ss)) - w.at(g.idx(p, q, s))) / g.h[i];
    double a = full ? spec.eval(fc) : spec.periodic_at(fc);
    return a * ((i == k ? 1.0 : 0.0) + dw);
}

// Mean staggered flux matrix raw[i][k] over the periodic cell. Unlike the
// symmetrized tensor this keeps the exact discrete row structure: M built
// from it is divergence-free at solver accuracy.
std::array<std::array<double, 3>, 3> staggered_mean(const CoefficientSpec& spec,
                                                    const std::vector<GridField>& w_per) {
    std::array<std::array<double, 3>, 3> raw{};
    int d = spec.dim;
    const Grid& g = w_per[0].grid;
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i) {
            double sum = 0.0;
            for (int p = 0; p < g.n[0]; ++p)
                for (int q = 0; q < g.n[1]; ++q)
                    for (int s = 0; s < g.n[2]; ++s)
                        sum += cell_face_flux(w_per[std::size_t(k)], spec, false, i, k, p, q, s);
            raw[std::size_t(i)][std::size_t(k)] = sum / double(g.nodes());
        }
    return raw;
}

}  // namespace

double HomogenizedTensor::min_rayleigh(unsigned seed, int trials) const {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        double v[3] = {0, 0, 0}, n2 = 0;
        for (int i = 0; i < dim; ++i) {
            v[i] = gauss(rng);
            n2 += v[i] * v[i];
        }
        if (n2 < 1e-12) continue;
        double q = 0;
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) q += v[i] * at(i, k) * v[k];
        best = std::min(best, q / n2);
    }
    // axis directions too, so diagonal entries always bound the estimate
    for (int i = 0; i < dim; ++i) best = std::min(best, at(i, i));
    return best;
}

HomogenizedTensor homogenized_tensor(const CoefficientSpec& spec,
                                     const std::vector<GridField>& w_per) {
    if (int(w_per.size()) != spec.dim)
        throw ConfigError("homogenized_tensor: need one corrector per direction");
    auto raw = staggered_mean(spec, w_per);
    HomogenizedTensor t;
    t.dim = spec.dim;
    t.cell_resolution = w_per[0].grid.n[0];
    t.spec_hash = std::to_string(fnv1a64(spec.canonical_json()));
    for (int i = 0; i < spec.dim; ++i)
        for (int k = 0; k < spec.dim; ++k) {
            t.a[std::size_t(i)][std::size_t(k)] =
                0.5 * (raw[std::size_t(i)][std::size_t(k)] + raw[std::size_t(k)][std::size_t(i)]);
            t.asymmetry = std::max(t.asymmetry, std::abs(raw[std::size_t(i)][std::size_t(k)] -
                                                         raw[std::size_t(k)][std::size_t(i)]));
        }
    return t;
}

std::vector<double> defect_invariance_probe(const CoefficientSpec& spec,
                                            const std::vector<int>& radii,
                                            int box_resolution, const SolverOptions& opts) {
    if (!spec.has_defect()) throw ConfigError("defect_invariance_probe: spec has no defect part");
    std::vector<double> out;
    for (int R : radii) {
        CorrectorSet set = build_corrector_set(spec, box_resolution, R, box_resolution, opts);
        const Grid& bg = set.w_tilde[0].grid;
        int d = spec.dim;
        double worst = 0.0;
        for (int k = 0; k < d; ++k) {
            const GridField& wt = set.w_tilde[std::size_t(k)];
            const GridField& wp = set.w_per_box[std::size_t(k)];
            const Grid& cg = wp.grid;
            for (int i = 0; i < d; ++i) {
                double sum_full = 0.0, sum_per = 0.0;
                std::size_t faces = 0;
                // faces fully inside the box: skip the last node layer on axis i
                for (int p = 0; p < bg.n[0] - (i == 0 ? 1 : 0); ++p)
                    for (int q = 0; q < (d > 1 ? bg.n[1] - (i == 1 ? 1 : 0) : 1); ++q)
                        for (int s = 0; s < (d > 2 ? bg.n[2] - (i == 2 ? 1 : 0) : 1); ++s) {
                            Point fc = bg.coord(p, q, s);
                            fc[i] += 0.5 * bg.h[i];
                            int pp = p + (i == 0), qq = q + (i == 1), ss = s + (i == 2);
                            auto wfull = [&](int x, int y, int z) {
                                return wp.at(cg.idx(wrap(x, cg.n[0]), wrap(y, cg.n[1]),
                                                    wrap(z, cg.n[2]))) +
                                       wt.at(bg.idx(x, y, z));
                            };
                            auto wper = [&](int x, int y, int z) {
                                return wp.at(cg.idx(wrap(x, cg.n[0]), wrap(y, cg.n[1]),
                                                    wrap(z, cg.n[2])));
                            };
                            double del = (i == k) ? 1.0 : 0.0;
                            sum_full += spec.eval(fc) *
                                        (del + (wfull(pp, qq, ss) - wfull(p, q, s)) / bg.h[i]);
                            sum_per += spec.periodic_at(fc) *
                                       (del + (wper(pp, qq, ss) - wper(p, q, s)) / bg.h[i]);
                            ++faces;
                        }
                worst = std::max(worst, std::abs(sum_full - sum_per) / double(faces));
            }
        }
        out.push_back(worst);
    }
    return out;
}

GridField flux_residual(const CoefficientSpec& spec, const CorrectorSet& set,
                        const HomogenizedTensor& astar, int k, bool include_defect) {
    int d = spec.dim;
    if (include_defect && !set.has_defect())
        throw ConfigError("flux_residual: corrector set has no defect part");
    GridField w;
    if (include_defect) {
        // combine w_per_box (wrapped) and w_tilde on the box grid
        const Grid& bg = set.w_tilde[std::size_t(k)].grid;
        const GridField& wp = set.w_per_box[std::size_t(k)];
        const Grid& cg = wp.grid;
        w = GridField(bg, 1);
        for (int p = 0; p < bg.n[0]; ++p)
            for (int q = 0; q < bg.n[1]; ++q)
                for (int s = 0; s < bg.n[2]; ++s)
                    w.at(bg.idx(p, q, s)) =
                        wp.at(cg.idx(wrap(p, cg.n[0]), wrap(q, cg.n[1]), wrap(s, cg.n[2]))) +
                        set.w_tilde[std::size_t(k)].at(bg.idx(p, q, s));
    } else {
        w = set.w_per[std::size_t(k)];
    }
    GridField grad = gradient(w);
    GridField M(w.grid, d);
    const Grid& g = w.grid;
    for (int p = 0; p < g.n[0]; ++p)
        for (int q = 0; q < g.n[1]; ++q)
            for (int s = 0; s < g.n[2]; ++s) {
                Point y = g.coord(p, q, s);
                double a = include_defect ? spec.eval(y) : spec.periodic_at(y);
                std::size_t node = g.idx(p, q, s);
                for (int i = 0; i < d; ++i)
                    M.at(node, i) =
                        astar.at(i, k) - a * ((i == k ? 1.0 : 0.0) + grad.at(node, i));
            }
    return M;
}

double max_divergence(const GridField& M) {
    const Grid& g = M.grid;
    int d = g.dim;
    bool per = g.bc == BcTag::periodic;
    double worst = 0.0;
    auto lo = per ? 0 : 1;
    for (int p = lo; p < g.n[0] - (per ? 0 : 1); ++p)
        for (int q = (d > 1 ? lo : 0); q < (d > 1 ? g.n[1] - (per ? 0 : 1) : 1); ++q)
            for (int s = (d > 2 ? lo : 0); s < (d > 2 ? g.n[2] - (per ? 0 : 1) : 1); ++s) {
                double div = 0.0;
                for (int i = 0; i < d; ++i) {
                    int pp = p + (i == 0), qq = q + (i == 1), ss = s + (i == 2);
                    int pm = p - (i == 0), qm = q - (i == 1), sm = s - (i == 2);
                    if (per) {
                        pp = wrap(pp, g.n[0]); qq = wrap(qq, g.n[1]); ss = wrap(ss, g.n[2]);
                        pm = wrap(pm, g.n[0]); qm = wrap(qm, g.n[1]); sm = wrap(sm, g.n[2]);
                    }
                    div += (M.at(g.idx(pp, qq, ss), i) - M.at(g.idx(pm, qm, sm), i)) /
                           (2.0 * g.h[i]);
                }
                worst = std::max(worst, std::abs(div));
            }
    return worst;
}

int PotentialField::tri_index(int i, int j, int dim) {
    // upper triangle (i < j) in row-major order
    int idx = 0;
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b) {
            if (a == i && b == j) return idx;
            ++idx;
        }
    throw ConfigError("PotentialField::tri_index: bad component");
}

namespace {

bool grid_contains(const Grid& g, const Point& y) {
    for (int ax = 0; ax < g.dim; ++ax) {
        double lo = g.origin[ax], hi = g.origin[ax] + (g.n[ax] - 1) * g.h[ax];
        if (y[ax] < lo || y[ax] > hi) return false;
    }
    return true;
}

}  // namespace

double PotentialField::component(int k, int i, int j, const Point& y) const {
    if (i == j || dim == 1) return 0.0;
    double sign = 1.0;
    if (i > j) { std::swap(i, j); sign = -1.0; }
    int c = tri_index(i, j, dim);
    double v = sample(B_per[std::size_t(k)], y, c);
    if (!B_tilde.empty() && grid_contains(B_tilde[std::size_t(k)].grid, y))
        v += sample(B_tilde[std::size_t(k)], y, c);
    return sign * v;
}

namespace {

// d = 2 periodic part: integrate the stream function b_k at cell centers
// from the staggered flux residual M_k. Row sums of the staggered field
// vanish exactly (divergence-free + mean built from the same faces), so the
// path integral closes around the torus.
GridField stream_function_periodic(const CoefficientSpec& spec, const GridField& w,
                                   int k, const std::array<std::array<double, 3>, 3>& raw,
                                   double* residual) {
    const Grid& g = w.grid;
    int n0 = g.n[0], n1 = g.n[1];
    double h = g.h[0];
    auto M = [&](int i, int p, int q) {
        return raw[std::size_t(i)][std::size_t(k)] - cell_face_flux(w, spec, false, i, k, p, q, 0);
    };
    Grid cg = g;
    cg.origin = {g.origin[0] + 0.5 * h, g.origin[1] + 0.5 * g.h[1], 0};
    GridField b(cg, 1);
    // bottom cell row via the y-faces, then each column via the x-faces
    for (int p = 1; p < n0; ++p)
        b.at(cg.idx(p, 0)) = b.at(cg.idx(p - 1, 0)) - h * M(1, p, 0);
    for (int q = 1; q < n1; ++q)
        for (int p = 0; p < n0; ++p)
            b.at(cg.idx(p, q)) = b.at(cg.idx(p, q - 1)) + g.h[1] * M(0, p, q);
    subtract_mean(b);
    // check every face relation, including the wrap-around ones
    double num = 0, den = 0;
    for (int p = 0; p < n0; ++p)
        for (int q = 0; q < n1; ++q) {
            double m1 = M(0, p, q), m2 = M(1, p, q);
            double d1 = (b.at(cg.idx(p, q)) - b.at(cg.idx(p, wrap(q - 1, n1)))) / g.h[1];
            double d2 = -(b.at(cg.idx(p, q)) - b.at(cg.idx(wrap(p - 1, n0), q))) / h;
            num += (d1 - m1) * (d1 - m1) + (d2 - m2) * (d2 - m2);
            den += m1 * m1 + m2 * m2;
        }
    if (residual) *residual = den > 0 ? std::sqrt(num / den) : 0.0;
    return b;
}

// d = 2 defect part on the truncation box. The staggered defect residual
// Mt = -(full flux - periodic flux) is divergence-free at interior nodes
// and decays towards the boundary; gauge: zero mean on the boundary ring.
GridField stream_function_defect(const CoefficientSpec& spec, const CorrectorSet& set, int k,
                                 double* residual) {
    const Grid& bg = set.w_tilde[std::size_t(k)].grid;
    const GridField& wp = set.w_per_box[std::size_t(k)];
    const GridField& wt = set.w_tilde[std::size_t(k)];
    const Grid& cg = wp.grid;
    int N0 = bg.n[0], N1 = bg.n[1];
    double h = bg.h[0];
    auto W = [&](int p, int q) {
        return wp.at(cg.idx(wrap(p, cg.n[0]), wrap(q, cg.n[1]))) + wt.at(bg.idx(p, q));
    };
    auto Wper = [&](int p, int q) { return wp.at(cg.idx(wrap(p, cg.n[0]), wrap(q, cg.n[1]))); };
    // Mt at the +e_i face of box node (p,q)
    auto Mt = [&](int i, int p, int q) {
        Point fc = bg.coord(p, q);
        fc[i] += 0.5 * bg.h[i];
        int pp = p + (i == 0), qq = q + (i == 1);
        double del = (i == k) ? 1.0 : 0.0;
        double qf = spec.eval(fc) * (del + (W(pp, qq) - W(p, q)) / bg.h[i]);
        double qp = spec.periodic_at(fc) * (del + (Wper(pp, qq) - Wper(p, q)) / bg.h[i]);
        return -(qf - qp);
    };
    Grid ccg;
    ccg.dim = 2;
    ccg.bc = BcTag::dirichlet;
    ccg.n = {N0 - 1, N1 - 1, 1};
    ccg.origin = {bg.origin[0] + 0.5 * h, bg.origin[1] + 0.5 * bg.h[1], 0};
    ccg.h = bg.h;
    GridField b(ccg, 1);
    // y-face between cells (p-1,0),(p,0) sits at node x-index p, cell row q=0
    for (int p = 1; p < N0 - 1; ++p)
        b.at(ccg.idx(p, 0)) = b.at(ccg.idx(p - 1, 0)) - h * Mt(1, p, 0);
    // x-face between cells (p,q-1),(p,q) sits at node y-index q
    for (int q = 1; q < N1 - 1; ++q)
        for (int p = 0; p < N0 - 1; ++p)
            b.at(ccg.idx(p, q)) = b.at(ccg.idx(p, q - 1)) + bg.h[1] * Mt(0, p, q);
    // boundary-ring gauge
    double ring = 0.0;
    std::size_t cnt = 0;
    for (int p = 0; p < N0 - 1; ++p)
        for (int q = 0; q < N1 - 1; ++q)
            if (p == 0 || q == 0 || p == N0 - 2 || q == N1 - 2) {
                ring += b.at(ccg.idx(p, q));
                ++cnt;
            }
    ring /= double(cnt);
    for (double& v : b.data) v -= ring;
    // residual over all interior faces
    double num = 0, den = 0;
    for (int p = 1; p < N0 - 1; ++p)
        for (int q = 0; q < N1 - 1; ++q) {
            double m = Mt(1, p, q);
            double dd = -(b.at(ccg.idx(p, q)) - b.at(ccg.idx(p - 1, q))) / h;
            num += (dd - m) * (dd - m);
            den += m * m;
        }
    for (int q = 1; q < N1 - 1; ++q)
        for (int p = 0; p < N0 - 1; ++p) {
            double m = Mt(0, p, q);
            double dd = (b.at(ccg.idx(p, q)) - b.at(ccg.idx(p, q - 1))) / bg.h[1];
            num += (dd - m) * (dd - m);
            den += m * m;
        }
    if (residual) *residual = den > 0 ? std::sqrt(num / den) : 0.0;
    return b;
}

// d = 3 fallback: B_k^{ij} = d_i phi_k^j - d_j phi_k^i with -lap phi_k^j =
// -M_k^j on the periodic cell; O(h) residual from the central differences.
std::vector<GridField> potential_poisson_3d(const CoefficientSpec& spec,
                                            const CorrectorSet& set,
                                            const HomogenizedTensor& astar,
                                            const SolverOptions& opts, double* residual) {
    int d = spec.dim;
    std::vector<GridField> out;
    double num = 0, den = 0;
    for (int k = 0; k < d; ++k) {
        GridField M = flux_residual(spec, set, astar, k, false);
        const Grid& g = M.grid;
        std::vector<GridField> phi;
        for (int j = 0; j < d; ++j) {
            ScalarFn one = [](const Point&) { return 1.0; };
            DiscreteProblem prob = assemble(g, one, 1.0, nullptr, nullptr);
            for (std::size_t nidx = 0; nidx < g.nodes(); ++nidx)
                prob.rhs[nidx] = -M.at(nidx, j);
            double mean = 0;
            for (double v : prob.rhs) mean += v;
            mean /= double(g.nodes());
            for (double& v : prob.rhs) v -= mean;
            phi.push_back(solve(prob, opts).first);
        }
        std::vector<GridField> dphi;
        for (int j = 0; j < d; ++j) dphi.push_back(gradient(phi[std::size_t(j)]));
        GridField B(g, d * (d - 1) / 2);
        for (std::size_t nidx = 0; nidx < g.nodes(); ++nidx) {
            int c = 0;
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j, ++c)
                    B.at(nidx, c) = dphi[std::size_t(j)].at(nidx, i) -
                                    dphi[std::size_t(i)].at(nidx, j);
        }
        // central-difference div B vs nodal M
        for (int p = 0; p < g.n[0]; ++p)
            for (int q = 0; q < g.n[1]; ++q)
                for (int s = 0; s < g.n[2]; ++s)
                    for (int j = 0; j < d; ++j) {
                        double div = 0;
                        for (int i = 0; i < d; ++i) {
                            if (i == j) continue;
                            int pp = wrap(p + (i == 0), g.n[0]), qq = wrap(q + (i == 1), g.n[1]),
                                ss = wrap(s + (i == 2), g.n[2]);
                            int pm = wrap(p - (i == 0), g.n[0]), qm = wrap(q - (i == 1), g.n[1]),
                                sm = wrap(s - (i == 2), g.n[2]);
                            int lo2 = std::min(i, j), hi2 = std::max(i, j);
                            double sgn = (i < j) ? 1.0 : -1.0;
                            int c = PotentialField::tri_index(lo2, hi2, d);
                            div += sgn * (B.at(g.idx(pp, qq, ss), c) - B.at(g.idx(pm, qm, sm), c)) /
                                   (2.0 * g.h[i]);
                        }
                        double m = M.at(g.idx(p, q, s), j);
                        num += (div - m) * (div - m);
                        den += m * m;
                    }
        out.push_back(std::move(B));
    }
    if (residual) *residual = den > 0 ? std::sqrt(num / den) : 0.0;
    return out;
}

}  // namespace

PotentialField solve_potential(const CoefficientSpec& spec, const CorrectorSet& set,
                               const HomogenizedTensor& astar, const SolverOptions& opts) {
    PotentialField out;
    out.dim = spec.dim;
    if (spec.dim == 1) return out;  // antisymmetric 1x1 matrix is zero
    if (spec.dim == 2) {
        auto raw = staggered_mean(spec, set.w_per);
        double worst = 0.0;
        for (int k = 0; k < 2; ++k) {
            double r = 0;
            out.B_per.push_back(
                stream_function_periodic(spec, set.w_per[std::size_t(k)], k, raw, &r));
            worst = std::max(worst, r);
        }
        out.div_residual_rel = worst;
        if (set.has_defect()) {
            worst = 0.0;
            for (int k = 0; k < 2; ++k) {
                double r = 0;
                out.B_tilde.push_back(stream_function_defect(spec, set, k, &r));
                worst = std::max(worst, r);
            }
            out.div_residual_rel_tilde = worst;
        }
        return out;
    }
    out.B_per = potential_poisson_3d(spec, set, astar, opts, &out.div_residual_rel);
    return out;  // 3D defect part deliberately not constructed
}

double potential_sublinearity(const PotentialField& B, const std::vector<double>& radii,
                              unsigned seed) {
    if (B.dim == 1) throw ConfigError("potential_sublinearity: trivial in 1D");
    int ncomp = B.dim * (B.dim - 1) / 2;
    Point center{0, 0, 0};
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < B.dim; ++k)
        for (int c = 0; c < ncomp; ++c) {
            auto fn = [&, k, c](const Point& y) {
                double v = sample(B.B_per[std::size_t(k)], y, c);
                if (!B.B_tilde.empty() && grid_contains(B.B_tilde[std::size_t(k)].grid, y))
                    v += sample(B.B_tilde[std::size_t(k)], y, c);
                return v;
            };
            worst = std::max(worst,
                             oscillation_slope(fn, B.dim, center, radii, seed + unsigned(16 * k + c)));
        }
    return worst;
}

}  // namespace homodefect
