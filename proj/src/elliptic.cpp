#include "homodefect/elliptic.hpp"

#include <chrono>
#include <memory>
#include <numeric>

namespace homodefect {

namespace {

struct Strides {
    long s[3];
    int n[3];
    explicit Strides(const Grid& g) {
        n[0] = g.n[0]; n[1] = g.n[1]; n[2] = g.n[2];
        s[0] = long(g.n[1]) * g.n[2];
        s[1] = g.n[2];
        s[2] = 1;
    }
};

inline bool is_boundary(const Grid& g, int i, int j, int k) {
    if (g.bc == BcTag::periodic) return false;
    for (int ax = 0; ax < g.dim; ++ax) {
        const int id = ax == 0 ? i : (ax == 1 ? j : k);
        if (id == 0 || id == g.n[ax] - 1) return true;
    }
    return false;
}

}  // namespace

DiscreteProblem assemble(const Grid& grid, const ScalarFn& coeff, double scale,
                         const ScalarFn* rhs_volume, const FluxFn* rhs_flux) {
    if (scale <= 0.0) throw ConfigError("assemble: scale must be positive");
    DiscreteProblem p;
    p.grid = grid;
    const std::size_t nn = grid.nodes();
    p.rhs.assign(nn, 0.0);
    const bool per = grid.bc == BcTag::periodic;

    for (int ax = 0; ax < grid.dim; ++ax) {
        p.face_a[ax].assign(nn, 0.0);
        for (int i = 0; i < grid.n[0]; ++i)
            for (int j = 0; j < grid.n[1]; ++j)
                for (int k = 0; k < grid.n[2]; ++k) {
                    const int id_ax = ax == 0 ? i : (ax == 1 ? j : k);
                    if (!per && id_ax == grid.n[ax] - 1) continue;  // no +face
                    Point x = grid.coord(i, j, k);
                    x[ax] += 0.5 * grid.h[ax];
                    const Point y{x[0] / scale, x[1] / scale, x[2] / scale};
                    p.face_a[ax][grid.idx(i, j, k)] = coeff(y);
                }
    }

    for (int i = 0; i < grid.n[0]; ++i)
        for (int j = 0; j < grid.n[1]; ++j)
            for (int k = 0; k < grid.n[2]; ++k) {
                if (is_boundary(grid, i, j, k)) continue;
                const Point x = grid.coord(i, j, k);
                double b = rhs_volume ? (*rhs_volume)(x) : 0.0;
                if (rhs_flux) {
                    for (int ax = 0; ax < grid.dim; ++ax) {
                        Point xp = x, xm = x;
                        xp[ax] += 0.5 * grid.h[ax];
                        xm[ax] -= 0.5 * grid.h[ax];
                        b += ((*rhs_flux)(xp, ax) - (*rhs_flux)(xm, ax)) / grid.h[ax];
                    }
                }
                p.rhs[grid.idx(i, j, k)] = b;
            }

    if (per) {
        const double mean = std::accumulate(p.rhs.begin(), p.rhs.end(), 0.0) / double(nn);
        for (double& v : p.rhs) v -= mean;
    }
    return p;
}

void apply_operator(const DiscreteProblem& p, const double* u, double* out) {
    const Grid& g = p.grid;
    const Strides st(g);
    const bool per = g.bc == BcTag::periodic;
    double invh2[3];
    for (int ax = 0; ax < g.dim; ++ax) invh2[ax] = 1.0 / (g.h[ax] * g.h[ax]);

    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                const std::size_t id = g.idx(i, j, k);
                if (is_boundary(g, i, j, k)) {
                    out[id] = 0.0;
                    continue;
                }
                double acc = 0.0;
                const int ids[3] = {i, j, k};
                for (int ax = 0; ax < g.dim; ++ax) {
                    long ip = long(id) + st.s[ax];
                    long im = long(id) - st.s[ax];
                    std::size_t face_m;
                    if (per) {
                        if (ids[ax] == g.n[ax] - 1) ip -= long(g.n[ax]) * st.s[ax];
                        if (ids[ax] == 0) im += long(g.n[ax]) * st.s[ax];
                        face_m = std::size_t(im);
                    } else {
                        face_m = std::size_t(im);
                    }
                    const double ap = p.face_a[ax][id];
                    const double am = p.face_a[ax][face_m];
                    acc += (ap * (u[id] - u[ip]) + am * (u[id] - u[im])) * invh2[ax];
                }
                out[id] = acc;
            }
}

namespace {

// ---- 1D direct (Thomas) ----------------------------------------------

GridField solve_1d(const DiscreteProblem& p, SolverReport& rep) {
    const Grid& g = p.grid;
    const int n = g.n[0];
    const double invh2 = 1.0 / (g.h[0] * g.h[0]);
    GridField u(g, 1);

    auto thomas = [&](int lo, int hi, const std::vector<double>& b) {
        // tridiagonal rows lo..hi, Dirichlet-like truncation outside
        const int m = hi - lo + 1;
        std::vector<double> c(m), dpr(m);
        auto aface = [&](int i) { return p.face_a[0][std::size_t(i)] * invh2; };
        // row i: diag = a(i-1,i)+a(i,i+1), off = -a(face); wrap faces enter only via known u=0
        auto facem = [&](int i) { return aface((i - 1 + n) % n); };
        auto facep = [&](int i) { return aface(i % n); };
        for (int t = 0; t < m; ++t) {
            const int i = lo + t;
            const double diag = facem(i) + facep(i);
            const double lower = -facem(i);
            const double upper = -facep(i);
            if (t == 0) {
                c[t] = upper / diag;
                dpr[t] = b[std::size_t(i)] / diag;
            } else {
                const double den = diag - lower * c[t - 1];
                c[t] = upper / den;
                dpr[t] = (b[std::size_t(i)] - lower * dpr[t - 1]) / den;
            }
        }
        std::vector<double> x(m);
        x[m - 1] = dpr[m - 1];
        for (int t = m - 2; t >= 0; --t) x[t] = dpr[t] - c[t] * x[t + 1];
        for (int t = 0; t < m; ++t) u.data[std::size_t(lo + t)] = x[t];
    };

    if (g.bc == BcTag::dirichlet) {
        thomas(1, n - 2, p.rhs);
    } else {
        // singular periodic system: rhs already zero-mean; pin u_0 = 0,
        // solve the reduced tridiagonal block 1..n-1, then de-mean
        thomas(1, n - 1, p.rhs);
        subtract_mean(u);
    }

    std::vector<double> r(g.nodes());
    apply_operator(p, u.data.data(), r.data());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - p.rhs[i];
        num += d * d;
        den += p.rhs[i] * p.rhs[i];
    }
    rep.iterations = 1;
    rep.residual = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    return u;
}

// ---- IC(0) for the Dirichlet stencil ----------------------------------

struct Ic0 {
    std::vector<double> d;  // modified diagonal
    const DiscreteProblem* p = nullptr;
    Strides st;
    double invh2[3]{};

    explicit Ic0(const DiscreteProblem& prob) : p(&prob), st(prob.grid) {
        const Grid& g = prob.grid;
        for (int ax = 0; ax < g.dim; ++ax) invh2[ax] = 1.0 / (g.h[ax] * g.h[ax]);
        d.assign(g.nodes(), 1.0);
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k) {
                    if (is_boundary(g, i, j, k)) continue;
                    const std::size_t id = g.idx(i, j, k);
                    const int ids[3] = {i, j, k};
                    double diag = 0.0;
                    for (int ax = 0; ax < g.dim; ++ax)
                        diag += (p->face_a[ax][id] + p->face_a[ax][id - st.s[ax]]) * invh2[ax];
                    double corr = 0.0;
                    for (int ax = 0; ax < g.dim; ++ax) {
                        if (ids[ax] <= 1) continue;  // lower neighbour is boundary
                        int nb[3] = {i, j, k};
                        nb[ax] -= 1;
                        if (is_boundary(g, nb[0], nb[1], nb[2])) continue;
                        const std::size_t jd = id - st.s[ax];
                        const double off = -p->face_a[ax][jd] * invh2[ax];
                        corr += off * off / d[jd];
                    }
                    d[id] = diag - corr;
                    if (!(d[id] > 0)) d[id] = diag;  // breakdown guard
                }
    }

    // z = M^{-1} r with M = (D+L) D^{-1} (D+L^T)
    void apply(const std::vector<double>& r, std::vector<double>& z,
               std::vector<double>& work) const {
        const Grid& g = p->grid;
        work.assign(r.size(), 0.0);
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k) {
                    const std::size_t id = g.idx(i, j, k);
                    if (is_boundary(g, i, j, k)) { work[id] = 0.0; continue; }
                    const int ids[3] = {i, j, k};
                    double acc = r[id];
                    for (int ax = 0; ax < g.dim; ++ax) {
                        if (ids[ax] <= 1) continue;
                        const std::size_t jd = id - st.s[ax];
                        const double off = -p->face_a[ax][jd] * invh2[ax];
                        acc -= off * work[jd];
                    }
                    work[id] = acc / d[id];
                }
        z.assign(r.size(), 0.0);
        for (int i = g.n[0] - 1; i >= 0; --i)
            for (int j = g.n[1] - 1; j >= 0; --j)
                for (int k = g.n[2] - 1; k >= 0; --k) {
                    const std::size_t id = g.idx(i, j, k);
                    if (is_boundary(g, i, j, k)) { z[id] = 0.0; continue; }
                    const int ids[3] = {i, j, k};
                    double acc = work[id];
                    for (int ax = 0; ax < g.dim; ++ax) {
                        if (ids[ax] >= g.n[ax] - 2) continue;  // upper neighbour boundary/out
                        const std::size_t jd = id + st.s[ax];
                        const double off = -p->face_a[ax][id] * invh2[ax];
                        acc -= off * z[jd] / d[id];
                    }
                    z[id] = acc;
                }
    }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

GridField solve_cg(const DiscreteProblem& p, const SolverOptions& opts, SolverReport& rep) {
    const Grid& g = p.grid;
    const std::size_t nn = g.nodes();
    const bool per = g.bc == BcTag::periodic;

    Preconditioner pc = opts.precond;
    if (pc == Preconditioner::automatic)
        pc = (!per && g.dim >= 2) ? Preconditioner::ic0 : Preconditioner::jacobi;
    if (per && pc == Preconditioner::ic0) pc = Preconditioner::jacobi;

    std::unique_ptr<Ic0> ic;
    std::vector<double> invdiag;
    if (pc == Preconditioner::ic0) {
        ic = std::make_unique<Ic0>(p);
    } else {
        invdiag.assign(nn, 1.0);
        const Strides st(g);
        double invh2[3];
        for (int ax = 0; ax < g.dim; ++ax) invh2[ax] = 1.0 / (g.h[ax] * g.h[ax]);
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k) {
                    if (is_boundary(g, i, j, k)) continue;
                    const std::size_t id = g.idx(i, j, k);
                    const int ids[3] = {i, j, k};
                    double diag = 0.0;
                    for (int ax = 0; ax < g.dim; ++ax) {
                        long im = long(id) - st.s[ax];
                        if (per && ids[ax] == 0) im += long(g.n[ax]) * st.s[ax];
                        diag += (p.face_a[ax][id] + p.face_a[ax][std::size_t(im)]) * invh2[ax];
                    }
                    invdiag[id] = 1.0 / diag;
                }
    }

    auto project = [&](std::vector<double>& v) {
        if (!per) return;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(nn);
        for (double& x : v) x -= mean;
    };

    GridField u(g, 1);
    std::vector<double> r = p.rhs, z(nn), q(nn), s(nn), work;
    const double bnorm = std::sqrt(dot(r, r));
    rep.iterations = 0;
    rep.residual = 0.0;
    if (bnorm == 0.0) return u;

    project(r);
    if (ic) ic->apply(r, z, work);
    else for (std::size_t i = 0; i < nn; ++i) z[i] = r[i] * invdiag[i];
    project(z);
    std::vector<double> d = z;
    double rz = dot(r, z);

    for (long it = 1; it <= opts.max_iter; ++it) {
        apply_operator(p, d.data(), q.data());
        const double dq = dot(d, q);
        if (dq <= 0.0) throw NoConvergence("CG: indefinite operator step", it, rep.residual);
        const double alpha = rz / dq;
        for (std::size_t i = 0; i < nn; ++i) {
            u.data[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        project(r);
        const double rn = std::sqrt(dot(r, r));
        rep.iterations = it;
        rep.residual = rn / bnorm;
        if (rep.residual <= opts.tol) break;
        if (it == opts.max_iter)
            throw NoConvergence("CG did not reach tolerance", it, rep.residual);
        if (ic) ic->apply(r, z, work);
        else for (std::size_t i = 0; i < nn; ++i) z[i] = r[i] * invdiag[i];
        project(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < nn; ++i) d[i] = z[i] + beta * d[i];
    }
    if (per) subtract_mean(u);
    return u;
}

}  // namespace

std::pair<GridField, SolverReport> solve(const DiscreteProblem& p, const SolverOptions& opts) {
    if (!(opts.tol > 0.0 && opts.tol < 1.0)) throw ConfigError("solver tol must be in (0,1)");
    const auto t0 = std::chrono::steady_clock::now();
    SolverReport rep;
    GridField u = p.grid.dim == 1 ? solve_1d(p, rep) : solve_cg(p, opts, rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    assert_finite(u, "solve");
    return {std::move(u), rep};
}

}  // namespace homodefect
