#include "homodefect/correctors.hpp"

#include <filesystem>
#include <random>

#include "homodefect/oracle1d.hpp"

namespace homodefect {

GridField solve_periodic_corrector(const CoefficientSpec& spec, int cell_resolution, int j,
                                   const SolverOptions& opts) {
    if (j < 0 || j >= spec.dim) throw ConfigError("corrector direction out of range");
    if (cell_resolution < 8) throw ConfigError("cell resolution must be >= 8");
    const Grid cell = make_periodic_cell(spec.dim, cell_resolution);
    auto coeff = [&spec](const Point& y) { return spec.periodic_at(y); };
    FluxFn g = [&spec, j](const Point& y, int axis) {
        return axis == j ? spec.periodic_at(y) : 0.0;
    };
    DiscreteProblem p = assemble(cell, coeff, 1.0, nullptr, &g);
    auto [w, rep] = solve(p, opts);
    subtract_mean(w);
    return w;
}

namespace {

// Difference quotient of the box-resolution periodic corrector across the
// face centered at x along `axis` (both endpoints are lattice points).
double face_gradient_per(const GridField& w_per_box, const Point& x, int axis, double H) {
    Point xp = x, xm = x;
    xp[axis] += 0.5 * H;
    xm[axis] -= 0.5 * H;
    return (sample(w_per_box, xp) - sample(w_per_box, xm)) / H;
}

}  // namespace

GridField solve_defect_corrector(const CoefficientSpec& spec, const GridField& w_per_box_j,
                                 int truncation_radius, int box_resolution, int j,
                                 const SolverOptions& opts) {
    const int R = truncation_radius;
    if (R < 4) throw ConfigError("truncation radius must cover at least 4 periods");
    if (sup_norm(spec.defect.center, spec.dim) > R / 2.0)
        throw DefectNotCentered("defect center too close to the truncation boundary");
    const double H = 1.0 / box_resolution;
    std::array<int, 3> nodes{1, 1, 1};
    for (int k = 0; k < spec.dim; ++k) nodes[k] = 2 * R * box_resolution + 1;
    const Grid box = make_dirichlet_grid(spec.dim, make_point(-R, -R, -R),
                                         make_point(R, R, R), nodes);
    auto coeff = [&spec](const Point& y) { return spec.eval(y); };
    FluxFn g = [&](const Point& y, int axis) {
        const double at = spec.defect_at(y);
        if (at == 0.0) return 0.0;
        double e = axis == j ? 1.0 : 0.0;
        return at * (e + face_gradient_per(w_per_box_j, y, axis, H));
    };
    DiscreteProblem p = assemble(box, coeff, 1.0, nullptr, &g);
    auto [w, rep] = solve(p, opts);
    return w;
}

namespace {

CorrectorSet oracle_backed_set(const CoefficientSpec& spec, int cell_resolution,
                               int truncation_radius, int box_resolution) {
    if (spec.dim != 1) throw ConfigError("oracle corrector method is 1D only");
    CorrectorSet set;
    set.spec = spec;
    set.dim = 1;
    set.cell_resolution = cell_resolution;
    set.box_resolution = box_resolution;
    set.truncation_radius = spec.has_defect() ? truncation_radius : 0.0;
    set.oracle_backed = true;
    OracleCorrector1D oc(spec, truncation_radius + 1.0);
    GridField wp(make_periodic_cell(1, cell_resolution), 1);
    for (int i = 0; i < cell_resolution; ++i)
        wp.data[std::size_t(i)] = oc.w_per(double(i) / cell_resolution);
    subtract_mean(wp);
    set.w_per.push_back(wp);
    set.grad_w_per.push_back(gradient(wp));
    set.w_per_box.push_back(wp);
    if (spec.has_defect()) {
        const int n = 2 * truncation_radius * box_resolution + 1;
        GridField wt(make_dirichlet_grid(1, make_point(-truncation_radius),
                                         make_point(truncation_radius), {n, 1, 1}),
                     1);
        for (int i = 0; i < n; ++i) {
            const double y = -truncation_radius + double(i) / box_resolution;
            wt.data[std::size_t(i)] = oc.w_tilde(y);
        }
        // pull to the Dirichlet gauge (zero at the truncation boundary)
        const double b0 = wt.data.front(), b1 = wt.data.back();
        for (int i = 0; i < n; ++i) {
            const double t = double(i) / (n - 1);
            wt.data[std::size_t(i)] -= (1.0 - t) * b0 + t * b1;
        }
        set.w_tilde.push_back(wt);
        set.grad_w_tilde.push_back(gradient(wt));
    }
    return set;
}

std::string cache_key(const CoefficientSpec& spec, int cell_res, int R, int box_res,
                      CorrectorMethod method) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "|cell=%d|R=%d|box=%d|m=%d", cell_res, R, box_res,
                  int(method));
    std::uint64_t h = fnv1a64(spec.canonical_json() + buf);
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace

CorrectorSet build_corrector_set(const CoefficientSpec& spec, int cell_resolution,
                                 int truncation_radius, int box_resolution,
                                 const SolverOptions& opts, CorrectorMethod method,
                                 const std::string& cache_dir) {
    spec.validate();
    namespace fs = std::filesystem;
    std::string key;
    if (!cache_dir.empty()) {
        key = cache_key(spec, cell_resolution, truncation_radius, box_resolution, method);
        fs::create_directories(cache_dir);
        bool complete = true;
        for (int j = 0; j < spec.dim && complete; ++j) {
            complete = fs::exists(cache_dir + "/" + key + "_wper" + std::to_string(j) + ".hdf1");
            if (spec.has_defect() && complete)
                complete = fs::exists(cache_dir + "/" + key + "_wtilde" + std::to_string(j) + ".hdf1") &&
                           fs::exists(cache_dir + "/" + key + "_wperbox" + std::to_string(j) + ".hdf1");
        }
        if (complete) {
            CorrectorSet set;
            set.spec = spec;
            set.dim = spec.dim;
            set.cell_resolution = cell_resolution;
            set.box_resolution = box_resolution;
            set.truncation_radius = spec.has_defect() ? truncation_radius : 0.0;
            set.oracle_backed = method == CorrectorMethod::oracle;
            for (int j = 0; j < spec.dim; ++j) {
                set.w_per.push_back(load_field(cache_dir + "/" + key + "_wper" + std::to_string(j) + ".hdf1"));
                set.grad_w_per.push_back(gradient(set.w_per.back()));
                if (spec.has_defect()) {
                    set.w_per_box.push_back(
                        load_field(cache_dir + "/" + key + "_wperbox" + std::to_string(j) + ".hdf1"));
                    set.w_tilde.push_back(
                        load_field(cache_dir + "/" + key + "_wtilde" + std::to_string(j) + ".hdf1"));
                    set.grad_w_tilde.push_back(gradient(set.w_tilde.back()));
                } else {
                    set.w_per_box.push_back(set.w_per.back());
                }
            }
            return set;
        }
    }

    CorrectorSet set;
    if (method == CorrectorMethod::oracle) {
        set = oracle_backed_set(spec, cell_resolution, truncation_radius, box_resolution);
    } else {
        set.spec = spec;
        set.dim = spec.dim;
        set.cell_resolution = cell_resolution;
        set.box_resolution = box_resolution;
        set.truncation_radius = spec.has_defect() ? truncation_radius : 0.0;
        for (int j = 0; j < spec.dim; ++j) {
            set.w_per.push_back(solve_periodic_corrector(spec, cell_resolution, j, opts));
            set.grad_w_per.push_back(gradient(set.w_per.back()));
        }
        for (int j = 0; j < spec.dim && spec.has_defect(); ++j) {
            GridField wpb = box_resolution == cell_resolution
                                ? set.w_per[std::size_t(j)]
                                : solve_periodic_corrector(spec, box_resolution, j, opts);
            set.w_per_box.push_back(wpb);
            set.w_tilde.push_back(solve_defect_corrector(spec, wpb, truncation_radius,
                                                         box_resolution, j, opts));
            set.grad_w_tilde.push_back(gradient(set.w_tilde.back()));
        }
        if (!spec.has_defect())
            for (int j = 0; j < spec.dim; ++j) set.w_per_box.push_back(set.w_per[std::size_t(j)]);
    }

    if (!cache_dir.empty()) {
        for (int j = 0; j < spec.dim; ++j) {
            save_field(set.w_per[std::size_t(j)], cache_dir + "/" + key + "_wper" + std::to_string(j) + ".hdf1");
            if (spec.has_defect()) {
                save_field(set.w_per_box[std::size_t(j)],
                           cache_dir + "/" + key + "_wperbox" + std::to_string(j) + ".hdf1");
                save_field(set.w_tilde[std::size_t(j)],
                           cache_dir + "/" + key + "_wtilde" + std::to_string(j) + ".hdf1");
            }
        }
    }
    return set;
}

namespace {

bool inside_box(const GridField& f, const Point& y, int dim) {
    const Grid& g = f.grid;
    for (int k = 0; k < dim; ++k) {
        const double hi = g.origin[k] + (g.n[k] - 1) * g.h[k];
        if (y[k] < g.origin[k] || y[k] > hi) return false;
    }
    return true;
}

}  // namespace

double sample_corrector(const CorrectorSet& set, int j, const Point& y) {
    double v = sample(set.w_per[std::size_t(j)], y);  // periodic sample wraps
    if (set.has_defect() && inside_box(set.w_tilde[std::size_t(j)], y, set.dim))
        v += sample(set.w_tilde[std::size_t(j)], y);
    return v;
}

Point sample_corrector_gradient(const CorrectorSet& set, int j, const Point& y) {
    Point g{0, 0, 0};
    for (int k = 0; k < set.dim; ++k) g[k] = sample(set.grad_w_per[std::size_t(j)], y, k);
    if (set.has_defect() && inside_box(set.w_tilde[std::size_t(j)], y, set.dim))
        for (int k = 0; k < set.dim; ++k) g[k] += sample(set.grad_w_tilde[std::size_t(j)], y, k);
    return g;
}

double oscillation_slope(const std::function<double(const Point&)>& value, int dim,
                         const Point& center, const std::vector<double>& radii,
                         unsigned seed) {
    if (radii.size() < 4) throw InsufficientRadii("need at least 4 radii for the growth fit");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1]) throw InsufficientRadii("radii must be increasing");
    if (radii.back() < 8.0 * radii.front())
        throw InsufficientRadii("radii must span at least a factor 8");

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::pair<double, double>> pts;
    bool degenerate = true;
    for (double rho : radii) {
        double osc = 0.0;
        for (int k = 0; k < dim; ++k) {
            for (double sgn : {-1.0, 1.0}) {
                Point y = center;
                y[k] += sgn * rho;
                osc = std::max(osc, std::abs(value(center) - value(y)));
            }
        }
        for (int t = 0; t < 64; ++t) {
            Point x{0, 0, 0}, dir{0, 0, 0};
            double nn = 0.0;
            for (int k = 0; k < dim; ++k) {
                x[k] = center[k] + rho * unit(rng);
                dir[k] = gauss(rng);
                nn += dir[k] * dir[k];
            }
            nn = std::sqrt(nn);
            if (nn == 0.0) continue;
            Point y = x;
            for (int k = 0; k < dim; ++k) y[k] += rho * dir[k] / nn;
            osc = std::max(osc, std::abs(value(x) - value(y)));
        }
        if (osc > 1e-13) degenerate = false;
        pts.emplace_back(rho, std::max(osc, 1e-300));
    }
    if (degenerate) throw DegenerateOscillation("oscillation at noise floor; no growth exponent");

    // OLS on (log rho, log osc)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(pts.size());
    for (auto& [r, v] : pts) {
        const double lx = std::log(r), ly = std::log(v);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double sublinearity_exponent(const CorrectorSet& set, int j, const std::vector<double>& radii,
                             unsigned seed) {
    auto value = [&](const Point& y) { return sample_corrector(set, j, y); };
    return oscillation_slope(value, set.dim, set.spec.defect.center, radii, seed);
}

}  // namespace homodefect
