#include "homodefect/grid_fields.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace homodefect {

Grid make_dirichlet_grid(int dim, const Point& lo, const Point& hi, const std::array<int, 3>& nodes) {
    Grid g;
    g.dim = dim;
    g.bc = BcTag::dirichlet;
    g.origin = lo;
    for (int k = 0; k < 3; ++k) {
        g.n[k] = k < dim ? nodes[k] : 1;
        if (k < dim) {
            if (g.n[k] < 3) throw ConfigError("grid needs at least 3 nodes per axis");
            g.h[k] = (hi[k] - lo[k]) / (g.n[k] - 1);
            if (!(g.h[k] > 0)) throw ConfigError("grid spacing must be positive");
        } else {
            g.h[k] = 1.0;
        }
    }
    return g;
}

Grid make_periodic_cell(int dim, int resolution) {
    if (resolution < 3) throw ConfigError("cell resolution must be >= 3");
    Grid g;
    g.dim = dim;
    g.bc = BcTag::periodic;
    for (int k = 0; k < dim; ++k) {
        g.n[k] = resolution;
        g.h[k] = 1.0 / resolution;
    }
    return g;
}

namespace {

inline int wrap(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
}

// One-axis derivative of component `comp` at node (i,j,k).
double axis_derivative(const GridField& f, int axis, int i, int j, int k, int comp) {
    const Grid& g = f.grid;
    int id[3] = {i, j, k};
    const double inv2h = 0.5 / g.h[axis];
    auto value = [&](int off) {
        int m[3] = {id[0], id[1], id[2]};
        m[axis] += off;
        if (g.bc == BcTag::periodic) m[axis] = wrap(m[axis], g.n[axis]);
        return f.at(g.idx(m[0], m[1], m[2]), comp);
    };
    if (g.bc == BcTag::periodic) return (value(1) - value(-1)) * inv2h;
    const int n = g.n[axis];
    if (id[axis] == 0)
        return (-3.0 * value(0) + 4.0 * value(1) - value(2)) * inv2h;
    if (id[axis] == n - 1)
        return (3.0 * value(0) - 4.0 * value(-1) + value(-2)) * inv2h;
    return (value(1) - value(-1)) * inv2h;
}

}  // namespace

GridField gradient(const GridField& f) {
    const Grid& g = f.grid;
    for (int k = 0; k < g.dim; ++k)
        if (g.n[k] < 3) throw ConfigError("gradient needs >= 3 nodes per axis");
    GridField out(g, g.dim);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k) {
                const std::size_t id = g.idx(i, j, k);
                for (int ax = 0; ax < g.dim; ++ax)
                    out.at(id, ax) = axis_derivative(f, ax, i, j, k, 0);
            }
    assert_finite(out, "gradient");
    return out;
}

namespace {

double magnitude_at(const GridField& f, std::size_t node) {
    if (f.components == 1) return std::abs(f.at(node));
    double s = 0.0;
    for (int c = 0; c < f.components; ++c) s += f.at(node, c) * f.at(node, c);
    return std::sqrt(s);
}

}  // namespace

double norm(const GridField& f, double p, const std::optional<Box>& subdomain) {
    const Grid& g = f.grid;
    const bool per = g.bc == BcTag::periodic;
    int cells[3] = {1, 1, 1};
    for (int k = 0; k < g.dim; ++k) cells[k] = per ? g.n[k] : g.n[k] - 1;

    if (p == kInfExponent || std::isinf(p)) {
        double m = -1.0;
        for (int i = 0; i < g.n[0]; ++i)
            for (int j = 0; j < g.n[1]; ++j)
                for (int k = 0; k < g.n[2]; ++k) {
                    if (subdomain && !subdomain->contains(g.coord(i, j, k), g.dim)) continue;
                    m = std::max(m, magnitude_at(f, g.idx(i, j, k)));
                }
        if (m < 0.0) throw EmptySubdomain("no grid node inside subdomain");
        return m;
    }
    if (p < 1.0) throw ConfigError("norm exponent must be >= 1");

    double cellvol = 1.0;
    for (int k = 0; k < g.dim; ++k) cellvol *= g.h[k];

    double acc = 0.0;
    bool any = false;
    const int ncomp = f.components;
    std::vector<double> center(ncomp);
    for (int i = 0; i < cells[0]; ++i)
        for (int j = 0; j < cells[1]; ++j)
            for (int k = 0; k < cells[2]; ++k) {
                Point c = g.coord(i, j, k);
                for (int ax = 0; ax < g.dim; ++ax) c[ax] += 0.5 * g.h[ax];
                if (subdomain && !subdomain->contains(c, g.dim)) continue;
                any = true;
                // cell-center value = average of the 2^d corner nodes
                std::fill(center.begin(), center.end(), 0.0);
                const int corners = 1 << g.dim;
                for (int m = 0; m < corners; ++m) {
                    int ii = i + (m & 1);
                    int jj = g.dim > 1 ? j + ((m >> 1) & 1) : j;
                    int kk = g.dim > 2 ? k + ((m >> 2) & 1) : k;
                    if (per) {
                        ii = wrap(ii, g.n[0]);
                        jj = wrap(jj, g.n[1]);
                        kk = wrap(kk, g.n[2]);
                    }
                    const std::size_t id = g.idx(ii, jj, kk);
                    for (int c2 = 0; c2 < ncomp; ++c2) center[c2] += f.at(id, c2);
                }
                double mag = 0.0;
                for (int c2 = 0; c2 < ncomp; ++c2) {
                    const double v = center[c2] / corners;
                    mag += v * v;
                }
                acc += std::pow(std::sqrt(mag), p) * cellvol;
            }
    if (!any) throw EmptySubdomain("no cell center inside subdomain");
    return std::pow(acc, 1.0 / p);
}

double sample(const GridField& f, const Point& x, int component) {
    const Grid& g = f.grid;
    int base[3] = {0, 0, 0};
    double t[3] = {0, 0, 0};
    for (int ax = 0; ax < g.dim; ++ax) {
        double s = (x[ax] - g.origin[ax]) / g.h[ax];
        if (g.bc == BcTag::periodic) {
            s -= std::floor(s / g.n[ax]) * g.n[ax];
            base[ax] = int(std::floor(s));
            if (base[ax] >= g.n[ax]) base[ax] -= g.n[ax];
        } else {
            const double tol = 1e-12 * (1.0 + std::abs(s));
            if (s < -tol || s > g.n[ax] - 1 + tol)
                throw OutOfDomain("sample point outside grid on axis " + std::to_string(ax) +
                                  " (coordinate " + std::to_string(x[ax]) + ")");
            s = std::min(std::max(s, 0.0), double(g.n[ax] - 1));
            base[ax] = std::min(int(std::floor(s)), g.n[ax] - 2);
        }
        t[ax] = s - base[ax];
    }
    double acc = 0.0;
    const int corners = 1 << g.dim;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        int id[3] = {base[0], base[1], base[2]};
        for (int ax = 0; ax < g.dim; ++ax) {
            const int bit = (m >> ax) & 1;
            w *= bit ? t[ax] : 1.0 - t[ax];
            id[ax] = base[ax] + bit;
            if (g.bc == BcTag::periodic && id[ax] >= g.n[ax]) id[ax] -= g.n[ax];
        }
        acc += w * f.at(g.idx(id[0], id[1], id[2]), component);
    }
    return acc;
}

double field_mean(const GridField& f, int component) {
    double s = 0.0;
    const std::size_t nn = f.grid.nodes();
    for (std::size_t i = 0; i < nn; ++i) s += f.at(i, component);
    return s / double(nn);
}

void subtract_mean(GridField& f) {
    for (int c = 0; c < f.components; ++c) {
        const double m = field_mean(f, c);
        const std::size_t nn = f.grid.nodes();
        for (std::size_t i = 0; i < nn; ++i) f.at(i, c) -= m;
    }
}

void assert_finite(const GridField& f, const char* what) {
    for (double v : f.data)
        if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite field value");
}

static const char kMagic[8] = {'H', 'D', 'F', 'L', 'D', '0', '1', '\0'};

void save_field(const GridField& f, const std::string& path) {
    nlohmann::json meta;
    meta["dim"] = f.grid.dim;
    meta["extents"] = std::vector<int>(f.grid.n.begin(), f.grid.n.begin() + f.grid.dim);
    meta["origin"] = std::vector<double>(f.grid.origin.begin(), f.grid.origin.begin() + f.grid.dim);
    meta["spacing"] = std::vector<double>(f.grid.h.begin(), f.grid.h.begin() + f.grid.dim);
    meta["components"] = f.components;
    meta["bc"] = f.grid.bc == BcTag::periodic ? "periodic" : "dirichlet";
    const std::string blob = meta.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(kMagic, 8);
    const std::uint64_t len = blob.size();
    unsigned char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = (len >> (8 * i)) & 0xff;
    out.write(reinterpret_cast<const char*>(lenbuf), 8);
    out.write(blob.data(), std::streamsize(blob.size()));
    static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);
    out.write(reinterpret_cast<const char*>(f.data.data()),
              std::streamsize(f.data.size() * sizeof(double)));
    if (!out) throw IoError("short write: " + path);
}

GridField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw FormatError("bad magic in field file: " + path);
    unsigned char lenbuf[8];
    in.read(reinterpret_cast<char*>(lenbuf), 8);
    if (!in) throw FormatError("truncated header in field file: " + path);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= std::uint64_t(lenbuf[i]) << (8 * i);
    if (len > (1u << 20)) throw FormatError("unreasonable metadata length in: " + path);
    std::string blob(len, '\0');
    in.read(blob.data(), std::streamsize(len));
    if (!in) throw FormatError("truncated metadata in field file: " + path);

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(blob);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad metadata JSON in " + path + ": " + e.what());
    }
    GridField f;
    try {
        f.grid.dim = meta.at("dim").get<int>();
        if (f.grid.dim < 1 || f.grid.dim > 3) throw FormatError("bad dimension in " + path);
        auto ext = meta.at("extents").get<std::vector<int>>();
        auto org = meta.at("origin").get<std::vector<double>>();
        auto spc = meta.at("spacing").get<std::vector<double>>();
        if (int(ext.size()) != f.grid.dim || int(org.size()) != f.grid.dim ||
            int(spc.size()) != f.grid.dim)
            throw FormatError("dimension mismatch in metadata of " + path);
        for (int k = 0; k < f.grid.dim; ++k) {
            if (ext[k] < 3) throw FormatError("extents below 3 nodes per axis in " + path);
            f.grid.n[k] = ext[k];
            f.grid.origin[k] = org[k];
            f.grid.h[k] = spc[k];
        }
        f.components = meta.at("components").get<int>();
        const std::string bc = meta.at("bc").get<std::string>();
        if (bc == "periodic") f.grid.bc = BcTag::periodic;
        else if (bc == "dirichlet") f.grid.bc = BcTag::dirichlet;
        else throw FormatError("unknown bc tag in " + path);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("incomplete metadata in " + path + ": " + e.what());
    }
    if (f.components < 1) throw FormatError("bad component count in " + path);
    f.data.resize(f.grid.nodes() * f.components);
    in.read(reinterpret_cast<char*>(f.data.data()),
            std::streamsize(f.data.size() * sizeof(double)));
    if (!in) throw FormatError("truncated payload in field file: " + path);
    return f;
}

}  // namespace homodefect
