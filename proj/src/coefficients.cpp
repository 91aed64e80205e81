#include "homodefect/coefficients.hpp"

#include <json.hpp>

namespace homodefect {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double CoefficientSpec::periodic_at(const Point& y) const {
    switch (periodic.kind) {
        case PeriodicKind::constant:
            return periodic.base;
        case PeriodicKind::sin_product: {
            double p = 1.0;
            for (int k = 0; k < dim; ++k) p *= std::sin(kTwoPi * frac(y[k]));
            return periodic.base + periodic.amp * p;
        }
        case PeriodicKind::checkerboard: {
            const double t = std::tanh(periodic.sharpness);
            double p = 1.0;
            for (int k = 0; k < dim; ++k)
                p *= std::tanh(periodic.sharpness * std::sin(kTwoPi * frac(y[k]))) / t;
            return periodic.base + periodic.amp * p;
        }
        case PeriodicKind::laminate: {
            const double t = frac(y[periodic.axis]);
            const double step =
                0.5 * (1.0 + std::tanh(periodic.sharpness * std::sin(kTwoPi * t)) /
                                 std::tanh(periodic.sharpness));
            return periodic.v0 + (periodic.v1 - periodic.v0) * step;
        }
    }
    throw ConfigError("unknown periodic kind");
}

double CoefficientSpec::defect_at(const Point& y) const {
    if (defect.kind == DefectKind::none || defect.amplitude == 0.0) return 0.0;
    Point d{0, 0, 0};
    for (int k = 0; k < dim; ++k) d[k] = y[k] - defect.center[k];
    const double rr = euclid_norm(d, dim);
    switch (defect.kind) {
        case DefectKind::none:
            return 0.0;
        case DefectKind::gaussian:
            return defect.amplitude * std::exp(-(rr * rr) / (defect.width * defect.width));
        case DefectKind::power:
            return defect.amplitude * std::pow(1.0 + rr, -defect.s);
        case DefectKind::bump: {
            const double t = rr / defect.width;
            if (t >= 1.0) return 0.0;
            return defect.amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
        }
    }
    throw ConfigError("unknown defect kind");
}

void CoefficientSpec::validate() const {
    if (dim < 1 || dim > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (!(mu > 0)) throw ConfigError("mu must be positive");
    if (!(r > 1.0) || std::isinf(r)) throw ConfigError("r must lie in (1, inf)");
    if (r == double(dim))
        throw CriticalExponent(
            "r = d is the critical integrability case (corrector boundedness is not "
            "guaranteed there); pick r != d");
    if (defect.kind == DefectKind::power) {
        if (!(defect.s * r > dim))
            throw ConfigError("power-law defect needs s*r > d for L^r integrability");
    }
    if (defect.kind != DefectKind::none && defect.width <= 0.0)
        throw ConfigError("defect width must be positive");
}

std::string CoefficientSpec::canonical_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    switch (periodic.kind) {
        case PeriodicKind::constant:
            j["periodic"] = {{"kind", "constant"}, {"base", periodic.base}};
            break;
        case PeriodicKind::sin_product:
            j["periodic"] = {{"kind", "sin_product"}, {"base", periodic.base}, {"amp", periodic.amp}};
            break;
        case PeriodicKind::checkerboard:
            j["periodic"] = {{"kind", "checkerboard"},
                             {"base", periodic.base},
                             {"amp", periodic.amp},
                             {"sharpness", periodic.sharpness}};
            break;
        case PeriodicKind::laminate:
            j["periodic"] = {{"kind", "laminate"},
                             {"v0", periodic.v0},
                             {"v1", periodic.v1},
                             {"sharpness", periodic.sharpness},
                             {"axis", periodic.axis}};
            break;
    }
    switch (defect.kind) {
        case DefectKind::none:
            j["defect"] = {{"kind", "none"}};
            break;
        case DefectKind::gaussian:
            j["defect"] = {{"kind", "gaussian"},
                           {"amplitude", defect.amplitude},
                           {"center", std::vector<double>(defect.center.begin(), defect.center.begin() + dim)},
                           {"width", defect.width}};
            break;
        case DefectKind::power:
            j["defect"] = {{"kind", "power"},
                           {"amplitude", defect.amplitude},
                           {"center", std::vector<double>(defect.center.begin(), defect.center.begin() + dim)},
                           {"s", defect.s}};
            break;
        case DefectKind::bump:
            j["defect"] = {{"kind", "bump"},
                           {"amplitude", defect.amplitude},
                           {"center", std::vector<double>(defect.center.begin(), defect.center.begin() + dim)},
                           {"width", defect.width}};
            break;
    }
    j["r"] = r;
    j["mu"] = mu;
    j["alpha"] = alpha;
    return j.dump();
}

CoefficientSpec parse_coefficient_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad coefficient JSON: ") + e.what());
    }
    CoefficientSpec spec;
    try {
        spec.dim = j.at("dim").get<int>();
        if (j.contains("period"))
            throw ConfigError("anisotropic/custom periods are not supported; the cell is the unit cube");
        const auto& p = j.at("periodic");
        const std::string pk = p.at("kind").get<std::string>();
        if (pk == "constant") {
            spec.periodic.kind = PeriodicKind::constant;
            spec.periodic.base = p.at("base").get<double>();
        } else if (pk == "sin_product") {
            spec.periodic.kind = PeriodicKind::sin_product;
            spec.periodic.base = p.at("base").get<double>();
            spec.periodic.amp = p.at("amp").get<double>();
        } else if (pk == "checkerboard") {
            spec.periodic.kind = PeriodicKind::checkerboard;
            spec.periodic.base = p.at("base").get<double>();
            spec.periodic.amp = p.at("amp").get<double>();
            spec.periodic.sharpness = p.value("sharpness", 4.0);
        } else if (pk == "laminate") {
            spec.periodic.kind = PeriodicKind::laminate;
            spec.periodic.v0 = p.at("v0").get<double>();
            spec.periodic.v1 = p.at("v1").get<double>();
            spec.periodic.sharpness = p.value("sharpness", 4.0);
            spec.periodic.axis = p.value("axis", 0);
            if (spec.periodic.axis < 0 || spec.periodic.axis >= spec.dim)
                throw ConfigError("laminate axis out of range");
        } else {
            throw ConfigError("unknown periodic kind: " + pk);
        }
        if (j.contains("defect")) {
            const auto& d = j.at("defect");
            const std::string dk = d.at("kind").get<std::string>();
            if (dk == "none") {
                spec.defect.kind = DefectKind::none;
            } else {
                spec.defect.amplitude = d.at("amplitude").get<double>();
                if (d.contains("center")) {
                    auto c = d.at("center").get<std::vector<double>>();
                    for (std::size_t k = 0; k < c.size() && k < 3; ++k) spec.defect.center[k] = c[k];
                }
                if (dk == "gaussian") {
                    spec.defect.kind = DefectKind::gaussian;
                    spec.defect.width = d.at("width").get<double>();
                } else if (dk == "power") {
                    spec.defect.kind = DefectKind::power;
                    spec.defect.s = d.at("s").get<double>();
                } else if (dk == "bump") {
                    spec.defect.kind = DefectKind::bump;
                    spec.defect.width = d.at("width").get<double>();
                } else {
                    throw ConfigError("unknown defect kind: " + dk);
                }
            }
        }
        spec.r = j.at("r").get<double>();
        spec.mu = j.at("mu").get<double>();
        spec.alpha = j.value("alpha", 1.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("incomplete coefficient spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

EllipticityReport validate_ellipticity(const CoefficientSpec& spec, int sample_resolution,
                                       double box_radius) {
    if (sample_resolution < 2) throw ConfigError("sample_resolution must be >= 2");
    const int n = sample_resolution;
    const double lo = -box_radius;
    const double step = 2.0 * box_radius / (n - 1);
    EllipticityReport rep;
    rep.min_per = rep.min_full = std::numeric_limits<double>::infinity();
    rep.max_per = rep.max_full = -std::numeric_limits<double>::infinity();
    const double lb = 1.0 / spec.mu, ub = spec.mu;

    int nk[3] = {1, 1, 1};
    for (int k = 0; k < spec.dim; ++k) nk[k] = n;
    for (int i = 0; i < nk[0]; ++i)
        for (int jj = 0; jj < nk[1]; ++jj)
            for (int kk = 0; kk < nk[2]; ++kk) {
                const Point y{lo + i * step, lo + jj * step, lo + kk * step};
                const double ap = spec.periodic_at(y);
                const double af = ap + spec.defect_at(y);
                rep.min_per = std::min(rep.min_per, ap);
                rep.max_per = std::max(rep.max_per, ap);
                rep.min_full = std::min(rep.min_full, af);
                rep.max_full = std::max(rep.max_full, af);
                if (ap < lb || ap > ub)
                    throw ValidationFailed("a_per leaves [1/mu, mu]", y, ap);
                if (af < lb || af > ub)
                    throw ValidationFailed("a_per + a~ leaves [1/mu, mu]", y, af);
            }
    rep.pass = true;
    return rep;
}

double lr_norm_estimate(const CoefficientSpec& spec, double box_radius, int resolution) {
    if (std::isinf(spec.r)) throw ConfigError("lr_norm_estimate requires finite r");
    const int n = resolution;
    const double step = 2.0 * box_radius / n;
    int nk[3] = {1, 1, 1};
    double cellvol = 1.0;
    for (int k = 0; k < spec.dim; ++k) {
        nk[k] = n;
        cellvol *= step;
    }
    double acc = 0.0;
    for (int i = 0; i < nk[0]; ++i)
        for (int jj = 0; jj < nk[1]; ++jj)
            for (int kk = 0; kk < nk[2]; ++kk) {
                const Point y{-box_radius + (i + 0.5) * step, -box_radius + (jj + 0.5) * step,
                              -box_radius + (kk + 0.5) * step};
                acc += std::pow(std::abs(spec.defect_at(y)), spec.r) * cellvol;
            }
    return std::pow(acc, 1.0 / spec.r);
}

}  // namespace homodefect
