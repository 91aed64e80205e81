#include "homodefect/rate_study.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homodefect/oracle1d.hpp"

namespace homodefect {

namespace {

using njson = nlohmann::ordered_json;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// fixed-width scientific, deterministic across runs
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

double nu_r(int dim, double r) {
    if (!(r > 1.0) || !std::isfinite(r))
        throw ConfigError("nu_r: r must lie in (1, inf)");
    if (r == double(dim))
        throw CriticalExponent("nu_r: r = d is the critical case; boundedness of the "
                               "corrector is not guaranteed there and the exponent is "
                               "not defined by min(1, d/r)");
    return std::min(1.0, double(dim) / r);
}

std::pair<double, double> fit_slope(const std::vector<std::pair<double, double>>& points,
                                    bool log_correction) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& [eps, value] : points) {
        if (!(eps > 0)) throw NonPositiveValue("fit_slope: eps must be positive");
        if (!(value > 0) || !std::isfinite(value))
            throw NonPositiveValue("fit_slope: values must be positive and finite");
        double y = std::log(value);
        if (log_correction) y -= std::log(std::log(2.0 + 1.0 / eps));
        xy.emplace_back(std::log(eps), y);
    }
    if (xy.size() < 4)
        throw InsufficientPoints("fit_slope: need >= 4 points, got " +
                                 std::to_string(xy.size()));
    double n = double(xy.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : xy) {
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (auto& [x, y] : xy) {
        double r = y - slope * x - intercept;
        ss += r * r;
    }
    double stderr_ = xy.size() > 2 ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
    return {slope, stderr_};
}

void StudyConfig::validate() const {
    spec.validate();
    if (L <= 0) throw ConfigError("study: L must be positive");
    if (omega1_margin <= 0 || omega1_margin >= L)
        throw ConfigError("study: omega1_margin must lie in (0, L)");
    if (eps.size() < 4) throw ConfigError("study: need >= 4 eps values for slope fits");
    for (std::size_t i = 0; i + 1 < eps.size(); ++i)
        if (!(eps[i] > eps[i + 1]))
            throw ConfigError("study: eps values must be strictly decreasing");
    if (!(eps.back() > 0)) throw ConfigError("study: eps must be positive");
    if (nodes_per_eps < 16)
        throw ConfigError("study: nodes_per_eps must be >= 16 (h <= eps/16 rule)");
    if (residual_check != "on" && residual_check != "off" && residual_check != "auto")
        throw ConfigError("study: residual_check must be on/off/auto");
    // memory gate before any fine solve
    double n_axis = 2.0 * L * nodes_per_eps / eps.back() + 1.0;
    double bytes = std::pow(n_axis, spec.dim) * 8.0 * 12.0;
    if ((spec.dim == 3 || bytes > 4.0e9) && !allow_large)
        throw ConfigError("study: estimated memory " + fmt(bytes / 1e9) +
                          " GB (dim=" + std::to_string(spec.dim) +
                          "); pass allow_large to proceed");
}

Box StudyConfig::omega1() const {
    Box b;
    for (int k = 0; k < spec.dim; ++k) {
        b.lo[std::size_t(k)] = -L + omega1_margin;
        b.hi[std::size_t(k)] = L - omega1_margin;
    }
    return b;
}

int StudyConfig::auto_truncation_radius() const {
    if (truncation_radius > 0) return truncation_radius;
    return int(std::ceil(2.0 * L / eps.back())) + 2;
}

StudyConfig parse_study_config(const std::string& json_text) {
    njson j;
    try {
        j = njson::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("study config: invalid JSON: ") + e.what());
    }
    StudyConfig c;
    if (!j.contains("coefficient")) throw ConfigError("study config: missing 'coefficient'");
    c.spec = parse_coefficient_spec(j["coefficient"].dump());
    if (j.contains("source")) {
        const auto& s = j["source"];
        if (s.is_string()) {
            c.source = parse_source(s.get<std::string>());
        } else {
            c.source = parse_source(s.value("kind", "one"));
            c.source.amplitude = s.value("amplitude", 1.0);
            c.source.width = s.value("width", 0.5);
            if (s.contains("center")) {
                auto ctr = s["center"].get<std::vector<double>>();
                for (std::size_t k = 0; k < ctr.size() && k < 3; ++k)
                    c.source.center[k] = ctr[k];
            }
        }
    }
    c.L = j.value("L", 1.0);
    c.omega1_margin = j.value("omega1_margin", 0.5);
    if (j.contains("eps")) {
        c.eps = j["eps"].get<std::vector<double>>();
    } else {
        int hi = c.spec.dim >= 2 ? 6 : 8;
        for (int k = 3; k <= hi; ++k) c.eps.push_back(std::pow(2.0, -k));
    }
    c.nodes_per_eps = j.value("nodes_per_eps", 16);
    c.cell_resolution = j.value("cell_resolution", 64);
    c.box_resolution = j.value("box_resolution", 8);
    c.truncation_radius = j.value("truncation_radius", 0);
    c.slope_tolerance = j.value("slope_tolerance", 0.15);
    c.run_periodic_mode = j.value("run_periodic_mode", true);
    c.residual_check = j.value("residual_check", "auto");
    c.seed = j.value("seed", 0u);
    c.cache_dir = j.value("cache_dir", "");
    c.allow_large = j.value("allow_large", false);
    return c;
}

namespace {

struct ChannelDef {
    const char* name;
    bool log_correction;
    bool verdict_channel;  // carries a theorem estimate
    double NormsRecord::*field;
};

const ChannelDef kChannels[] = {
    {"l2_R", false, true, &NormsRecord::l2_R},
    {"l2_diff", false, false, &NormsRecord::l2_diff},
    {"l2_grad_R_1", false, true, &NormsRecord::l2_grad_R_1},
    {"linf_grad_R_1", false, false, &NormsRecord::linf_grad_R_1},
    {"linf_grad_R_1_logcorr", true, true, &NormsRecord::linf_grad_R_1},
    {"linf_diff", false, true, &NormsRecord::linf_diff},
};

std::string study_label(int dim) {
    if (dim == 1) return "1D regime (desk-scale evidence; theorem stated for d >= 3)";
    if (dim == 2) return "outside theorem hypotheses (d=2 excluded)";
    return "d=3";
}

ChannelFit fit_channel(const std::vector<RunRecord>& runs, const ChannelDef& def,
                       const std::string& mode, double nu, double tol) {
    ChannelFit fit;
    fit.channel = def.name;
    fit.mode = mode;
    std::vector<std::pair<double, double>> pts;
    double vmax = 0.0;
    for (const auto& r : runs)
        if (r.mode == mode && r.error.empty()) {
            double v = r.norms.*(def.field);
            vmax = std::max(vmax, v);
            if (v > 0 && std::isfinite(v)) pts.emplace_back(r.eps, v);
        }
    if (vmax <= 1e-9) {
        fit.verdict = "DEGENERATE";
        return fit;
    }
    try {
        auto [s, se] = fit_slope(pts, def.log_correction);
        fit.slope = s;
        fit.stderr_ = se;
    } catch (const Error&) {
        fit.verdict = "DEGENERATE";
        return fit;
    }
    if (!def.verdict_channel || mode != "full")
        fit.verdict = "INFO";
    else
        fit.verdict = fit.slope >= nu - tol ? "PASS" : "FAIL";
    return fit;
}

// one eps, one mode; throws on solver failure (caller records the error)
RunRecord run_single(const StudyConfig& cfg, const CorrectorSet& set,
                     const HomogenizedTensor& astar, const PotentialField* B, double eps,
                     const std::string& mode, bool want_residual) {
    RunRecord rec;
    rec.eps = eps;
    rec.mode = mode;
    double t0 = now_seconds();
    int nodes = int(std::lround(2.0 * cfg.L * cfg.nodes_per_eps / eps)) + 1;
    SolverOptions opts;
    auto [u_eps, rep1] = solve_oscillatory(cfg.spec, cfg.source, cfg.L, eps, nodes, opts);
    auto [u_star, rep2] = solve_homogenized(astar, cfg.source, cfg.L, nodes, opts);
    bool per_only = (mode == "periodic");
    GridField R = assemble_remainder(u_eps, u_star, set, eps, per_only);
    rec.norms = remainder_norms(R, u_eps, u_star, cfg.omega1());
    rec.nodes = long(u_eps.grid.nodes());
    rec.h = u_eps.grid.h[0];
    if (want_residual && !per_only) {
        GridField H = assemble_H(cfg.spec, set, B, u_star, eps, false);
        try {
            rec.residual_identity = residual_identity_check(cfg.spec, R, H, eps, cfg.omega1());
        } catch (const NonPositiveValue&) {
            rec.residual_identity = 0.0;  // degenerate rhs: identity trivially 0 = 0
        }
    }
    rec.seconds = now_seconds() - t0;
    return rec;
}

}  // namespace

RateStudyReport run_rate_study(const StudyConfig& config) {
    double t0 = now_seconds();
    config.validate();
    RateStudyReport rep;
    rep.config = config;
    rep.label = study_label(config.spec.dim);
    rep.nu = config.spec.has_defect() ? nu_r(config.spec.dim, config.spec.r) : 1.0;

    int R_trunc = config.spec.has_defect() ? config.auto_truncation_radius() : 0;
    SolverOptions opts;
    CorrectorSet set = build_corrector_set(config.spec, config.cell_resolution, R_trunc,
                                           config.box_resolution, opts, CorrectorMethod::fd,
                                           config.cache_dir);
    HomogenizedTensor astar = homogenized_tensor(config.spec, set.w_per);
    rep.astar = astar.a;
    rep.astar_asymmetry = astar.asymmetry;
    PotentialField B;
    if (config.spec.dim > 1) B = solve_potential(config.spec, set, astar, opts);

    std::vector<std::string> modes = {"full"};
    if (config.run_periodic_mode) modes.push_back("periodic");
    for (double eps : config.eps)
        for (const auto& mode : modes) {
            long est_nodes = long(std::pow(2.0 * config.L * config.nodes_per_eps / eps + 1,
                                           config.spec.dim));
            bool want_residual =
                config.residual_check == "on" ||
                (config.residual_check == "auto" && est_nodes <= 300000);
            try {
                rep.runs.push_back(run_single(config, set, astar,
                                              config.spec.dim > 1 ? &B : nullptr, eps, mode,
                                              want_residual));
            } catch (const Error& e) {
                RunRecord bad;
                bad.eps = eps;
                bad.mode = mode;
                bad.error = e.what();
                rep.runs.push_back(bad);
            }
        }

    if (config.spec.dim == 1) {
        for (double eps : config.eps)
            for (const auto& mode : modes) {
                RunRecord rec;
                rec.eps = eps;
                rec.mode = mode;
                double ts = now_seconds();
                rec.norms = oracle_remainder_norms(config.spec, eps, config.source,
                                                   mode == "periodic", config.L,
                                                   config.L - config.omega1_margin);
                rec.seconds = now_seconds() - ts;
                rep.oracle_runs.push_back(rec);
            }
    }

    long good = 0;
    for (const auto& r : rep.runs)
        if (r.error.empty() && r.mode == "full") ++good;
    if (good < 4)
        throw NoConvergence("rate study: fewer than 4 eps points survived", good, 0.0);

    for (const auto& def : kChannels)
        for (const auto& mode : modes)
            rep.fits.push_back(fit_channel(rep.runs, def, mode, rep.nu,
                                           config.slope_tolerance));
    for (const auto& f : rep.fits)
        if (f.verdict == "FAIL") rep.pass = false;
    rep.total_seconds = now_seconds() - t0;
    return rep;
}

CompareReport compare_correctors(const StudyConfig& config) {
    if (!config.spec.has_defect())
        throw ConfigError("compare_correctors: spec has no defect part");
    StudyConfig cfg = config;
    cfg.run_periodic_mode = true;
    double t0 = now_seconds();
    RateStudyReport study = run_rate_study(cfg);
    CompareReport rep;
    rep.config = cfg;
    for (double eps : cfg.eps) {
        const RunRecord *full = nullptr, *per = nullptr;
        for (const auto& r : study.runs) {
            if (r.eps != eps || !r.error.empty()) continue;
            if (r.mode == "full") full = &r;
            if (r.mode == "periodic") per = &r;
        }
        if (!full || !per) continue;
        rep.eps.push_back(eps);
        rep.full.push_back(full->norms.linf_grad_R_1);
        rep.per_only.push_back(per->norms.linf_grad_R_1);
        rep.rho.push_back(per->norms.linf_grad_R_1 > 0
                              ? full->norms.linf_grad_R_1 / per->norms.linf_grad_R_1
                              : 1.0);
    }
    if (rep.rho.size() < 4) throw InsufficientPoints("compare: fewer than 4 usable eps");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        pts.emplace_back(rep.eps[i], rep.per_only[i]);
    rep.per_only_slope = fit_slope(pts).first;
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < rep.rho.size(); ++i)
        if (rep.rho[i + 1] > rep.rho[i] * 1.2) monotone = false;
    rep.verdict = (rep.rho.back() <= 0.5 && monotone) ? "PASS" : "FAIL";
    rep.total_seconds = now_seconds() - t0;
    return rep;
}

namespace {

njson norms_json(const NormsRecord& n) {
    njson j;
    j["l2_R"] = n.l2_R;
    j["l2_diff"] = n.l2_diff;
    j["l2_grad_R_1"] = n.l2_grad_R_1;
    j["linf_grad_R_1"] = n.linf_grad_R_1;
    j["linf_diff"] = n.linf_diff;
    for (const auto& [p, v] : n.lp_R) j["lp_R"].push_back({{"p", p}, {"value", v}});
    return j;
}

njson config_json(const StudyConfig& c) {
    njson j;
    j["coefficient"] = njson::parse(c.spec.canonical_json());
    j["source"] = source_tag(c.source);
    j["L"] = c.L;
    j["omega1_margin"] = c.omega1_margin;
    j["eps"] = c.eps;
    j["nodes_per_eps"] = c.nodes_per_eps;
    j["cell_resolution"] = c.cell_resolution;
    j["box_resolution"] = c.box_resolution;
    j["truncation_radius"] = c.truncation_radius;
    j["slope_tolerance"] = c.slope_tolerance;
    j["residual_check"] = c.residual_check;
    j["seed"] = c.seed;
    return j;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
    if (!out) throw IoError("write failed: " + p.string());
}

std::string env_string() {
    std::ostringstream os;
    os << "compiler=" <<
#if defined(__clang__)
        "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
        "gcc " << __GNUC__ << "." << __GNUC_MINOR__;
#else
        "unknown";
#endif
    return os.str();
}

}  // namespace

void emit_outputs(const RateStudyReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    njson j;
    j["kind"] = "rate_study";
    j["label"] = report.label;
    j["config"] = config_json(report.config);
    j["nu_target"] = report.nu;
    njson at = njson::array();
    for (int i = 0; i < report.config.spec.dim; ++i) {
        njson row = njson::array();
        for (int k = 0; k < report.config.spec.dim; ++k)
            row.push_back(report.astar[std::size_t(i)][std::size_t(k)]);
        at.push_back(row);
    }
    j["a_star"] = at;
    j["a_star_asymmetry"] = report.astar_asymmetry;
    j["runs"] = njson::array();
    for (const auto& r : report.runs) {
        njson rr;
        rr["eps"] = r.eps;
        rr["mode"] = r.mode;
        if (!r.error.empty()) {
            rr["error"] = r.error;
        } else {
            rr["norms"] = norms_json(r.norms);
            rr["grid"] = {{"h", r.h}, {"n", r.nodes}};
            if (r.residual_identity >= 0) rr["residual_identity"] = r.residual_identity;
        }
        j["runs"].push_back(rr);
    }
    if (!report.oracle_runs.empty()) {
        j["oracle"] = njson::array();
        for (const auto& r : report.oracle_runs)
            j["oracle"].push_back({{"eps", r.eps}, {"mode", r.mode},
                                   {"norms", norms_json(r.norms)}});
    }
    j["fits"] = njson::array();
    for (const auto& f : report.fits)
        j["fits"].push_back({{"channel", f.channel}, {"mode", f.mode}, {"slope", f.slope},
                             {"stderr", f.stderr_}, {"verdict", f.verdict}});
    j["pass"] = report.pass;
    // wall-clock data quarantined here; everything above is deterministic
    njson timings;
    timings["total_seconds"] = report.total_seconds;
    for (const auto& r : report.runs)
        timings["runs"].push_back({{"eps", r.eps}, {"mode", r.mode}, {"seconds", r.seconds}});
    j["timings"] = timings;
    j["environment"] = env_string();
    write_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n");

    std::ostringstream rates;
    rates << "eps,channel,mode,value\n";
    for (const auto& r : report.runs) {
        if (!r.error.empty()) continue;
        for (const auto& def : kChannels) {
            if (def.log_correction) continue;  // raw channels only in the table
            rates << fmt(r.eps) << "," << def.name << "," << r.mode << ","
                  << fmt(r.norms.*(def.field)) << "\n";
        }
    }
    write_file(fs::path(out_dir) / "rates.csv", rates.str());

    std::ostringstream slopes;
    slopes << "channel,mode,slope,stderr,verdict,nu_target\n";
    for (const auto& f : report.fits)
        slopes << f.channel << "," << f.mode << "," << fmt(f.slope) << "," << fmt(f.stderr_)
               << "," << f.verdict << "," << fmt(report.nu) << "\n";
    write_file(fs::path(out_dir) / "slopes.csv", slopes.str());

    for (const auto& def : kChannels) {
        if (def.log_correction) continue;
        for (const char* mode : {"full", "periodic"}) {
            std::ostringstream dat;
            bool any = false;
            for (const auto& r : report.runs)
                if (r.mode == mode && r.error.empty() && r.norms.*(def.field) > 0) {
                    dat << fmt(std::log10(r.eps)) << " "
                        << fmt(std::log10(r.norms.*(def.field))) << "\n";
                    any = true;
                }
            if (any)
                write_file(fs::path(out_dir) /
                               (std::string(def.name) + "_" + mode + ".dat"),
                           dat.str());
        }
    }

    std::ostringstream sum;
    sum << "rate study: " << report.label << "\n";
    sum << "target exponent nu = " << fmt(report.nu) << "\n";
    for (const auto& f : report.fits)
        sum << "  " << f.channel << " [" << f.mode << "]: slope " << fmt(f.slope) << " +- "
            << fmt(f.stderr_) << "  " << f.verdict << "\n";
    sum << (report.pass ? "PASS" : "FAIL") << "\n";
    write_file(fs::path(out_dir) / "summary.txt", sum.str());
}

void emit_outputs(const CompareReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    njson j;
    j["kind"] = "compare_correctors";
    j["config"] = config_json(report.config);
    j["table"] = njson::array();
    for (std::size_t i = 0; i < report.eps.size(); ++i)
        j["table"].push_back({{"eps", report.eps[i]},
                              {"full", report.full[i]},
                              {"periodic_only", report.per_only[i]},
                              {"rho", report.rho[i]}});
    j["periodic_only_slope"] = report.per_only_slope;
    j["verdict"] = report.verdict;
    j["timings"] = {{"total_seconds", report.total_seconds}};
    j["environment"] = env_string();
    write_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n");

    std::ostringstream csv;
    csv << "eps,full,periodic_only,rho\n";
    for (std::size_t i = 0; i < report.eps.size(); ++i)
        csv << fmt(report.eps[i]) << "," << fmt(report.full[i]) << ","
            << fmt(report.per_only[i]) << "," << fmt(report.rho[i]) << "\n";
    write_file(fs::path(out_dir) / "compare.csv", csv.str());

    std::ostringstream sum;
    sum << "corrector-mode comparison\n";
    for (std::size_t i = 0; i < report.eps.size(); ++i)
        sum << "  eps=" << fmt(report.eps[i]) << "  rho=" << fmt(report.rho[i]) << "\n";
    sum << "periodic-only W1,inf slope: " << fmt(report.per_only_slope) << "\n";
    sum << report.verdict << "\n";
    write_file(fs::path(out_dir) / "summary.txt", sum.str());
}

}  // namespace homodefect
