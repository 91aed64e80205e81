// homodefect: numerical homogenization with localized coefficient defects.
//
// Subcommands operate on a JSON config and write results into --out:
//   corrector    solve cell + truncated defect correctors, save fields
//   tensor       homogenized tensor (optionally the defect-invariance probe)
//   potential    antisymmetric potential B with div B = M
//   solve        one two-scale run (u_eps, u_star, remainder, norms)
//   rate-study   eps sweep, slope fits, PASS/FAIL verdicts
//   compare      full vs periodic-only corrector comparison
//   oracle-check 1D quadrature oracle self-consistency
//
// Exit codes: 0 ok, 2 config error, 3 solver/runtime failure, 4 verdict FAIL.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "homodefect/oracle1d.hpp"
#include "homodefect/rate_study.hpp"

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;
using namespace homodefect;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << s;
}

std::string resolve_cache(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("HOMODEFECT_CACHE")) return env;
    return "";
}

struct Common {
    std::string config_path;
    std::string out_dir;
    std::string cache_dir;
    int threads = 1;
    bool allow_large = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "JSON config file")->required();
    cmd->add_option("--out", c.out_dir, "output directory")->required();
    cmd->add_option("--cache-dir", c.cache_dir, "corrector cache directory");
    cmd->add_option("--threads", c.threads, "worker budget (recorded; solves are serial)");
    cmd->add_flag("--allow-large", c.allow_large, "permit large (3D / >4GB) studies");
}

njson parse_json(const std::string& text) {
    try {
        return njson::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
}

CorrectorSet correctors_from_config(const njson& j, const Common& common) {
    CoefficientSpec spec = parse_coefficient_spec(j.at("coefficient").dump());
    int cell_res = j.value("cell_resolution", 64);
    int box_res = j.value("box_resolution", 8);
    int R = j.value("truncation_radius", spec.has_defect() ? 8 : 0);
    return build_corrector_set(spec, cell_res, R, box_res, SolverOptions{},
                               CorrectorMethod::fd, resolve_cache(common.cache_dir));
}

int cmd_corrector(const Common& common) {
    njson j = parse_json(read_text(common.config_path));
    CorrectorSet set = correctors_from_config(j, common);
    fs::create_directories(common.out_dir);
    njson out;
    out["dim"] = set.dim;
    out["cell_resolution"] = set.cell_resolution;
    out["truncation_radius"] = set.truncation_radius;
    for (int d = 0; d < set.dim; ++d) {
        std::string per = "w_per_" + std::to_string(d) + ".hdf1";
        save_field(set.w_per[std::size_t(d)], (fs::path(common.out_dir) / per).string());
        out["files"].push_back(per);
        if (set.has_defect()) {
            std::string til = "w_tilde_" + std::to_string(d) + ".hdf1";
            save_field(set.w_tilde[std::size_t(d)], (fs::path(common.out_dir) / til).string());
            out["files"].push_back(til);
        }
    }
    if (j.contains("sublinearity_radii")) {
        auto radii = j["sublinearity_radii"].get<std::vector<double>>();
        for (int d = 0; d < set.dim; ++d)
            out["sublinearity_exponent"].push_back(
                sublinearity_exponent(set, d, radii, j.value("seed", 0u)));
    }
    write_text(fs::path(common.out_dir) / "corrector.json", out.dump(2) + "\n");
    return 0;
}

int cmd_tensor(const Common& common) {
    njson j = parse_json(read_text(common.config_path));
    CoefficientSpec spec = parse_coefficient_spec(j.at("coefficient").dump());
    int cell_res = j.value("cell_resolution", 64);
    std::vector<GridField> w;
    for (int d = 0; d < spec.dim; ++d)
        w.push_back(solve_periodic_corrector(spec, cell_res, d));
    HomogenizedTensor t = homogenized_tensor(spec, w);
    njson out;
    out["a_star"] = njson::array();
    for (int i = 0; i < spec.dim; ++i) {
        njson row = njson::array();
        for (int k = 0; k < spec.dim; ++k) row.push_back(t.at(i, k));
        out["a_star"].push_back(row);
    }
    out["asymmetry"] = t.asymmetry;
    out["min_rayleigh"] = t.min_rayleigh();
    out["cell_resolution"] = cell_res;
    if (j.contains("probe_radii") && spec.has_defect()) {
        auto radii = j["probe_radii"].get<std::vector<int>>();
        out["defect_invariance_probe"] =
            defect_invariance_probe(spec, radii, j.value("box_resolution", 8));
        out["probe_radii"] = radii;
    }
    write_text(fs::path(common.out_dir) / "tensor.json", out.dump(2) + "\n");
    return 0;
}

int cmd_potential(const Common& common) {
    njson j = parse_json(read_text(common.config_path));
    CorrectorSet set = correctors_from_config(j, common);
    if (set.dim == 1)
        throw ConfigError("potential: trivial in 1D (B is identically zero)");
    HomogenizedTensor t = homogenized_tensor(set.spec, set.w_per);
    PotentialField B = solve_potential(set.spec, set, t);
    fs::create_directories(common.out_dir);
    njson out;
    out["dim"] = B.dim;
    out["div_residual_rel"] = B.div_residual_rel;
    if (!B.B_tilde.empty()) out["div_residual_rel_tilde"] = B.div_residual_rel_tilde;
    for (int k = 0; k < B.dim; ++k) {
        std::string name = "B_per_" + std::to_string(k) + ".hdf1";
        save_field(B.B_per[std::size_t(k)], (fs::path(common.out_dir) / name).string());
        out["files"].push_back(name);
        if (!B.B_tilde.empty()) {
            std::string tn = "B_tilde_" + std::to_string(k) + ".hdf1";
            save_field(B.B_tilde[std::size_t(k)], (fs::path(common.out_dir) / tn).string());
            out["files"].push_back(tn);
        }
    }
    write_text(fs::path(common.out_dir) / "potential.json", out.dump(2) + "\n");
    return 0;
}

int cmd_solve(const Common& common) {
    StudyConfig cfg = parse_study_config(read_text(common.config_path));
    cfg.cache_dir = resolve_cache(!common.cache_dir.empty() ? common.cache_dir : cfg.cache_dir);
    cfg.allow_large = cfg.allow_large || common.allow_large;
    njson j = parse_json(read_text(common.config_path));
    double eps = j.value("single_eps", cfg.eps.front());
    cfg.spec.validate();

    int R = cfg.spec.has_defect()
                ? (cfg.truncation_radius > 0 ? cfg.truncation_radius
                                             : int(std::ceil(2.0 * cfg.L / eps)) + 2)
                : 0;
    CorrectorSet set = build_corrector_set(cfg.spec, cfg.cell_resolution, R,
                                           cfg.box_resolution, SolverOptions{},
                                           CorrectorMethod::fd, cfg.cache_dir);
    HomogenizedTensor t = homogenized_tensor(cfg.spec, set.w_per);
    PotentialField B;
    if (cfg.spec.dim > 1) B = solve_potential(cfg.spec, set, t);
    int nodes = int(std::lround(2.0 * cfg.L * cfg.nodes_per_eps / eps)) + 1;
    auto [u_eps, r1] = solve_oscillatory(cfg.spec, cfg.source, cfg.L, eps, nodes);
    auto [u_star, r2] = solve_homogenized(t, cfg.source, cfg.L, nodes);
    GridField Rf = assemble_remainder(u_eps, u_star, set, eps);
    NormsRecord norms = remainder_norms(Rf, u_eps, u_star, cfg.omega1());
    GridField H = assemble_H(cfg.spec, set, cfg.spec.dim > 1 ? &B : nullptr, u_star, eps);
    double resid = -1.0;
    try {
        resid = residual_identity_check(cfg.spec, Rf, H, eps, cfg.omega1());
    } catch (const NonPositiveValue&) {
        resid = 0.0;
    }

    fs::create_directories(common.out_dir);
    save_field(u_eps, (fs::path(common.out_dir) / "u_eps.hdf1").string());
    save_field(u_star, (fs::path(common.out_dir) / "u_star.hdf1").string());
    save_field(Rf, (fs::path(common.out_dir) / "remainder.hdf1").string());
    njson out;
    out["eps"] = eps;
    out["mode"] = "full";
    out["norms"] = {{"l2_R", norms.l2_R},
                    {"l2_diff", norms.l2_diff},
                    {"l2_grad_R_1", norms.l2_grad_R_1},
                    {"linf_grad_R_1", norms.linf_grad_R_1},
                    {"linf_diff", norms.linf_diff}};
    out["residual_identity"] = resid;
    out["grid"] = {{"h", u_eps.grid.h[0]}, {"n", long(u_eps.grid.nodes())}};
    out["timings"] = {{"oscillatory_seconds", r1.seconds},
                      {"homogenized_seconds", r2.seconds}};
    write_text(fs::path(common.out_dir) / "solve.json", out.dump(2) + "\n");
    return 0;
}

int cmd_rate_study(const Common& common) {
    StudyConfig cfg = parse_study_config(read_text(common.config_path));
    if (!common.cache_dir.empty()) cfg.cache_dir = common.cache_dir;
    cfg.cache_dir = resolve_cache(cfg.cache_dir);
    cfg.allow_large = cfg.allow_large || common.allow_large;
    RateStudyReport rep = run_rate_study(cfg);
    emit_outputs(rep, common.out_dir);
    std::cout << (rep.pass ? "PASS" : "FAIL") << " (see " << common.out_dir
              << "/summary.txt)\n";
    return rep.pass ? 0 : 4;
}

int cmd_compare(const Common& common) {
    StudyConfig cfg = parse_study_config(read_text(common.config_path));
    if (!common.cache_dir.empty()) cfg.cache_dir = common.cache_dir;
    cfg.cache_dir = resolve_cache(cfg.cache_dir);
    cfg.allow_large = cfg.allow_large || common.allow_large;
    CompareReport rep = compare_correctors(cfg);
    emit_outputs(rep, common.out_dir);
    std::cout << rep.verdict << " (see " << common.out_dir << "/summary.txt)\n";
    return rep.verdict == "PASS" ? 0 : 4;
}

int cmd_oracle_check(const Common& common) {
    njson j = parse_json(read_text(common.config_path));
    CoefficientSpec spec = parse_coefficient_spec(j.at("coefficient").dump());
    if (spec.dim != 1) throw ConfigError("oracle-check: 1D only");
    SourceSpec f;
    if (j.contains("source")) {
        const auto& s = j["source"];
        if (s.is_string()) {
            f = parse_source(s.get<std::string>());
        } else {
            f = parse_source(s.value("kind", "one"));
            f.amplitude = s.value("amplitude", 1.0);
            f.width = s.value("width", 0.5);
            if (s.contains("center")) {
                auto ctr = s["center"].get<std::vector<double>>();
                for (std::size_t k = 0; k < ctr.size() && k < 3; ++k) f.center[k] = ctr[k];
            }
        }
    }
    std::vector<double> eps_list = j.value("eps", std::vector<double>{0.25, 0.125});

    njson out;
    out["a_star"] = exact_astar_1d(spec);
    double worst_flux = 0.0, worst_corr = 0.0;
    OracleCorrector1D corr(spec, j.value("ymax", 64.0));
    for (int i = 0; i <= 200; ++i) {
        double y = -60.0 + 0.6 * i;
        double flux = spec.eval(make_point(y)) * (1.0 + corr.w_prime(y));
        worst_corr = std::max(worst_corr, std::abs(flux / corr.astar() - 1.0));
    }
    for (double eps : eps_list) {
        OracleSolution1D sol(spec, eps, f);
        double c = sol.flux_constant();
        for (int i = 1; i < 100; ++i) {
            double x = -1.0 + 0.02 * i;
            double flux = sol.coefficient(x) * sol.du(x) + sol.source_antiderivative(x);
            worst_flux = std::max(worst_flux, std::abs(flux - c) / std::max(1.0, std::abs(c)));
        }
    }
    out["corrector_flux_rel_error"] = worst_corr;
    out["solution_flux_rel_error"] = worst_flux;
    bool ok = worst_corr <= 1e-6 && worst_flux <= 1e-6;
    out["pass"] = ok;
    write_text(fs::path(common.out_dir) / "oracle.json", out.dump(2) + "\n");
    std::cout << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical homogenization with localized defects"};
    app.require_subcommand(1);
    Common common;
    std::string which;
    for (const char* name : {"corrector", "tensor", "potential", "solve", "rate-study",
                             "compare", "oracle-check"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub, common);
        sub->callback([&which, name]() { which = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (which == "corrector") return cmd_corrector(common);
        if (which == "tensor") return cmd_tensor(common);
        if (which == "potential") return cmd_potential(common);
        if (which == "solve") return cmd_solve(common);
        if (which == "rate-study") return cmd_rate_study(common);
        if (which == "compare") return cmd_compare(common);
        if (which == "oracle-check") return cmd_oracle_check(common);
        std::cerr << "unknown subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationFailed& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return 2;
    } catch (const CriticalExponent& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
