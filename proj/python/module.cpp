#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homodefect/oracle1d.hpp"
#include "homodefect/rate_study.hpp"

namespace py = pybind11;
using namespace homodefect;

namespace {

py::array_t<double> field_array(const GridField& f) {
    std::vector<py::ssize_t> shape;
    for (int k = 0; k < f.grid.dim; ++k) shape.push_back(f.grid.n[std::size_t(k)]);
    if (f.components > 1) shape.push_back(f.components);
    py::array_t<double> out(shape);
    std::copy(f.data.begin(), f.data.end(), out.mutable_data());
    return out;
}

py::dict norms_dict(const NormsRecord& n) {
    py::dict d;
    d["l2_R"] = n.l2_R;
    d["l2_diff"] = n.l2_diff;
    d["l2_grad_R_1"] = n.l2_grad_R_1;
    d["linf_grad_R_1"] = n.linf_grad_R_1;
    d["linf_diff"] = n.linf_diff;
    return d;
}

}  // namespace

PYBIND11_MODULE(_homodefect, m) {
    m.doc() = "numerical homogenization with localized coefficient defects";

    py::register_exception<Error>(m, "HomodefectError");

    py::class_<GridField>(m, "GridField")
        .def_property_readonly("array", &field_array)
        .def_property_readonly("dim", [](const GridField& f) { return f.grid.dim; })
        .def_property_readonly("spacing", [](const GridField& f) {
            return std::vector<double>(f.grid.h.begin(), f.grid.h.begin() + f.grid.dim);
        })
        .def_property_readonly("origin", [](const GridField& f) {
            return std::vector<double>(f.grid.origin.begin(),
                                       f.grid.origin.begin() + f.grid.dim);
        })
        .def("sample",
             [](const GridField& f, std::vector<double> x, int component) {
                 Point p{0, 0, 0};
                 for (std::size_t k = 0; k < x.size() && k < 3; ++k) p[k] = x[k];
                 return sample(f, p, component);
             },
             py::arg("x"), py::arg("component") = 0);

    py::class_<CoefficientSpec>(m, "CoefficientSpec")
        .def_static("from_json", &parse_coefficient_spec)
        .def("__call__",
             [](const CoefficientSpec& s, std::vector<double> y) {
                 Point p{0, 0, 0};
                 for (std::size_t k = 0; k < y.size() && k < 3; ++k) p[k] = y[k];
                 return s.eval(p);
             })
        .def_property_readonly("dim", [](const CoefficientSpec& s) { return s.dim; })
        .def_property_readonly("r", [](const CoefficientSpec& s) { return s.r; })
        .def("validate", &CoefficientSpec::validate)
        .def("canonical_json", &CoefficientSpec::canonical_json);

    py::class_<CorrectorSet>(m, "CorrectorSet")
        .def_property_readonly("dim", [](const CorrectorSet& s) { return s.dim; })
        .def_property_readonly("truncation_radius",
                               [](const CorrectorSet& s) { return s.truncation_radius; })
        .def_property_readonly("w_per", [](const CorrectorSet& s) { return s.w_per; })
        .def_property_readonly("w_tilde", [](const CorrectorSet& s) { return s.w_tilde; })
        .def("sample",
             [](const CorrectorSet& s, int j, std::vector<double> y) {
                 Point p{0, 0, 0};
                 for (std::size_t k = 0; k < y.size() && k < 3; ++k) p[k] = y[k];
                 return sample_corrector(s, j, p);
             },
             py::arg("j"), py::arg("y"));

    py::class_<HomogenizedTensor>(m, "HomogenizedTensor")
        .def("__getitem__",
             [](const HomogenizedTensor& t, std::pair<int, int> ik) {
                 return t.at(ik.first, ik.second);
             })
        .def_property_readonly("dim", [](const HomogenizedTensor& t) { return t.dim; })
        .def_property_readonly("asymmetry",
                               [](const HomogenizedTensor& t) { return t.asymmetry; });

    m.def("nu_r", &nu_r, py::arg("dim"), py::arg("r"));
    m.def("exact_astar_1d", &exact_astar_1d);
    m.def(
        "build_correctors",
        [](const CoefficientSpec& spec, int cell_resolution, int truncation_radius,
           int box_resolution, const std::string& cache_dir) {
            return build_corrector_set(spec, cell_resolution, truncation_radius,
                                       box_resolution, SolverOptions{}, CorrectorMethod::fd,
                                       cache_dir);
        },
        py::arg("spec"), py::arg("cell_resolution") = 64, py::arg("truncation_radius") = 0,
        py::arg("box_resolution") = 8, py::arg("cache_dir") = "");
    m.def("homogenized_tensor", [](const CoefficientSpec& spec, const CorrectorSet& set) {
        return homogenized_tensor(spec, set.w_per);
    });
    m.def(
        "sublinearity_exponent",
        [](const CorrectorSet& set, int j, std::vector<double> radii, unsigned seed) {
            return sublinearity_exponent(set, j, radii, seed);
        },
        py::arg("set"), py::arg("j"), py::arg("radii"), py::arg("seed") = 0);
    m.def(
        "solve_two_scale",
        [](const CoefficientSpec& spec, const std::string& source_tag, double L, double eps,
           int nodes_per_eps, int cell_resolution, int box_resolution) {
            SourceSpec f = parse_source(source_tag);
            int R = spec.has_defect() ? int(std::ceil(2.0 * L / eps)) + 2 : 0;
            CorrectorSet set =
                build_corrector_set(spec, cell_resolution, R, box_resolution);
            HomogenizedTensor t = homogenized_tensor(spec, set.w_per);
            int nodes = int(std::lround(2.0 * L * nodes_per_eps / eps)) + 1;
            auto [u_eps, r1] = solve_oscillatory(spec, f, L, eps, nodes);
            auto [u_star, r2] = solve_homogenized(t, f, L, nodes);
            GridField R_eps = assemble_remainder(u_eps, u_star, set, eps);
            Box omega1;
            for (int k = 0; k < spec.dim; ++k) {
                omega1.lo[std::size_t(k)] = -L / 2;
                omega1.hi[std::size_t(k)] = L / 2;
            }
            py::dict out;
            out["u_eps"] = u_eps;
            out["u_star"] = u_star;
            out["remainder"] = R_eps;
            out["norms"] = norms_dict(remainder_norms(R_eps, u_eps, u_star, omega1));
            return out;
        },
        py::arg("spec"), py::arg("source") = "one", py::arg("L") = 1.0, py::arg("eps") = 0.125,
        py::arg("nodes_per_eps") = 16, py::arg("cell_resolution") = 64,
        py::arg("box_resolution") = 8);
    m.def("oracle_remainder_norms",
          [](const CoefficientSpec& spec, double eps, const std::string& source_tag,
             bool periodic_only) {
              return norms_dict(
                  oracle_remainder_norms(spec, eps, parse_source(source_tag), periodic_only));
          },
          py::arg("spec"), py::arg("eps"), py::arg("source") = "one",
          py::arg("periodic_only") = false);
    m.def("load_field", &load_field);
    m.def("save_field", &save_field);
    m.def("fit_slope",
          [](std::vector<std::pair<double, double>> pts, bool log_correction) {
              return fit_slope(pts, log_correction);
          },
          py::arg("points"), py::arg("log_correction") = false);
}
