#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "displab/fft.hpp"
#include "displab/harness.hpp"
#include "displab/norms.hpp"
#include "displab/propagator.hpp"
#include "displab/spectral.hpp"
#include "displab/waveops.hpp"

namespace py = pybind11;
using namespace displab;

namespace {

Field3 field_from_array(const Grid3& g, py::array_t<cplx, py::array::c_style> arr,
                        Side side) {
    const auto buf = arr.request();
    if (buf.ndim != 3 || buf.shape[0] != g.n || buf.shape[1] != g.n || buf.shape[2] != g.n)
        throw std::invalid_argument("array shape must be (n, n, n)");
    Field3 f(g, side);
    const cplx* src = static_cast<const cplx*>(buf.ptr);
    std::copy(src, src + g.size(), f.v.begin());
    return f;
}

py::array_t<cplx> field_to_array(const Field3& f) {
    const int n = f.grid.n;
    py::array_t<cplx> out({n, n, n});
    std::copy(f.v.begin(), f.v.end(), static_cast<cplx*>(out.request().ptr));
    return out;
}

Potential potential_from_array(const Grid3& g, py::array_t<double, py::array::c_style> arr) {
    const auto buf = arr.request();
    if (buf.ndim != 3 || buf.shape[0] != g.n || buf.shape[1] != g.n || buf.shape[2] != g.n)
        throw std::invalid_argument("array shape must be (n, n, n)");
    Potential V(g);
    const double* src = static_cast<const double*>(buf.ptr);
    std::copy(src, src + g.size(), V.v.begin());
    return V;
}

py::array_t<double> potential_to_array(const Potential& V) {
    const int n = V.grid.n;
    py::array_t<double> out({n, n, n});
    std::copy(V.v.begin(), V.v.end(), static_cast<double*>(out.request().ptr));
    return out;
}

}  // namespace

PYBIND11_MODULE(_displab, m) {
    m.doc() = "Spectral laboratory for dispersive estimates of Schrodinger evolutions";

    py::class_<Grid3>(m, "Grid3")
        .def_readonly("n", &Grid3::n)
        .def_readonly("extent", &Grid3::extent)
        .def_property_readonly("spacing", &Grid3::spacing)
        .def_property_readonly("freq_spacing", &Grid3::freq_spacing)
        .def("__repr__", [](const Grid3& g) {
            return "Grid3(n=" + std::to_string(g.n) + ", L=" + std::to_string(g.extent) + ")";
        });
    m.def("make_grid", &make_grid, py::arg("n"), py::arg("extent"));

    py::enum_<Side>(m, "Side").value("physical", Side::physical).value("frequency", Side::frequency);

    py::class_<Field3>(m, "Field3")
        .def_readonly("grid", &Field3::grid)
        .def_readonly("side", &Field3::side)
        .def("norm2", &Field3::norm2)
        .def("sup_norm", &Field3::sup_norm)
        .def("to_numpy", &field_to_array);
    m.def("field_from_numpy", &field_from_array, py::arg("grid"), py::arg("values"),
          py::arg("side") = Side::physical);

    py::class_<Potential>(m, "Potential")
        .def_readonly("grid", &Potential::grid)
        .def("sup_norm", &Potential::sup_norm)
        .def("to_numpy", &potential_to_array);
    m.def("potential_from_numpy", &potential_from_array, py::arg("grid"), py::arg("values"));

    m.def("fourier", &fourier);
    m.def("inverse_fourier", &inverse_fourier);

    py::class_<DirectionSet>(m, "DirectionSet")
        .def("__len__", &DirectionSet::size)
        .def("weight_sum", &DirectionSet::weight_sum)
        .def_property_readonly("directions",
                               [](const DirectionSet& d) {
                                   std::vector<std::array<double, 3>> out;
                                   for (const Vec3& v : d.directions)
                                       out.push_back({v.x, v.y, v.z});
                                   return out;
                               })
        .def_readonly("weights", &DirectionSet::weights);
    m.def("sphere_quadrature", &sphere_quadrature, py::arg("order"));

    py::class_<NormReport>(m, "NormReport")
        .def_readonly("norm_id", &NormReport::norm_id)
        .def_readonly("params", &NormReport::params)
        .def_readonly("value", &NormReport::value)
        .def_readonly("tail", &NormReport::tail);
    m.def("dyadic_shell_norm",
          py::overload_cast<const Potential&, double>(&dyadic_shell_norm), py::arg("V"),
          py::arg("sigma"));
    m.def("lorentz_norm", &lorentz_norm, py::arg("f"), py::arg("p"), py::arg("q"));
    m.def(
        "halfspace_truncate",
        [](const Potential& V, std::array<double, 3> w, double t0) {
            return halfspace_truncate(V, {w[0], w[1], w[2]}, t0);
        },
        py::arg("V"), py::arg("omega"), py::arg("t0"));

    m.def("free_evolve", &free_evolve, py::arg("f"), py::arg("t"));
    m.def("apply_hamiltonian", &apply_hamiltonian, py::arg("V"), py::arg("f"));

    py::class_<SpectralData>(m, "SpectralData")
        .def_readonly("eigenvalues", &SpectralData::eigenvalues)
        .def_readonly("residuals", &SpectralData::residuals)
        .def_property_readonly("count", &SpectralData::count);
    m.def(
        "bound_states",
        [](const Potential& V, int k_max) { return bound_states(V, k_max); }, py::arg("V"),
        py::arg("k_max") = 4);
    m.def("project_continuous", &project_continuous);

    py::class_<ResonanceReport>(m, "ResonanceReport")
        .def_readonly("bs_eigenvalues", &ResonanceReport::bs_eigenvalues)
        .def_readonly("distance_to_resonance", &ResonanceReport::distance_to_resonance)
        .def_readonly("resonant", &ResonanceReport::resonant);
    m.def(
        "resonance_test", [](const Potential& V) { return resonance_test(V); }, py::arg("V"));

    py::class_<WaveOpResult>(m, "WaveOpResult")
        .def_readonly("value", &WaveOpResult::value)
        .def_readonly("last_increment", &WaveOpResult::last_increment)
        .def_readonly("T_used", &WaveOpResult::T_used)
        .def_readonly("converged", &WaveOpResult::converged);
    m.def(
        "dynamic_wave_operator",
        [](const Potential& V, const Field3& f, double T_max, double dt) {
            WaveOpOptions o;
            o.T_max = T_max;
            o.dt = dt;
            return dynamic_wave_operator(V, f, o);
        },
        py::arg("V"), py::arg("f"), py::arg("T_max") = 16.0, py::arg("dt") = 0.01);

    py::class_<EstimReport>(m, "EstimReport")
        .def_readonly("ratio", &EstimReport::ratio)
        .def_readonly("total", &EstimReport::total)
        .def_readonly("norm_value", &EstimReport::norm_value)
        .def_readonly("error_estimate", &EstimReport::error_estimate);
    m.def(
        "estim_ratio",
        [](const Potential& V, int order, double t_max, int nt) {
            DirectionSet dirs = sphere_quadrature(order);
            std::vector<double> ts;
            for (int i = 0; i <= nt; ++i) ts.push_back(-t_max + 2 * t_max * i / nt);
            return estim_ratio(V, dirs, ts);
        },
        py::arg("V"), py::arg("order") = 14, py::arg("t_max") = 48.0, py::arg("nt") = 768);

    py::class_<CheckRow>(m, "CheckRow")
        .def_readonly("check", &CheckRow::check)
        .def_readonly("value", &CheckRow::value)
        .def_readonly("error_estimate", &CheckRow::error_estimate)
        .def_readonly("status", &CheckRow::status);
    py::class_<Report>(m, "Report")
        .def_readonly("rows", &Report::rows)
        .def("all_ok", &Report::all_ok);
    m.def("run_scenario_text", [](const std::string& text) {
        return run_scenario(Scenario::parse_text(text));
    });
    m.def("write_report", &write_report, py::arg("report"), py::arg("out_dir"));
}
