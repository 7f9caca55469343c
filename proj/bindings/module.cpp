#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "sbmrom/embedded.hpp"
#include "sbmrom/errors.hpp"
#include "sbmrom/fom.hpp"
#include "sbmrom/ghost_interp.hpp"
#include "sbmrom/mesh.hpp"
#include "sbmrom/pod.hpp"
#include "sbmrom/rom.hpp"
#include "sbmrom/study.hpp"
#include "sbmrom/workbench.hpp"

namespace py = pybind11;
using namespace sbmrom;

namespace {

py::array_t<double> nodes_array(const TriMesh& mesh) {
    py::array_t<double> out({mesh.n_nodes(), 2});
    auto r = out.mutable_unchecked<2>();
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        r(i, 0) = mesh.node(i).x;
        r(i, 1) = mesh.node(i).y;
    }
    return out;
}

py::array_t<int> elements_array(const TriMesh& mesh) {
    py::array_t<int> out({mesh.n_elements(), 3});
    auto r = out.mutable_unchecked<2>();
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int k = 0; k < 3; ++k) r(e, k) = mesh.element(e)[k];
    return out;
}

StateVector state_from_array(const py::array_t<double>& a) {
    const auto r = a.unchecked<1>();
    StateVector s(static_cast<size_t>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i) s[static_cast<size_t>(i)] = r(i);
    return s;
}

py::array_t<double> state_to_array(const StateVector& s) {
    py::array_t<double> out(static_cast<py::ssize_t>(s.size()));
    auto r = out.mutable_unchecked<1>();
    for (size_t i = 0; i < s.size(); ++i) r(static_cast<py::ssize_t>(i)) = s[i];
    return out;
}

Eigen::MatrixXd states_matrix(const std::vector<StateVector>& states) {
    if (states.empty()) return {};
    Eigen::MatrixXd m(static_cast<Eigen::Index>(states[0].size()),
                      static_cast<Eigen::Index>(states.size()));
    for (size_t k = 0; k < states.size(); ++k)
        m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Eigen::VectorXd>(
            states[k].data(), static_cast<Eigen::Index>(states[k].size()));
    return m;
}

FomConfig config_from_kwargs(double t_end, std::optional<double> dt, double cfl,
                             int n_pmc, int n_freq, double c_vms, double h0,
                             std::pair<double, double> v0, double inflow, double outflow,
                             double g) {
    FomConfig c;
    c.t_end = t_end;
    c.fixed_dt = dt;
    c.cfl = cfl;
    c.n_pmc = n_pmc;
    c.sample_stride = n_freq;
    c.c_vms = c_vms;
    c.h0 = h0;
    c.v0 = {v0.first, v0.second};
    c.boundary.inflow = inflow;
    c.boundary.outflow = outflow;
    c.physics.g = g;
    return c;
}

} // namespace

PYBIND11_MODULE(_sbmrom, m) {
    m.doc() = "Shallow-water shifted-boundary solver with POD-Galerkin reduction";

    py::register_exception<Error>(m, "SbmromError", PyExc_RuntimeError);

    py::class_<TriMesh>(m, "TriMesh")
        .def_property_readonly("n_nodes", &TriMesh::n_nodes)
        .def_property_readonly("n_elements", &TriMesh::n_elements)
        .def_property_readonly("n_boundary_edges", &TriMesh::n_boundary_edges)
        .def_property_readonly("nodes", &nodes_array)
        .def_property_readonly("elements", &elements_array)
        .def("__eq__", [](const TriMesh& a, const TriMesh& b) { return a == b; });

    m.def("generate_channel_mesh", &generate_channel_mesh, py::arg("x0"), py::arg("x1"),
          py::arg("y0"), py::arg("y1"), py::arg("target_edge"));
    m.def("save_mesh", &save_mesh, py::arg("mesh"), py::arg("path"));
    m.def("load_mesh", &load_mesh, py::arg("path"));

    py::class_<CircleGeometry>(m, "CircleGeometry")
        .def(py::init([](double xc, double yc, double radius) {
                 return CircleGeometry{{xc, yc}, radius};
             }),
             py::arg("xc"), py::arg("yc"), py::arg("radius"))
        .def_property_readonly("radius",
                               [](const CircleGeometry& g) { return g.radius; })
        .def_property_readonly("center", [](const CircleGeometry& g) {
            return std::make_pair(g.center.x, g.center.y);
        });

    py::class_<SurrogateDomain>(m, "SurrogateDomain")
        .def_property_readonly("n_active_elements", &SurrogateDomain::n_active_elements)
        .def_property_readonly("n_active_nodes", &SurrogateDomain::n_active_nodes)
        .def_property_readonly("node_active",
                               [](const SurrogateDomain& s) {
                                   py::array_t<bool> out(
                                       static_cast<py::ssize_t>(s.node_active().size()));
                                   auto r = out.mutable_unchecked<1>();
                                   for (size_t i = 0; i < s.node_active().size(); ++i)
                                       r(static_cast<py::ssize_t>(i)) =
                                           s.node_active()[i] != 0;
                                   return out;
                               })
        .def_property_readonly("element_active",
                               [](const SurrogateDomain& s) {
                                   py::array_t<bool> out(static_cast<py::ssize_t>(
                                       s.element_active().size()));
                                   auto r = out.mutable_unchecked<1>();
                                   for (size_t i = 0; i < s.element_active().size(); ++i)
                                       r(static_cast<py::ssize_t>(i)) =
                                           s.element_active()[i] != 0;
                                   return out;
                               })
        .def_property_readonly("n_surrogate_edges", [](const SurrogateDomain& s) {
            return s.surrogate_edges().size();
        });

    m.def("classify", &classify, py::arg("mesh"), py::arg("geometry"));
    m.def("all_active", &SurrogateDomain::all_active, py::arg("mesh"));

    m.def(
        "run_fom",
        [](const TriMesh& mesh, const SurrogateDomain& surrogate, double t_end,
           std::optional<double> dt, double cfl, int n_pmc, int n_freq, double c_vms,
           double h0, std::pair<double, double> v0, double inflow, double outflow,
           double g) {
            const FomConfig c = config_from_kwargs(t_end, dt, cfl, n_pmc, n_freq, c_vms,
                                                   h0, v0, inflow, outflow, g);
            const Trajectory traj = run_fom(mesh, surrogate, c);
            return py::make_tuple(traj.times, states_matrix(traj.states), traj.n_steps);
        },
        py::arg("mesh"), py::arg("surrogate"), py::arg("t_end"),
        py::arg("dt") = std::nullopt, py::arg("cfl") = 0.5, py::arg("n_pmc") = 2,
        py::arg("n_freq") = 1, py::arg("c_vms") = 2.0, py::arg("h0") = 0.2,
        py::arg("v0") = std::make_pair(0.1, 0.0), py::arg("inflow") = -0.02,
        py::arg("outflow") = 0.02, py::arg("g") = 9.81,
        "March the full-order model; returns (times, states, n_steps)");

    m.def(
        "fill_ghost",
        [](const py::array_t<double>& snapshot, const TriMesh& mesh,
           const SurrogateDomain& surrogate) {
            return state_to_array(fill_ghost(state_from_array(snapshot), mesh, surrogate));
        },
        py::arg("snapshot"), py::arg("mesh"), py::arg("surrogate"));

    py::class_<GhostFiller>(m, "GhostFiller")
        .def(py::init([](const TriMesh& mesh, const SurrogateDomain& surrogate) {
                 return GhostFiller(mesh, surrogate);
             }),
             py::arg("mesh"), py::arg("surrogate"), py::keep_alive<1, 2>())
        .def_property_readonly("n_ghost_nodes", &GhostFiller::n_ghost_nodes)
        .def("fill", [](const GhostFiller& f, const py::array_t<double>& snapshot) {
            return state_to_array(f.fill(state_from_array(snapshot)));
        });

    m.def(
        "compute_modes",
        [](const Eigen::MatrixXd& snapshots) {
            const PodBasis basis = compute_modes(snapshots);
            return py::make_tuple(basis.modes, basis.eigenvalues);
        },
        py::arg("snapshots"), "Returns (modes, eigenvalues)");
    m.def("select_modes", &select_modes, py::arg("eigenvalues"), py::arg("mu_pod"));

    m.def(
        "run_rom",
        [](const Eigen::MatrixXd& modes, const TriMesh& mesh,
           std::optional<CircleGeometry> geometry, double t_end, double dt, int n_pmc,
           int n_freq, double c_vms, double h0, std::pair<double, double> v0,
           double inflow, double outflow, double g) {
            const FomConfig c = config_from_kwargs(t_end, dt, 0.5, n_pmc, n_freq,
                                                   c_vms, h0, v0, inflow, outflow, g);
            const RomOperator op =
                build_rom(modes, mesh, geometry ? &*geometry : nullptr, c);
            const RomTrajectory traj = run_rom(op, t_end, dt, n_freq);
            Eigen::MatrixXd coeffs(modes.cols(),
                                   static_cast<Eigen::Index>(traj.coeffs.size()));
            for (size_t k = 0; k < traj.coeffs.size(); ++k)
                coeffs.col(static_cast<Eigen::Index>(k)) = traj.coeffs[k];
            return py::make_tuple(traj.times, states_matrix(traj.states), coeffs,
                                  traj.failed);
        },
        py::arg("modes"), py::arg("mesh"), py::arg("geometry") = std::nullopt,
        py::arg("t_end") = 0.8, py::arg("dt") = 0.002, py::arg("n_pmc") = 2,
        py::arg("n_freq") = 1, py::arg("c_vms") = 2.0, py::arg("h0") = 0.2,
        py::arg("v0") = std::make_pair(0.1, 0.0), py::arg("inflow") = -0.02,
        py::arg("outflow") = 0.02, py::arg("g") = 9.81,
        "March the reduced model; returns (times, states, coeffs, failed)");

    m.def(
        "spacetime_error",
        [](const std::vector<double>& times, const Eigen::MatrixXd& ref,
           const Eigen::MatrixXd& test, const SurrogateDomain& surrogate, int field) {
            std::vector<StateVector> r, t;
            for (Eigen::Index k = 0; k < ref.cols(); ++k) {
                r.emplace_back(ref.col(k).data(), ref.col(k).data() + ref.rows());
                t.emplace_back(test.col(k).data(), test.col(k).data() + test.rows());
            }
            return spacetime_error(times, r, t, surrogate, field);
        },
        py::arg("times"), py::arg("ref"), py::arg("test"), py::arg("surrogate"),
        py::arg("field") = -1);

    m.def(
        "export_vtk",
        [](const TriMesh& mesh, const py::array_t<double>& state,
           const std::filesystem::path& path) {
            export_vtk(mesh, state_from_array(state), path);
        },
        py::arg("mesh"), py::arg("state"), py::arg("path"));
    m.def("save_matrix", &save_matrix, py::arg("matrix"), py::arg("path"));
    m.def("load_matrix", &load_matrix, py::arg("path"));

    m.def(
        "run_study",
        [](const std::string& preset_or_path, std::optional<std::string> out_dir) {
            StudyConfig cfg;
            if (preset_or_path == "test1" || preset_or_path == "test2" ||
                preset_or_path == "test3")
                cfg = make_preset_config(preset_or_path);
            else
                cfg = load_study_config(preset_or_path);
            if (out_dir) cfg.output_dir = *out_dir;
            const ErrorReport report = run_study(cfg);
            py::list rows;
            for (const ErrorRow& r : report.rows) {
                py::dict d;
                d["radius"] = r.param.radius;
                d["xc"] = r.param.xc;
                d["mu_pod"] = r.mu_pod;
                d["model"] = r.model;
                d["err_h"] = r.err[0];
                d["err_hv1"] = r.err[1];
                d["err_hv2"] = r.err[2];
                d["n_modes"] = r.n_modes;
                d["failed"] = r.failed;
                rows.append(d);
            }
            return rows;
        },
        py::arg("preset_or_path"), py::arg("out_dir") = std::nullopt,
        "Run a study from a preset name or a JSON config path");
}
