#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ventcel/analysis.hpp"
#include "ventcel/error.hpp"
#include "ventcel/fem.hpp"
#include "ventcel/linalg.hpp"
#include "ventcel/mesh.hpp"
#include "ventcel/study.hpp"

namespace py = pybind11;
using namespace ventcel;

namespace {

py::array_t<double> points_array(const std::vector<Vec3>& pts)
{
    py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (int a = 0; a < 3; ++a) {
            m(i, a) = pts[i][a];
        }
    }
    return out;
}

template <std::size_t K>
py::array_t<int> index_array(const std::vector<std::array<int, K>>& cells)
{
    py::array_t<int> out({static_cast<py::ssize_t>(cells.size()), static_cast<py::ssize_t>(K)});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t a = 0; a < K; ++a) {
            m(i, a) = cells[i][a];
        }
    }
    return out;
}

std::vector<Vec3> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    VENTCEL_REQUIRE(a.ndim() == 2 && a.shape(1) == 3, ErrorKind::invalid_argument, "vertices must be (n, 3)");
    auto r = a.unchecked<2>();
    std::vector<Vec3> out(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
    }
    return out;
}

template <std::size_t K>
std::vector<std::array<int, K>> to_cells(const py::array_t<int, py::array::c_style | py::array::forcecast>& a)
{
    VENTCEL_REQUIRE(a.ndim() == 2 && a.shape(1) == static_cast<py::ssize_t>(K), ErrorKind::invalid_argument,
                    "cells must be (m, " + std::to_string(K) + ")");
    auto r = a.unchecked<2>();
    std::vector<std::array<int, K>> out(a.shape(0));
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            out[i][k] = r(i, k);
        }
    }
    return out;
}

// CSR triple; the Python layer wraps it in scipy.sparse when available.
py::tuple csr(const SparseSymMatrix& m)
{
    return py::make_tuple(py::array_t<std::size_t>(m.row_ptr().size(), m.row_ptr().data()),
                          py::array_t<int>(m.cols().size(), m.cols().data()),
                          py::array_t<double>(m.values().size(), m.values().data()), m.size());
}

FESpacePtr space_of(const AnyMesh& mesh, int degree)
{
    return std::visit([degree](const auto& m) { return build_fespace(m, degree); }, mesh);
}

py::dict eigensolve(const AnyMesh& mesh, const std::string& problem, int degree, int nev, std::uint64_t seed)
{
    const EigenProblem p = build_mesh_eigen_problem(mesh, problem, degree);
    LanczosOptions options;
    options.nev = nev;
    options.seed = seed;
    options.max_factor_ratio = kStudyFactorRatio;
    options.normalization = &p.normalization;
    LanczosResult r;
    {
        py::gil_scoped_release release;
        r = lanczos_shift_invert(p.a, p.b, options);
    }
    const std::size_t n = p.space->num_dofs();
    py::array_t<double> vectors({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(r.pairs.size())});
    auto v = vectors.mutable_unchecked<2>();
    std::vector<double> lambda, algebraic, functional;
    for (std::size_t j = 0; j < r.pairs.size(); ++j) {
        lambda.push_back(r.pairs[j].eigenvalue);
        algebraic.push_back(r.pairs[j].algebraic_residual);
        functional.push_back(r.pairs[j].functional_residual);
        for (std::size_t i = 0; i < n; ++i) {
            v(i, j) = r.pairs[j].vector[i];
        }
    }
    py::dict out;
    out["eigenvalues"] = py::array_t<double>(lambda.size(), lambda.data());
    out["eigenvectors"] = vectors;
    out["algebraic_residuals"] = py::array_t<double>(algebraic.size(), algebraic.data());
    out["functional_residuals"] = py::array_t<double>(functional.size(), functional.data());
    out["converged"] = r.converged;
    out["exhausted"] = r.exhausted;
    out["ndof"] = n;
    out["fill_level"] = r.stats.fill_level;
    return out;
}

py::object optional_value(const std::optional<double>& v) { return v ? py::cast(*v) : py::none(); }

py::dict fitted(const FittedOrder& o)
{
    py::dict d;
    d["least_squares"] = optional_value(o.least_squares);
    d["pairwise"] = o.pairwise;
    d["note"] = o.note;
    return d;
}

py::dict study(const std::string& id, int degree, const std::vector<int>& levels, int n, int nev, std::uint64_t seed)
{
    StudyOptions o;
    o.study = id;
    o.degree = degree;
    o.levels = levels;
    o.n = n;
    o.nev = nev;
    o.seed = seed;
    ConvergenceReport report;
    {
        py::gil_scoped_release release;
        report = run_study(o);
    }
    py::list rows;
    for (const LevelResult& r : report.rows) {
        py::dict row;
        row["level"] = r.level;
        row["h"] = r.h;
        row["ndof"] = r.ndof;
        row["e_h1"] = optional_value(r.e_h1);
        row["e_l2"] = optional_value(r.e_l2);
        row["e_lambda"] = optional_value(r.e_lambda);
        row["lambda_h"] = optional_value(r.lambda_h);
        row["eigenvalues"] = r.eigenvalues;
        row["cluster_size"] = r.cluster_size;
        row["max_algebraic_residual"] = r.max_algebraic_residual;
        row["max_functional_residual"] = r.max_functional_residual;
        row["max_cg_residual"] = r.max_cg_residual;
        row["fill_level"] = r.fill_level;
        row["seconds"] = r.seconds;
        row["failure"] = r.failure;
        rows.append(row);
    }
    std::ostringstream csv;
    write_csv_header(csv);
    write_csv_rows(csv, report);
    py::dict out;
    out["study"] = report.study;
    out["degree"] = report.degree;
    out["n"] = report.n;
    out["rows"] = rows;
    out["order_h1"] = fitted(report.order_h1);
    out["order_l2"] = fitted(report.order_l2);
    out["order_lambda"] = fitted(report.order_lambda);
    out["csv"] = csv.str();
    out["table"] = format_order_table(report);
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Lagrange finite elements and shift-invert Lanczos for Ventcel eigenproblems";

    // Messages carry the hyphenated error kind as their prefix.
    py::register_exception<Error>(m, "VentcelError", PyExc_RuntimeError);

    py::class_<VolumeMesh>(m, "VolumeMesh")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& vertices,
                         const py::array_t<int, py::array::c_style | py::array::forcecast>& tets) {
                 return make_volume_mesh(to_points(vertices), to_cells<4>(tets));
             }),
             py::arg("vertices"), py::arg("tets"))
        .def_property_readonly("vertices", [](const VolumeMesh& v) { return points_array(v.vertices); })
        .def_property_readonly("tets", [](const VolumeMesh& v) { return index_array(v.tets); })
        .def_property_readonly("boundary_faces", [](const VolumeMesh& v) {
            std::vector<Tri> f;
            for (const BoundaryFace& b : v.boundary_faces) {
                f.push_back(b.vertices);
            }
            return index_array(f);
        })
        .def("boundary", &extract_boundary)
        .def("__repr__", [](const VolumeMesh& v) {
            return "<VolumeMesh " + std::to_string(v.vertices.size()) + " vertices, " + std::to_string(v.tets.size()) +
                   " tets>";
        });

    py::class_<SurfaceMesh>(m, "SurfaceMesh")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& vertices,
                         const py::array_t<int, py::array::c_style | py::array::forcecast>& triangles) {
                 return make_surface_mesh(to_points(vertices), to_cells<3>(triangles));
             }),
             py::arg("vertices"), py::arg("triangles"))
        .def_property_readonly("vertices", [](const SurfaceMesh& s) { return points_array(s.vertices); })
        .def_property_readonly("triangles", [](const SurfaceMesh& s) { return index_array(s.triangles); })
        .def_readonly("is_closed", &SurfaceMesh::is_closed)
        .def("__repr__", [](const SurfaceMesh& s) {
            return "<SurfaceMesh " + std::to_string(s.vertices.size()) + " vertices, " +
                   std::to_string(s.triangles.size()) + " triangles>";
        });

    m.def("unit_square_mesh", &generate_unit_square_mesh, py::arg("n"));
    m.def("unit_cube_mesh", &generate_unit_cube_mesh, py::arg("n"));
    m.def("sphere_mesh", &generate_sphere_mesh, py::arg("level"));
    m.def("ball_mesh", &generate_ball_mesh, py::arg("level"));
    m.def("read_gmsh", &read_gmsh_file, py::arg("path"));
    m.def("parse_gmsh", [](const std::string& text) { return parse_gmsh_msh(std::string_view(text)); },
          py::arg("text"));
    m.def("format_gmsh", [](const AnyMesh& mesh) {
        std::ostringstream s;
        std::visit([&s](const auto& x) { write_gmsh_msh(s, x); }, mesh);
        return s.str();
    });
    m.def("mesh_size", [](const AnyMesh& mesh) { return std::visit([](const auto& x) { return mesh_size(x); }, mesh); });
    m.def("total_volume", &total_volume);
    m.def("total_area", &total_area);
    m.def("euler_characteristic", &euler_characteristic);
    m.def("check_invariants", [](const AnyMesh& mesh) {
        const MeshCheck c = std::visit([](const auto& x) { return check_invariants(x); }, mesh);
        return py::make_tuple(c.ok, c.failures);
    });

    m.def("num_dofs", [](const AnyMesh& mesh, int degree) { return space_of(mesh, degree)->num_dofs(); },
          py::arg("mesh"), py::arg("degree"));
    m.def(
        "assemble",
        [](const AnyMesh& mesh, int degree) {
            const FESpacePtr s = space_of(mesh, degree);
            py::dict out;
            out["stiffness"] = csr(assemble_stiffness(*s));
            out["mass"] = csr(assemble_mass(*s));
            if (s->is_volume()) {
                out["surface_stiffness"] = csr(assemble_surface_stiffness(*s));
                out["surface_mass"] = csr(assemble_surface_mass(*s));
            }
            out["dof_coords"] = points_array(s->dof_coords());
            return out;
        },
        py::arg("mesh"), py::arg("degree"),
        "CSR triples (indptr, indices, data, n) of the stiffness and mass matrices; volume meshes also get the "
        "boundary-trace forms.");
    m.def("eigensolve", &eigensolve, py::arg("mesh"), py::arg("problem"), py::arg("degree") = 1, py::arg("nev") = 5,
          py::arg("seed") = 0, "Shift-invert Lanczos on the 'ventcel', 'lb_eig' or 'flat_eig' pencil of a mesh.");

    m.def("study_ids", &study_ids);
    m.def("default_levels", &default_levels, py::arg("study"), py::arg("degree"));
    m.def("run_study", &study, py::arg("study"), py::arg("degree") = 1, py::arg("levels") = std::vector<int>{},
          py::arg("n") = 1, py::arg("nev") = 0, py::arg("seed") = 0);
    m.def(
        "convergence_order",
        [](const std::vector<double>& hs, const std::vector<double>& errors) { return convergence_order(hs, errors); },
        py::arg("hs"), py::arg("errors"));
}
