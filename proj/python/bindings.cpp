#include "beachlab/lab.hpp"
#include "beachlab/dtn.hpp"
#include "beachlab/hydro.hpp"
#include "beachlab/sector.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace beachlab;

namespace {

Eigen::MatrixX2d points(const std::vector<Vec2>& p) {
  Eigen::MatrixX2d m(p.size(), 2);
  for (size_t i = 0; i < p.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = p[i].transpose();
  return m;
}

std::vector<Vec2> vectors(const Eigen::MatrixX2d& m) {
  std::vector<Vec2> v(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m.row(i).transpose();
  return v;
}

py::dict files_to_dict(const lab::Artifacts& files) {
  py::dict d;
  for (const auto& f : files) {
    if (f.name.size() > 4 && f.name.substr(f.name.size() - 4) == ".bin") d[py::str(f.name)] = py::bytes(f.data);
    else d[py::str(f.name)] = py::str(f.data);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Corner-domain water-wave laboratory (native core)";

  static py::exception<LabError> lab_error(m, "LabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const LabError& e) {
      py::set_error(lab_error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  m.def("singular_exponents", [](const std::string& bc, double omega, int count) {
    return singular_exponents(parse_boundary_pair(bc), omega, count);
  }, py::arg("bc"), py::arg("omega"), py::arg("count"));
  m.def("pencil_roots", [](const std::string& bc, double omega, double hi) {
    return pencil_exponents_numeric(OperatorPencil{omega, Mat2::Identity(), parse_boundary_pair(bc)}, 0.0, hi).roots;
  }, py::arg("bc"), py::arg("omega"), py::arg("hi"));
  m.def("regularity_threshold", [](const std::string& bc, double omega) {
    return regularity_threshold(parse_boundary_pair(bc), omega);
  });

  py::class_<CornerDomain>(m, "Domain")
      .def_readonly("kind", &CornerDomain::kind)
      .def_property_readonly("vertices", [](const CornerDomain& d) { return points(d.mesh.vertices); })
      .def_property_readonly("triangles", [](const CornerDomain& d) {
        Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> t(d.mesh.num_triangles(), 3);
        for (int i = 0; i < d.mesh.num_triangles(); ++i)
          for (int k = 0; k < 3; ++k) t(i, k) = d.mesh.triangles[i][k];
        return t;
      })
      .def_readonly("surface_nodes", &CornerDomain::surface_nodes)
      .def_readonly("contact_nodes", &CornerDomain::contact_nodes)
      .def_property_readonly("contact_angles", &CornerDomain::measured_contact_angles)
      .def_property_readonly("area", [](const CornerDomain& d) { return d.mesh.area(); })
      .def("to_json", &domain_to_json);

  m.def("build_box", &build_box, py::arg("width"), py::arg("depth"), py::arg("h"), py::arg("delta") = 0.1);
  m.def("build_beach", [](double omega, double h) { return build_beach(omega, std::nullopt, h); }, py::arg("omega"),
        py::arg("h"));
  m.def("build_sector", &build_sector, py::arg("angle"), py::arg("radius"), py::arg("h"), py::arg("grading") = 1.0);

  m.def("dtn_eigenvalues", [](const CornerDomain& d) { return VecX(DtNOperator(d).eigenvalues()); });
  m.def("taylor_coefficient", [](const CornerDomain& d, const Eigen::MatrixX2d& v, double g) {
    return VecX(solve_pressure(d, vectors(v), g).a);
  }, py::arg("domain"), py::arg("velocity"), py::arg("g") = 9.81);

  m.def("run", [](const std::string& command, const std::string& config) {
    const auto cfg = lab::json::parse(config);
    if (command == "exponents") return files_to_dict(lab::run_exponents(lab::exponents_from_json(cfg)));
    if (command == "solve") return files_to_dict(lab::run_solve(cfg));
    if (command == "convergence") return files_to_dict(lab::run_convergence(cfg));
    if (command == "dtn") return files_to_dict(lab::run_dtn(cfg));
    if (command == "taylor") return files_to_dict(lab::run_taylor(cfg));
    if (command == "energy") return files_to_dict(lab::run_energy(cfg).files);
    if (command == "simulate") return files_to_dict(lab::run_simulate(cfg).files);
    throw LabError(ErrorKind::Config, "unknown command " + command);
  }, py::arg("command"), py::arg("config"), "Run a subcommand on a JSON config string; returns {file name: content}.");
}
