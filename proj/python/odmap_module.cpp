#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/dirichlet_lab.hpp"
#include "odmap/errors.hpp"
#include "odmap/flows.hpp"
#include "odmap/generators.hpp"
#include "odmap/io.hpp"
#include "odmap/packing.hpp"

namespace py = pybind11;
using namespace odmap;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

GeneratorSpec make_spec(const std::string& family, int n, const std::string& domain, std::uint64_t seed,
                        double amplitude) {
  GeneratorSpec s;
  s.family = family;
  s.n = n;
  s.seed = seed;
  s.domain = domain_from_string(domain);
  s.amplitude = amplitude;
  return s;
}

Triangulation triangulation_arg(const py::object& t) {
  if (py::isinstance<py::int_>(t)) return hex_triangulation(t.cast<int>());
  return triangulation_from_json(from_py(t));
}

py::dict packing_result(const Json& packing, const PackedMap& pm) {
  py::dict d;
  d["packing"] = to_py(packing);
  d["map"] = pm.map;
  d["certificate"] = to_py(to_json(pm.certificate));
  d["eta"] = pm.eta;
  d["warnings"] = pm.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_odmap, m) {
  m.doc() = "Orthodiagonal maps: generation, validation, discrete harmonic functions and circle packings";

  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<OrthodiagonalMap>(m, "Map")
      .def_static("from_json", [](const py::object& o) { return map_from_json(from_py(o)); })
      .def_static("load", [](const std::string& path) { return map_from_json(read_json_file(path)); })
      .def("to_json", [](const OrthodiagonalMap& map) { return to_py(to_json(map)); })
      .def("save", [](const OrthodiagonalMap& map, const std::string& path) { write_json_file(path, to_json(map)); })
      .def_property_readonly("num_vertices", &OrthodiagonalMap::num_vertices)
      .def_property_readonly("num_faces", &OrthodiagonalMap::num_faces)
      .def("area", &OrthodiagonalMap::area)
      .def("ids", [](const OrthodiagonalMap& map, const std::string& color) {
        std::vector<int> out;
        for (int v = 0; v < map.num_vertices(); ++v) {
          bool primal = map.color(v) == Color::Primal;
          if (color.empty() || (color == "primal") == primal) out.push_back(map.id(v));
        }
        return out;
      }, py::arg("color") = "")
      .def("position", [](const OrthodiagonalMap& map, int id) {
        Point2 p = map.pos(map.index_of(id));
        return std::make_pair(p.x, p.y);
      })
      .def("boundary_primal", [](const OrthodiagonalMap& map) {
        std::vector<int> out;
        for (int v : map.boundary_primal()) out.push_back(map.id(v));
        return out;
      })
      .def("__repr__", [](const OrthodiagonalMap& map) {
        return "<odmap.Map " + std::to_string(map.num_vertices()) + " vertices, " + std::to_string(map.num_faces()) +
               " faces>";
      });

  m.def("families", &generator_families);
  m.def("test_functions", &test_function_names);

  m.def("generate", [](const std::string& family, int n, const std::string& domain, std::uint64_t seed,
                       double amplitude) { return generate(make_spec(family, n, domain, seed, amplitude)); },
        py::arg("family") = "rotated_grid", py::arg("n") = 8, py::arg("domain") = "square", py::arg("seed") = 1,
        py::arg("amplitude") = 0.3);
  m.def("diamond", &diamond_map);

  m.def("validate", [](const OrthodiagonalMap& map, double tol) { return to_py(to_json(validate(map, tol))); },
        py::arg("map"), py::arg("tol") = 1e-9);
  m.def("mesh_size", &mesh_size);
  m.def("martingale_residual", &martingale_residual);

  m.def("solve", [](const OrthodiagonalMap& map, const py::object& g, double rel_tol) {
    SolverOptions opt;
    opt.rel_tol = rel_tol;
    DirichletSolution sol = py::isinstance<py::str>(g)
                                ? solve_dirichlet(map, test_function(g.cast<std::string>()), opt)
                                : solve_dirichlet(map, g.cast<std::map<int, double>>(), opt);
    std::map<int, double> out;
    for (std::size_t i = 0; i < sol.h.size(); ++i) out[map.id(sol.primal.map_vertex[i])] = sol.h[i];
    return out;
  }, py::arg("map"), py::arg("g"), py::arg("rel_tol") = 1e-12);

  m.def("energy_pair", [](const OrthodiagonalMap& map, const std::string& f) {
    auto e = energy_pair_check(map, test_function(f));
    py::dict d;
    d["primal"] = e.primal;
    d["dual"] = e.dual;
    d["integral"] = e.integral;
    d["discrepancy"] = e.discrepancy;
    d["bound"] = e.bound;
    d["holds"] = e.holds();
    return d;
  });
  m.def("energy_convergence", [](const OrthodiagonalMap& map, const std::string& f) {
    auto e = energy_convergence_check(map, test_function(f));
    py::dict d;
    d["lhs"] = e.lhs;
    d["rhs"] = e.rhs;
    d["eps"] = e.eps;
    d["holds"] = e.holds();
    return d;
  });
  m.def("sup_error", [](const OrthodiagonalMap& map, const std::string& domain, const std::string& f) {
    return sup_error(map, domain_from_string(domain), test_function(f));
  }, py::arg("map"), py::arg("domain"), py::arg("f"));

  m.def("sweep", [](const std::string& family, const std::vector<int>& levels, const std::string& g,
                    const std::string& domain, std::uint64_t seed, double amplitude, int threads) {
    auto recs = convergence_sweep(make_spec(family, 0, domain, seed, amplitude), levels, test_function(g), threads);
    return to_py(to_json(recs)["records"]);
  }, py::arg("family"), py::arg("levels"), py::arg("g"), py::arg("domain") = "square", py::arg("seed") = 1,
        py::arg("amplitude") = 0.3, py::arg("threads") = 1);

  m.def("argument_flow", [](const OrthodiagonalMap& map, int x, double r, bool relax) {
    return to_py(to_json(map, argument_flow(map, map.index_of(x), r, relax)));
  }, py::arg("map"), py::arg("x"), py::arg("r"), py::arg("relax") = false);

  m.def("exit_measure", [](const OrthodiagonalMap& map, int start, int arcs) {
    auto c = harmonic_measure_compare(map, map.index_of(start), arcs);
    py::dict d;
    d["exit_arcs"] = c.exit_arcs;
    d["harmonic_arcs"] = c.harmonic_arcs;
    d["tv"] = c.tv;
    return d;
  }, py::arg("map"), py::arg("start"), py::arg("arcs") = 16);

  m.def("pack", [](const py::object& t, std::optional<double> eta, double tol) {
    Triangulation tri = triangulation_arg(t);
    PackOptions opt;
    opt.tol = tol;
    auto p = pack_in_disk(tri, opt);
    return packing_result(to_json(tri, p), orthodiagonal_from_packing(tri, p, eta));
  }, py::arg("triangulation"), py::arg("eta") = py::none(), py::arg("tol") = 1e-12,
        "Pack a triangulation (JSON document, or an int k for the hexagonal patch of radius k) in the unit disk.");

  m.def("double_pack", [](const py::object& h, int outer_face, double tol) {
    PlanarMap3C pm;
    if (py::isinstance<py::str>(h)) {
      std::string name = h.cast<std::string>();
      if (name == "tetrahedron") pm = tetrahedron();
      else if (name == "cube") pm = cube();
      else throw StructuralError("unknown polyhedron '" + name + "'");
    } else {
      int stored = -1;
      pm = planar_map_from_json(from_py(h), &stored);
      if (outer_face < 0) outer_face = stored;
    }
    if (outer_face < 0) outer_face = 0;
    PackOptions opt;
    opt.tol = tol;
    auto dp = double_pack(pm, outer_face, opt);
    return packing_result(to_json(pm, dp), orthodiagonal_from_double_packing(pm, dp));
  }, py::arg("planar_map"), py::arg("outer_face") = -1, py::arg("tol") = 1e-12);
}
