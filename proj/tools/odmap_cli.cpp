#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "odmap/core_map.hpp"
#include "odmap/dirichlet_lab.hpp"
#include "odmap/errors.hpp"
#include "odmap/flows.hpp"
#include "odmap/generators.hpp"
#include "odmap/io.hpp"
#include "odmap/packing.hpp"

using namespace odmap;

namespace {

constexpr int kOk = 0;
constexpr int kStructural = 1;
constexpr int kFailed = 2;

struct Globals {
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int threads = 1;
};

void emit(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") std::cout << j.dump(2) << "\n";
  else write_json_file(path, j);
}

void diagnostic(int code, const std::string& type, const std::string& message) {
  Json d{{"status", "error"}, {"code", code}, {"type", type}, {"message", message}};
  std::cerr << d.dump() << "\n";
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw StructuralError("cannot parse integer \"" + tok + "\"");
    }
  }
  return out;
}

std::vector<int> indices_of(const OrthodiagonalMap& map, const std::vector<int>& ids) {
  std::vector<int> out;
  for (int id : ids) {
    int v = map.index_of(id);
    if (v < 0) throw StructuralError("unknown vertex id " + std::to_string(id));
    out.push_back(v);
  }
  return out;
}

int report_validation(const OrthodiagonalMap& map, double tol, const std::string& report_path, bool print_if_empty) {
  auto rep = validate(map, tol);
  if (!report_path.empty() || print_if_empty) emit(report_path, to_json(rep));
  if (!rep.pass()) {
    diagnostic(kFailed, "validation", rep.messages.empty() ? "map failed validation" : rep.messages.front());
    return kFailed;
  }
  return kOk;
}

const std::set<std::string> kTriangulationFamilies = {"hex_triangulation", "random_triangulation"};
const std::set<std::string> kPlanarFamilies = {"tetrahedron", "cube", "prism", "wheel", "sphere_hex"};

// ---------------------------------------------------------------- subcommands

struct GenerateArgs {
  std::string family = "rotated_grid", domain = "square", spec, out, report;
  int n = 8;
  int flips = -1;
  double amplitude = 0.3;
};

int run_generate(const GenerateArgs& a, const Globals& g) {
  if (kTriangulationFamilies.count(a.family)) {
    Triangulation t = a.family == "hex_triangulation"
                          ? hex_triangulation(a.n)
                          : random_triangulation(a.n, a.flips >= 0 ? a.flips : (3 * a.n * (a.n + 1) + 1) / 4, g.seed);
    emit(a.out, to_json(t));
    return kOk;
  }
  if (kPlanarFamilies.count(a.family)) {
    PlanarMap3C h = a.family == "tetrahedron" ? tetrahedron()
                    : a.family == "cube"      ? cube()
                    : a.family == "prism"     ? prism(a.n)
                    : a.family == "wheel"     ? wheel(a.n)
                                              : sphere_from_triangulation(hex_triangulation(a.n));
    emit(a.out, to_json(h, h.num_faces() - 1));
    return kOk;
  }
  GeneratorSpec spec;
  if (!a.spec.empty()) {
    spec = generator_spec_from_json(read_json_file(a.spec));
  } else {
    spec.family = a.family;
    spec.n = a.n;
    spec.seed = g.seed;
    spec.domain = domain_from_string(a.domain);
    spec.amplitude = a.amplitude;
  }
  auto map = generate(spec);
  emit(a.out, to_json(map));
  return report_validation(map, g.tol, a.report, false);
}

struct PackArgs {
  std::string in, out, emit_map, svg;
  int outer_face = -1;
  double eta = -1;
  double pack_tol = 1e-12;
};

int finish_packed(const PackedMap& pm, Json& j, const PackArgs& a, const Globals& g) {
  j["certificate"] = to_json(pm.certificate);
  j["tangency_point_residual"] = pm.tangency_point_residual;
  j["eta"] = pm.eta;
  j["warnings"] = pm.warnings;
  for (auto& w : pm.warnings) std::cerr << "warning: " << w << "\n";
  auto rep = validate(pm.map, g.tol);
  j["map_valid"] = rep.pass();
  emit(a.out, j);
  if (!a.emit_map.empty()) write_json_file(a.emit_map, to_json(pm.map));
  if (!rep.pass()) {
    diagnostic(kFailed, "validation", "emitted map failed validation at tol " + std::to_string(g.tol));
    return kFailed;
  }
  if (!pm.certificate.holds()) {
    diagnostic(kFailed, "certificate", "mesh or Hausdorff certificate violated");
    return kFailed;
  }
  return kOk;
}

int run_pack(const PackArgs& a, const Globals& g) {
  auto t = triangulation_from_json(read_json_file(a.in));
  auto p = pack_in_disk(t, {a.pack_tol, 100000});
  auto pm = orthodiagonal_from_packing(t, p, a.eta > 0 ? std::optional<double>(a.eta) : std::nullopt);
  Json j = to_json(t, p);
  if (!a.svg.empty()) write_text_file(a.svg, packing_svg(p.circles, &pm.map));
  return finish_packed(pm, j, a, g);
}

int run_doublepack(const PackArgs& a, const Globals& g) {
  int outer = -1;
  auto h = planar_map_from_json(read_json_file(a.in), &outer);
  if (a.outer_face >= 0) outer = a.outer_face;
  if (outer < 0) outer = h.num_faces() - 1;
  if (outer >= h.num_faces()) throw StructuralError("outer face index out of range");
  if (!is_three_connected(h)) throw StructuralError("planar map is not 3-connected");
  auto dp = double_pack(h, outer, {a.pack_tol, 100000});
  auto pm = orthodiagonal_from_double_packing(h, dp, a.eta > 0 ? std::optional<double>(a.eta) : std::nullopt);
  Json j = to_json(h, dp);
  if (!a.svg.empty()) {
    std::vector<Circle> all;
    for (int v = 0; v < h.num_vertices(); ++v)
      if (dp.vertex_kind[v] != CircleKind::Geodesic) all.push_back(dp.vertex_circles[v]);
    for (int f = 0; f < h.num_faces(); ++f)
      if (dp.face_kind[f] != CircleKind::Geodesic) all.push_back(dp.face_circles[f]);
    write_text_file(a.svg, packing_svg(all, &pm.map));
  }
  return finish_packed(pm, j, a, g);
}

struct SolveArgs {
  std::string map, g, boundary, out;
  double solver_tol = 1e-12;
};

int run_solve(const SolveArgs& a, const Globals&) {
  auto map = map_from_json(read_json_file(a.map));
  SolverOptions opt;
  opt.rel_tol = a.solver_tol;
  DirichletSolution sol;
  Json j{{"format", kFormat}, {"kind", "dirichlet_solution"}};
  if (!a.g.empty()) {
    auto f = test_function(a.g);
    sol = solve_dirichlet(map, f, opt);
    j["g"] = a.g;
    double worst = 0.0;
    for (int x = 0; x < sol.primal.net.num_vertices(); ++x)
      worst = std::max(worst, std::abs(sol.h[x] - f.value(map.pos(sol.primal.map_vertex[x]))));
    j["max_error_vs_g"] = worst;
  } else {
    auto t = read_json_file(a.boundary);
    std::map<int, double> table;
    const Json& vals = t.contains("values") ? t["values"] : t;
    if (vals.is_array()) {
      for (auto& e : vals) table[e.at("id").get<int>()] = e.at("value").get<double>();
    } else if (vals.is_object()) {
      for (auto& [k, v] : vals.items()) table[std::stoi(k)] = v.get<double>();
    } else {
      throw StructuralError("boundary table must be an object id -> value or a list of {id, value}");
    }
    sol = solve_dirichlet(map, table, opt);
  }
  Json vf = vertex_function_json(map, sol.primal, sol.h);
  j["ids"] = vf["ids"];
  j["values"] = vf["values"];
  std::vector<int> boundary_ids;
  for (int x = 0; x < sol.primal.net.num_vertices(); ++x)
    if (sol.boundary[x]) boundary_ids.push_back(map.id(sol.primal.map_vertex[x]));
  j["boundary"] = boundary_ids;
  j["iterations"] = sol.stats.iterations;
  j["harmonic_residual"] = sol.residual;
  emit(a.out, j);
  return kOk;
}

struct FlowArgs {
  std::string map, kind = "argument", out, center = "0,0", sources, sinks;
  int x = std::numeric_limits<int>::min();
  double r = 0, r1 = 0, r2 = 0;
  int m = 32;
  bool relax = false, sample = false;
};

int run_flow(const FlowArgs& a, const Globals& g) {
  auto map = map_from_json(read_json_file(a.map));
  if (a.kind == "argument") {
    if (a.x == std::numeric_limits<int>::min()) throw StructuralError("--x is required for the argument flow");
    int v = map.index_of(a.x);
    if (v < 0) throw StructuralError("unknown vertex id " + std::to_string(a.x));
    auto rep = argument_flow(map, v, a.r, a.relax);
    for (auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    emit(a.out, to_json(map, rep));
    return kOk;
  }
  if (a.kind == "random_path") {
    std::stringstream in(a.center);
    std::string xs, ys;
    std::getline(in, xs, ',');
    std::getline(in, ys, ',');
    Point2 c;
    try {
      c = {std::stod(xs), std::stod(ys)};
    } catch (const std::exception&) {
      throw StructuralError("--center must be x,y");
    }
    auto s = indices_of(map, parse_ints(a.sources));
    auto t = indices_of(map, parse_ints(a.sinks));
    auto rp = random_path_flow(map, c, s, t, a.r1, a.r2, a.m,
                               a.sample ? std::optional<std::uint64_t>(g.seed) : std::nullopt, a.relax);
    Json j = to_json(map, rp.report);
    j["rho"] = rp.rho;
    Json paths = Json::array();
    for (auto& p : rp.paths) {
      std::vector<int> ids;
      for (int v : p.vertices) ids.push_back(map.id(v));
      paths.push_back({{"vertices", ids}, {"faces", p.edges}});
    }
    j["paths"] = std::move(paths);
    emit(a.out, j);
    return kOk;
  }
  throw StructuralError("unknown flow kind \"" + a.kind + "\" (argument | random_path)");
}

struct SweepArgs {
  std::string family = "rotated_grid", levels = "8,16,32,64", g = "x2_minus_y2", domain = "square", out, json;
  double amplitude = 0.3;
};

int run_sweep(const SweepArgs& a, const Globals& gl) {
  GeneratorSpec spec;
  spec.family = a.family;
  spec.seed = gl.seed;
  spec.domain = domain_from_string(a.domain);
  spec.amplitude = a.amplitude;
  auto f = test_function(a.g);
  auto recs = convergence_sweep(spec, parse_ints(a.levels), f, gl.threads);
  bool json_out = a.out.size() > 5 && a.out.substr(a.out.size() - 5) == ".json";
  if (json_out) emit(a.out, to_json(recs));
  else if (a.out.empty() || a.out == "-") std::cout << sweep_csv(recs);
  else write_text_file(a.out, sweep_csv(recs));
  if (!a.json.empty()) emit(a.json, to_json(recs));
  int code = kOk;
  for (auto& r : recs) {
    if (!r.ok()) {
      diagnostic(kFailed, "sweep_level", "n=" + std::to_string(r.n) + ": " + r.error);
      code = kFailed;
    } else if (!r.bounds_hold()) {
      diagnostic(kFailed, "bound", "n=" + std::to_string(r.n) + ": energy bound violated");
      code = kFailed;
    }
  }
  return code;
}

struct ExitArgs {
  std::string map, out;
  int start = std::numeric_limits<int>::min();
  int arcs = 16;
};

int run_exitmeasure(const ExitArgs& a, const Globals&) {
  auto map = map_from_json(read_json_file(a.map));
  int v = -1;
  if (a.start != std::numeric_limits<int>::min()) {
    v = map.index_of(a.start);
    if (v < 0) throw StructuralError("unknown vertex id " + std::to_string(a.start));
  } else {
    double best = INFINITY;
    for (int u : map.interior_primal())
      if (norm(map.pos(u)) < best) best = norm(map.pos(u)), v = u;
    if (v < 0) throw GeometryError("map has no interior primal vertex");
  }
  auto c = harmonic_measure_compare(map, v, a.arcs);
  Json j{{"format", kFormat},         {"kind", "exit_measure"},        {"start", map.id(v)},
         {"start_offset", c.start_offset}, {"arcs", a.arcs},            {"exit_arcs", c.exit_arcs},
         {"harmonic_arcs", c.harmonic_arcs}, {"tv", c.tv}};
  emit(a.out, j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthodiagonal maps: generation, validation, packing, Dirichlet solves, flows, sweeps"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--tol", g.tol, "Validation tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate a map, triangulation or planar map");
  gen->add_option("--family", ga.family,
                  "rotated_grid | rect_nonuniform | perturbed | packed_triangulation | double_packed | "
                  "hex_triangulation | random_triangulation | tetrahedron | cube | prism | wheel | sphere_hex");
  gen->add_option("--n", ga.n, "Level, hexagon size or cycle length");
  gen->add_option("--domain", ga.domain, "square | disk | rectangle:x0,y0,x1,y1 | disk:cx,cy,r | polygon:x,y;...");
  gen->add_option("--amplitude", ga.amplitude, "Perturbation amplitude in [0,1)");
  gen->add_option("--flips", ga.flips, "Edge flips for random_triangulation");
  gen->add_option("--spec", ga.spec, "Generator spec JSON (overrides family options)");
  gen->add_option("-o,--out", ga.out, "Output JSON")->required();
  gen->add_option("--report", ga.report, "Validation report JSON");

  std::string validate_in, validate_out;
  auto* val = app.add_subcommand("validate", "Validate a map JSON");
  val->add_option("map", validate_in, "Map JSON")->required();
  val->add_option("-o,--out", validate_out, "Report JSON (stdout when absent)");

  PackArgs pa;
  auto* pack = app.add_subcommand("pack", "Circle-pack a disk triangulation into the unit disk");
  pack->add_option("--in", pa.in, "Triangulation JSON")->required();
  pack->add_option("-o,--out", pa.out, "Packing JSON")->required();
  pack->add_option("--emit-map", pa.emit_map, "Orthodiagonal map JSON");
  pack->add_option("--eta", pa.eta, "Boundary offset");
  pack->add_option("--svg", pa.svg, "SVG of circles and map");
  pack->add_option("--pack-tol", pa.pack_tol, "Angle-sum tolerance")->check(CLI::PositiveNumber);

  PackArgs da;
  auto* dpack = app.add_subcommand("doublepack", "Double circle packing of a 3-connected planar map");
  dpack->add_option("--in", da.in, "Planar map JSON")->required();
  dpack->add_option("-o,--out", da.out, "Packing JSON")->required();
  dpack->add_option("--outer-face", da.outer_face, "Outer face index");
  dpack->add_option("--emit-map", da.emit_map, "Orthodiagonal map JSON");
  dpack->add_option("--eta", da.eta, "Boundary offset");
  dpack->add_option("--svg", da.svg, "SVG of circles and map");
  dpack->add_option("--pack-tol", da.pack_tol, "Angle-sum tolerance")->check(CLI::PositiveNumber);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Discrete Dirichlet problem on the primal network");
  solve->add_option("--map", sa.map, "Map JSON")->required();
  auto* gopt = solve->add_option("--g", sa.g, "Test function name");
  auto* bopt = solve->add_option("--boundary", sa.boundary, "Boundary table JSON");
  gopt->excludes(bopt);
  solve->add_option("-o,--out", sa.out, "Solution JSON");
  solve->add_option("--solver-tol", sa.solver_tol, "Relative CG tolerance")->check(CLI::PositiveNumber);

  FlowArgs fa;
  auto* flow = app.add_subcommand("flow", "Argument flow or random path flow");
  flow->add_option("--map", fa.map, "Map JSON")->required();
  flow->add_option("--kind", fa.kind, "argument | random_path");
  flow->add_option("--x", fa.x, "Centre vertex id (argument)");
  flow->add_option("--r", fa.r, "Inner radius (argument)");
  flow->add_option("--center", fa.center, "Centre x,y (random_path)");
  flow->add_option("--sources", fa.sources, "Source vertex ids (random_path)");
  flow->add_option("--sinks", fa.sinks, "Sink vertex ids (random_path)");
  flow->add_option("--r1", fa.r1, "Inner radius (random_path)");
  flow->add_option("--r2", fa.r2, "Outer radius (random_path)");
  flow->add_option("--m", fa.m, "Quadrature points (random_path)");
  flow->add_flag("--sample", fa.sample, "Sample radii with --seed instead of midpoints");
  flow->add_flag("--relax", fa.relax, "Allow radii below the hypothesis");
  flow->add_option("-o,--out", fa.out, "Flow report JSON");

  SweepArgs swa;
  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over generator levels");
  sweep->add_option("--family", swa.family, "Generator family");
  sweep->add_option("--levels", swa.levels, "Comma separated levels");
  sweep->add_option("--g", swa.g, "Test function name");
  sweep->add_option("--domain", swa.domain, "Target domain");
  sweep->add_option("--amplitude", swa.amplitude, "Perturbation amplitude");
  sweep->add_option("-o,--out", swa.out, "CSV (or .json) output");
  sweep->add_option("--json", swa.json, "Additional JSON output");

  ExitArgs ea;
  auto* exitm = app.add_subcommand("exitmeasure", "Exit measure of the walk against harmonic measure on the unit disk");
  exitm->add_option("--map", ea.map, "Map JSON")->required();
  exitm->add_option("--start", ea.start, "Start vertex id (default: interior primal vertex nearest 0)");
  exitm->add_option("--arcs", ea.arcs, "Number of equal arcs")->check(CLI::PositiveNumber);
  exitm->add_option("-o,--out", ea.out, "Output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnostic(kStructural, "usage", e.what());
    return kStructural;
  }

  try {
    if (*gen) return run_generate(ga, g);
    if (*val) return report_validation(map_from_json(read_json_file(validate_in)), g.tol, validate_out, true);
    if (*pack) return run_pack(pa, g);
    if (*dpack) return run_doublepack(da, g);
    if (*solve) {
      if (sa.g.empty() && sa.boundary.empty()) throw StructuralError("solve needs --g or --boundary");
      return run_solve(sa, g);
    }
    if (*flow) return run_flow(fa, g);
    if (*sweep) return run_sweep(swa, g);
    if (*exitm) return run_exitmeasure(ea, g);
  } catch (const StructuralError& e) {
    diagnostic(kStructural, "structural", e.what());
    return kStructural;
  } catch (const GeometryError& e) {
    diagnostic(kFailed, "geometry", e.what());
    return kFailed;
  } catch (const ConvergenceError& e) {
    diagnostic(kFailed, "convergence", std::string(e.what()) + " (residual " + std::to_string(e.residual()) + ")");
    return kFailed;
  } catch (const std::invalid_argument& e) {
    diagnostic(kStructural, "argument", e.what());
    return kStructural;
  } catch (const std::exception& e) {
    diagnostic(kStructural, "io", e.what());
    return kStructural;
  }
  return kOk;
}
