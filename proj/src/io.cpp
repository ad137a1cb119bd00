#include "odmap/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

Json header(const std::string& kind) { return Json{{"format", kFormat}, {"kind", kind}}; }

// JSON has no infinity; horocycle and geodesic radii are written as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

const char* kind_name(CircleKind k) {
  switch (k) {
    case CircleKind::Finite: return "finite";
    case CircleKind::Horocycle: return "horocycle";
    case CircleKind::Geodesic: return "geodesic";
    case CircleKind::Outer: return "outer";
  }
  return "finite";
}

Json circle_json(int id, const Circle& c, double h, CircleKind k) {
  return Json{{"id", id}, {"x", c.center.x}, {"y", c.center.y}, {"r", c.radius}, {"h", number_or_null(h)},
              {"type", kind_name(k)}};
}

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.contains(key)) throw StructuralError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw StructuralError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

void check_header(const Json& j, const std::string& kind) {
  if (!j.is_object()) throw StructuralError("expected a JSON object");
  if (j.contains("format") && j["format"] != kFormat) {
    throw StructuralError("unsupported format " + j["format"].dump() + ", expected \"" + kFormat + "\"");
  }
  if (j.contains("kind") && j["kind"] != kind) {
    throw StructuralError("expected kind \"" + kind + "\", found " + j["kind"].dump());
  }
}

// ---------------------------------------------------------------- maps

Json to_json(const OrthodiagonalMap& map) {
  Json j = header("orthodiagonal_map");
  Json verts = Json::array();
  for (auto& v : map.vertices()) {
    verts.push_back({{"id", v.id}, {"x", v.pos.x}, {"y", v.pos.y}, {"color", v.color == Color::Primal ? "primal" : "dual"}});
  }
  Json faces = Json::array();
  for (auto& q : map.faces()) faces.push_back({map.id(q[0]), map.id(q[1]), map.id(q[2]), map.id(q[3])});
  j["vertices"] = std::move(verts);
  j["faces"] = std::move(faces);
  return j;
}

OrthodiagonalMap map_from_json(const Json& j) {
  check_header(j, "orthodiagonal_map");
  auto vs = get_field<Json>(j, "vertices");
  auto fs = get_field<Json>(j, "faces");
  if (!vs.is_array() || !fs.is_array()) throw StructuralError("\"vertices\" and \"faces\" must be arrays");
  std::vector<MapVertex> verts;
  for (auto& v : vs) {
    MapVertex m;
    m.id = get_field<int>(v, "id");
    m.pos = {get_field<double>(v, "x"), get_field<double>(v, "y")};
    auto c = get_field<std::string>(v, "color");
    if (c == "primal") m.color = Color::Primal;
    else if (c == "dual") m.color = Color::Dual;
    else throw StructuralError("vertex " + std::to_string(m.id) + " has unknown color \"" + c + "\"");
    verts.push_back(m);
  }
  std::vector<std::array<int, 4>> faces;
  for (auto& f : fs) {
    if (!f.is_array() || f.size() != 4) throw StructuralError("every face must list exactly 4 vertex ids");
    faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>(), f[3].get<int>()});
  }
  return OrthodiagonalMap(std::move(verts), faces);
}

Json to_json(const ValidationReport& r) {
  Json j = header("validation_report");
  j["pass"] = r.pass();
  j["tol"] = r.tol;
  j["checks"] = {{"colors", r.colors_ok},           {"nondegenerate", r.nondegenerate_ok},
                 {"orthogonality", r.orthogonality_ok}, {"orientation", r.orientation_ok},
                 {"edge_faces", r.edge_faces_ok},   {"boundary", r.boundary_ok},
                 {"connected", r.connected_ok},     {"angle_sum", r.angle_sum_ok}};
  j["worst_orthogonality"] = r.worst_orthogonality;
  j["worst_orthogonality_face"] = r.worst_orthogonality_face;
  j["worst_angle_sum"] = r.worst_angle_sum;
  j["bad_color_faces"] = r.bad_color_faces;
  j["degenerate_faces"] = r.degenerate_faces;
  j["bad_orthogonality_faces"] = r.bad_orthogonality_faces;
  j["bad_orientation_faces"] = r.bad_orientation_faces;
  j["bad_edges"] = r.bad_edges;
  j["bad_angle_vertices"] = r.bad_angle_vertices;
  j["messages"] = r.messages;
  return j;
}

Json to_json(const OrthodiagonalMap& map, const FlowReport& r) {
  Json j = header("flow_report");
  j["strength"] = r.strength;
  j["energy"] = r.energy;
  j["bound_shape"] = r.bound_shape;
  j["ratio"] = r.ratio;
  j["max_node_residual"] = r.max_node_residual;
  Json edges = Json::array();
  for (std::size_t e = 0; e < r.flow.size(); ++e) edges.push_back({{"id", static_cast<int>(e)}, {"value", r.flow[e]}});
  j["edges"] = std::move(edges);
  std::vector<int> src, snk;
  for (int v : r.sources) src.push_back(map.id(v));
  for (int v : r.sinks) snk.push_back(map.id(v));
  j["sources"] = src;
  j["sinks"] = snk;
  j["warnings"] = r.warnings;
  return j;
}

// ---------------------------------------------------------------- triangulations

Json to_json(const Triangulation& t) {
  Json j = header("triangulation");
  j["vertices"] = t.ids();
  Json faces = Json::array();
  for (auto& f : t.faces()) faces.push_back({t.id(f[0]), t.id(f[1]), t.id(f[2])});
  j["faces"] = std::move(faces);
  std::vector<int> b;
  for (int v : t.boundary()) b.push_back(t.id(v));
  j["boundary"] = b;
  return j;
}

Triangulation triangulation_from_json(const Json& j) {
  check_header(j, "triangulation");
  auto ids = get_field<std::vector<int>>(j, "vertices");
  std::vector<std::array<int, 3>> faces;
  for (auto& f : get_field<Json>(j, "faces")) {
    if (!f.is_array() || f.size() != 3) throw StructuralError("every triangulation face must list 3 vertex ids");
    faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
  }
  return Triangulation(std::move(ids), faces);
}

Json to_json(const PlanarMap3C& h, int outer_face) {
  Json j = header("planar_map");
  j["vertices"] = h.ids();
  Json faces = Json::array();
  for (auto& f : h.faces()) {
    Json g = Json::array();
    for (int v : f) g.push_back(h.id(v));
    faces.push_back(g);
  }
  j["faces"] = std::move(faces);
  if (outer_face >= 0) j["outer_face"] = outer_face;
  return j;
}

PlanarMap3C planar_map_from_json(const Json& j, int* outer_face) {
  check_header(j, "planar_map");
  auto ids = get_field<std::vector<int>>(j, "vertices");
  auto faces = get_field<std::vector<std::vector<int>>>(j, "faces");
  PlanarMap3C h(std::move(ids), faces);
  if (outer_face) {
    *outer_face = j.contains("outer_face") ? j["outer_face"].get<int>() : -1;
    if (*outer_face >= h.num_faces()) throw StructuralError("outer_face index out of range");
  }
  return h;
}

Json to_json(const DiskCertificate& c) {
  return Json{{"mesh", c.mesh},
              {"mesh_bound", c.mesh_bound},
              {"hausdorff", c.hausdorff},
              {"hausdorff_bound", c.hausdorff_bound},
              {"center_at_origin", c.center_at_origin},
              {"center_in_inner_disk", c.center_in_inner_disk},
              {"holds", c.holds()}};
}

Json to_json(const Triangulation& t, const CirclePacking& p) {
  Json j = header("circle_packing");
  Json circles = Json::array();
  for (int v = 0; v < t.num_vertices(); ++v) {
    CircleKind k = t.is_boundary(v) ? CircleKind::Horocycle : CircleKind::Finite;
    circles.push_back(circle_json(t.id(v), p.circles[v], p.hyperbolic_radius[v], k));
  }
  j["circles"] = std::move(circles);
  j["center_vertex"] = p.center_vertex >= 0 ? Json(t.id(p.center_vertex)) : Json(nullptr);
  j["iterations"] = p.iterations;
  j["angle_residual"] = p.angle_residual;
  j["tangency_residual"] = p.tangency_residual;
  j["boundary_residual"] = p.boundary_residual;
  j["max_radius"] = p.max_radius;
  j["max_boundary_radius"] = p.max_boundary_radius;
  return j;
}

Json to_json(const PlanarMap3C& h, const DoubleCirclePacking& p) {
  Json j = header("double_circle_packing");
  j["outer_face"] = p.outer_face;
  Json vc = Json::array(), fc = Json::array();
  for (int v = 0; v < h.num_vertices(); ++v) vc.push_back(circle_json(h.id(v), p.vertex_circles[v], p.vertex_h[v], p.vertex_kind[v]));
  for (int f = 0; f < h.num_faces(); ++f) fc.push_back(circle_json(f, p.face_circles[f], p.face_h[f], p.face_kind[f]));
  j["vertex_circles"] = std::move(vc);
  j["face_circles"] = std::move(fc);
  Json eps = Json::array();
  for (auto& e : p.edge_points) {
    eps.push_back({{"u", h.id(e.u)}, {"v", h.id(e.v)}, {"left", e.left}, {"right", e.right}, {"x", e.q.x}, {"y", e.q.y}});
  }
  j["edge_points"] = std::move(eps);
  j["iterations"] = p.iterations;
  j["angle_residual"] = p.angle_residual;
  j["tangency_residual"] = p.tangency_residual;
  j["orthogonality_residual"] = p.orthogonality_residual;
  j["contact_residual"] = p.contact_residual;
  return j;
}

Json vertex_function_json(const OrthodiagonalMap& map, const MapNetwork& mn, const VertexFunction& f) {
  std::vector<int> ids;
  for (int x = 0; x < mn.net.num_vertices(); ++x) ids.push_back(map.id(mn.map_vertex[x]));
  return Json{{"ids", ids}, {"values", f}};
}

// ---------------------------------------------------------------- sweeps

Json to_json(const SweepRecord& r) {
  Json j{{"family", r.family},
         {"n", r.n},
         {"eps", number_or_null(r.eps)},
         {"delta", number_or_null(r.delta)},
         {"sup_error", number_or_null(r.sup_error)},
         {"energy_error", number_or_null(r.energy_error)},
         {"prop52_bound", number_or_null(r.prop52_bound)},
         {"prop51_disc", number_or_null(r.prop51_disc)},
         {"prop51_bound", number_or_null(r.prop51_bound)},
         {"thm1_shape", number_or_null(r.thm1_shape)},
         {"runtime_ms", r.runtime_ms}};
  if (!r.ok()) j["error"] = r.error;
  return j;
}

Json to_json(const std::vector<SweepRecord>& records) {
  Json j = header("sweep");
  j["records"] = Json::array();
  for (auto& r : records) j["records"].push_back(to_json(r));
  return j;
}

// ---------------------------------------------------------------- domains and specs

namespace {

std::vector<double> parse_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, sep)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw StructuralError("cannot parse number \"" + tok + "\"");
    }
  }
  return out;
}

}  // namespace

Domain domain_from_string(const std::string& s) {
  if (s == "square") return Domain::unit_square();
  if (s == "disk") return Domain::unit_disk();
  auto colon = s.find(':');
  std::string head = s.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "rectangle") {
    auto v = parse_numbers(rest, ',');
    if (v.size() != 4) throw StructuralError("rectangle needs x0,y0,x1,y1");
    return Domain::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (head == "disk") {
    auto v = parse_numbers(rest, ',');
    if (v.size() != 3) throw StructuralError("disk needs cx,cy,r");
    return Domain::disk({v[0], v[1]}, v[2]);
  }
  if (head == "polygon") {
    std::vector<Point2> pts;
    std::stringstream in(rest);
    std::string pair;
    while (std::getline(in, pair, ';')) {
      auto v = parse_numbers(pair, ',');
      if (v.size() != 2) throw StructuralError("polygon vertices are x,y pairs separated by ';'");
      pts.push_back({v[0], v[1]});
    }
    return Domain::polygon(std::move(pts));
  }
  throw StructuralError("unknown domain \"" + s + "\"");
}

Json to_json(const Domain& d) {
  switch (d.kind()) {
    case Domain::Kind::Disk:
      return Json{{"kind", "disk"}, {"center", {d.center().x, d.center().y}}, {"radius", d.radius()}};
    case Domain::Kind::Square: {
      double x0, y0, x1, y1;
      d.bounding_box(x0, y0, x1, y1);
      return Json{{"kind", "rectangle"}, {"box", {x0, y0, x1, y1}}};
    }
    case Domain::Kind::Polygon: {
      Json pts = Json::array();
      for (auto& p : d.vertices()) pts.push_back({p.x, p.y});
      return Json{{"kind", "polygon"}, {"vertices", pts}};
    }
  }
  return Json();
}

Domain domain_from_json(const Json& j) {
  if (j.is_string()) return domain_from_string(j.get<std::string>());
  auto kind = get_field<std::string>(j, "kind");
  if (kind == "disk") {
    auto c = get_field<std::vector<double>>(j, "center");
    if (c.size() != 2) throw StructuralError("disk center must have 2 coordinates");
    return Domain::disk({c[0], c[1]}, get_field<double>(j, "radius"));
  }
  if (kind == "rectangle") {
    auto b = get_field<std::vector<double>>(j, "box");
    if (b.size() != 4) throw StructuralError("rectangle box must have 4 numbers");
    return Domain::rectangle(b[0], b[1], b[2], b[3]);
  }
  if (kind == "polygon") {
    std::vector<Point2> pts;
    for (auto& p : get_field<std::vector<std::vector<double>>>(j, "vertices")) {
      if (p.size() != 2) throw StructuralError("polygon vertices must have 2 coordinates");
      pts.push_back({p[0], p[1]});
    }
    return Domain::polygon(std::move(pts));
  }
  throw StructuralError("unknown domain kind \"" + kind + "\"");
}

Json to_json(const GeneratorSpec& s) {
  Json j = header("generator_spec");
  j["family"] = s.family;
  j["n"] = s.n;
  j["seed"] = s.seed;
  j["domain"] = to_json(s.domain);
  j["amplitude"] = s.amplitude;
  j["tol"] = s.tol;
  return j;
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  check_header(j, "generator_spec");
  GeneratorSpec s;
  s.family = get_field<std::string>(j, "family");
  if (j.contains("n")) s.n = get_field<int>(j, "n");
  if (j.contains("seed")) s.seed = get_field<std::uint64_t>(j, "seed");
  if (j.contains("domain")) s.domain = domain_from_json(j["domain"]);
  if (j.contains("amplitude")) s.amplitude = get_field<double>(j, "amplitude");
  if (j.contains("tol")) s.tol = get_field<double>(j, "tol");
  return s;
}

// ---------------------------------------------------------------- files

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw StructuralError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace odmap
