#include "odmap/core_map.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

OrthodiagonalMap::OrthodiagonalMap(std::vector<MapVertex> vertices,
                                   const std::vector<std::array<int, 4>>& faces_by_id)
    : vertices_(std::move(vertices)) {
  for (int i = 0; i < num_vertices(); ++i) {
    if (!index_.emplace(vertices_[i].id, i).second) {
      throw StructuralError("duplicate vertex id " + std::to_string(vertices_[i].id));
    }
  }
  faces_.reserve(faces_by_id.size());
  for (std::size_t f = 0; f < faces_by_id.size(); ++f) {
    Quad q;
    for (int k = 0; k < 4; ++k) {
      auto it = index_.find(faces_by_id[f][k]);
      if (it == index_.end()) {
        throw StructuralError("face " + std::to_string(f) + " references unknown vertex id " +
                              std::to_string(faces_by_id[f][k]));
      }
      q[k] = it->second;
    }
    faces_.push_back(q);
  }
  derive();
}

OrthodiagonalMap OrthodiagonalMap::from_indices(std::vector<MapVertex> vertices, std::vector<Quad> faces) {
  OrthodiagonalMap m;
  m.vertices_ = std::move(vertices);
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (!m.index_.emplace(m.vertices_[i].id, i).second) {
      throw StructuralError("duplicate vertex id " + std::to_string(m.vertices_[i].id));
    }
  }
  for (auto& q : faces) {
    for (int v : q) {
      if (v < 0 || v >= m.num_vertices()) throw StructuralError("face references vertex index out of range");
    }
  }
  m.faces_ = std::move(faces);
  m.derive();
  return m;
}

int OrthodiagonalMap::index_of(int id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw StructuralError("unknown vertex id " + std::to_string(id));
  return it->second;
}

std::vector<Point2> OrthodiagonalMap::face_polygon(int f) const {
  const Quad& q = faces_[f];
  return {pos(q[0]), pos(q[1]), pos(q[2]), pos(q[3])};
}

void OrthodiagonalMap::derive() {
  int n = num_vertices();
  faces_at_.assign(n, {});
  on_boundary_.assign(n, 0);
  edges_.clear();
  walk_.clear();

  std::unordered_map<std::uint64_t, int> edge_index;
  for (int f = 0; f < num_faces(); ++f) {
    const Quad& q = faces_[f];
    for (int k = 0; k < 4; ++k) {
      auto& at = faces_at_[q[k]];
      if (at.empty() || at.back() != f) at.push_back(f);
      int a = q[k], b = q[(k + 1) % 4];
      auto [it, fresh] = edge_index.emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (fresh) edges_.push_back({std::min(a, b), std::max(a, b), {}});
      edges_[it->second].faces.push_back(f);
    }
  }

  // Boundary edges keep the direction they have in their face.
  std::vector<int> succ(n, -1);
  std::vector<int> out_count(n, 0), in_count(n, 0);
  int boundary_edges = 0;
  for (int f = 0; f < num_faces(); ++f) {
    const Quad& q = faces_[f];
    for (int k = 0; k < 4; ++k) {
      int a = q[k], b = q[(k + 1) % 4];
      if (edges_[edge_index[edge_key(a, b)]].faces.size() != 1) continue;
      ++boundary_edges;
      succ[a] = b;
      ++out_count[a];
      ++in_count[b];
      on_boundary_[a] = on_boundary_[b] = 1;
    }
  }
  if (boundary_edges == 0) return;
  for (int v = 0; v < n; ++v) {
    if (on_boundary_[v] && (out_count[v] != 1 || in_count[v] != 1)) return;
  }
  int start = -1;
  for (int v = 0; v < n; ++v) {
    if (on_boundary_[v] && color(v) == Color::Primal) {
      start = v;
      break;
    }
  }
  if (start < 0) return;
  std::vector<int> walk;
  int v = start;
  do {
    walk.push_back(v);
    v = succ[v];
  } while (v != start && static_cast<int>(walk.size()) <= boundary_edges);
  if (v == start && static_cast<int>(walk.size()) == boundary_edges) walk_ = std::move(walk);
}

std::vector<int> OrthodiagonalMap::boundary_primal() const {
  std::vector<int> out;
  for (int v : walk_)
    if (color(v) == Color::Primal) out.push_back(v);
  return out;
}

std::vector<int> OrthodiagonalMap::boundary_dual() const {
  std::vector<int> out;
  for (int v : walk_)
    if (color(v) == Color::Dual) out.push_back(v);
  return out;
}

std::vector<int> OrthodiagonalMap::interior_primal() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (color(v) == Color::Primal && !on_boundary_[v] && !faces_at_[v].empty()) out.push_back(v);
  return out;
}

std::vector<int> OrthodiagonalMap::interior_dual() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (color(v) == Color::Dual && !on_boundary_[v] && !faces_at_[v].empty()) out.push_back(v);
  return out;
}

std::vector<int> OrthodiagonalMap::primal_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (color(v) == Color::Primal) out.push_back(v);
  return out;
}

std::vector<int> OrthodiagonalMap::dual_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (color(v) == Color::Dual) out.push_back(v);
  return out;
}

std::vector<Point2> OrthodiagonalMap::boundary_polygon() const {
  std::vector<Point2> out;
  out.reserve(walk_.size());
  for (int v : walk_) out.push_back(pos(v));
  return out;
}

double OrthodiagonalMap::area() const {
  double s = 0.0;
  for (int f = 0; f < num_faces(); ++f) s += signed_area(face_polygon(f));
  return s;
}

double orthogonality_residual(const OrthodiagonalMap& map, int face) {
  const Quad& q = map.face(face);
  Point2 dv = map.pos(q[2]) - map.pos(q[0]);
  Point2 dw = map.pos(q[3]) - map.pos(q[1]);
  double denom = norm(dv) * norm(dw);
  if (denom == 0.0) return INFINITY;
  return std::abs(dot(dv, dw)) / denom;
}

ValidationReport validate(const OrthodiagonalMap& map, double tol) {
  ValidationReport r;
  r.tol = tol;
  int n = map.num_vertices();

  for (int f = 0; f < map.num_faces(); ++f) {
    const Quad& q = map.face(f);
    if (map.color(q[0]) != Color::Primal || map.color(q[2]) != Color::Primal ||
        map.color(q[1]) != Color::Dual || map.color(q[3]) != Color::Dual) {
      r.colors_ok = false;
      r.bad_color_faces.push_back(f);
    }
    bool degenerate = q[0] == q[2] || q[1] == q[3];
    for (int k = 0; k < 4 && !degenerate; ++k) {
      if (!is_finite(map.pos(q[k])) || map.pos(q[k]) == map.pos(q[(k + 1) % 4])) degenerate = true;
    }
    if (!degenerate && (map.pos(q[0]) == map.pos(q[2]) || map.pos(q[1]) == map.pos(q[3]))) degenerate = true;
    if (degenerate) {
      r.nondegenerate_ok = false;
      r.degenerate_faces.push_back(f);
      continue;
    }
    double orth = orthogonality_residual(map, f);
    if (orth > r.worst_orthogonality) {
      r.worst_orthogonality = orth;
      r.worst_orthogonality_face = f;
    }
    if (orth > tol) {
      r.orthogonality_ok = false;
      r.bad_orthogonality_faces.push_back(f);
    }
    if (signed_area(map.face_polygon(f)) <= 0) {
      r.orientation_ok = false;
      r.bad_orientation_faces.push_back(f);
    }
  }

  // A shared edge must be traversed in opposite directions by its two faces.
  for (const MapEdge& e : map.edges()) {
    bool bad = e.faces.size() > 2;
    if (e.faces.size() == 2) {
      auto dir = [&](int f) {
        const Quad& q = map.face(f);
        for (int k = 0; k < 4; ++k) {
          if (q[k] == e.a && q[(k + 1) % 4] == e.b) return 1;
          if (q[k] == e.b && q[(k + 1) % 4] == e.a) return -1;
        }
        return 0;
      };
      bad = dir(e.faces[0]) * dir(e.faces[1]) != -1;
    }
    if (bad) {
      r.edge_faces_ok = false;
      r.bad_edges.push_back({map.id(e.a), map.id(e.b)});
    }
  }

  if (map.num_faces() == 0 || map.boundary_walk().empty()) {
    r.boundary_ok = false;
    r.messages.push_back("edges bordering exactly one face do not form a single simple closed walk");
  } else {
    const auto& walk = map.boundary_walk();
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (map.color(walk[i]) == map.color(walk[(i + 1) % walk.size()])) {
        r.boundary_ok = false;
        r.messages.push_back("boundary walk does not alternate colors");
        break;
      }
    }
  }

  // Connectivity over vertices that appear in faces; isolated vertices are a failure.
  std::vector<std::vector<int>> adj(n);
  for (const MapEdge& e : map.edges()) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  std::vector<char> seen(n, 0);
  int reached = 0;
  if (n > 0) {
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      ++reached;
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  if (reached != n) {
    r.connected_ok = false;
    r.messages.push_back("graph is not connected (" + std::to_string(n - reached) + " vertices unreachable)");
  }

  // Proper embedding: face angles around every interior vertex close up to 2*pi.
  if (r.nondegenerate_ok && r.colors_ok) {
    for (int v = 0; v < n; ++v) {
      if (map.is_boundary(v) || map.faces_at(v).empty()) continue;
      double total = 0.0;
      for (int f : map.faces_at(v)) {
        const Quad& q = map.face(f);
        auto poly = map.face_polygon(f);
        for (int k = 0; k < 4; ++k)
          if (q[k] == v) total += interior_angle(poly, k);
      }
      double res = std::abs(total - 2 * std::numbers::pi);
      r.worst_angle_sum = std::max(r.worst_angle_sum, res);
      if (res > 1e-6) {
        r.angle_sum_ok = false;
        r.bad_angle_vertices.push_back(map.id(v));
      }
    }
  }

  if (!r.colors_ok) r.messages.push_back(std::to_string(r.bad_color_faces.size()) + " faces with wrong color pattern");
  if (!r.nondegenerate_ok) r.messages.push_back(std::to_string(r.degenerate_faces.size()) + " degenerate faces");
  if (!r.orthogonality_ok)
    r.messages.push_back(std::to_string(r.bad_orthogonality_faces.size()) + " faces fail orthogonality");
  if (!r.orientation_ok)
    r.messages.push_back(std::to_string(r.bad_orientation_faces.size()) + " faces are not counterclockwise");
  if (!r.edge_faces_ok) r.messages.push_back(std::to_string(r.bad_edges.size()) + " edges with inconsistent faces");
  if (!r.angle_sum_ok)
    r.messages.push_back(std::to_string(r.bad_angle_vertices.size()) + " interior vertices with angle sum != 2 pi");
  return r;
}

double mesh_size(const OrthodiagonalMap& map) {
  double best = 0.0;
  for (const MapEdge& e : map.edges()) best = std::max(best, dist(map.pos(e.a), map.pos(e.b)));
  return best;
}

namespace {

MapNetwork color_network(const OrthodiagonalMap& map, Color color) {
  MapNetwork out;
  out.net_vertex.assign(map.num_vertices(), -1);
  for (int v = 0; v < map.num_vertices(); ++v) {
    if (map.color(v) != color) continue;
    out.net_vertex[v] = static_cast<int>(out.map_vertex.size());
    out.map_vertex.push_back(v);
  }
  int a = color == Color::Primal ? 0 : 1;
  std::vector<Edge> edges;
  edges.reserve(map.num_faces());
  for (int f = 0; f < map.num_faces(); ++f) {
    const Quad& q = map.face(f);
    double own = dist(map.pos(q[a]), map.pos(q[a + 2]));
    double other = dist(map.pos(q[1 - a]), map.pos(q[3 - a]));
    if (own == 0.0 || other == 0.0) throw GeometryError("face " + std::to_string(f) + " has a zero-length diagonal");
    edges.push_back({out.net_vertex[q[a]], out.net_vertex[q[a + 2]], other / own});
  }
  out.net = Network(static_cast<int>(out.map_vertex.size()), std::move(edges));
  return out;
}

}  // namespace

double orientation_residual(const OrthodiagonalMap& map) {
  double worst = 0.0;
  for (int f = 0; f < map.num_faces(); ++f) {
    const Quad& q = map.face(f);
    Point2 a = map.pos(q[2]) - map.pos(q[0]), b = map.pos(q[3]) - map.pos(q[1]);
    worst = std::max(worst, norm((1.0 / norm(a)) * rot90(a) - (1.0 / norm(b)) * b));
  }
  return worst;
}

double martingale_residual(const OrthodiagonalMap& map) {
  MapNetwork p = primal_network(map);
  double eps = mesh_size(map);
  std::vector<Point2> drift(p.net.num_vertices());
  for (int e = 0; e < p.net.num_edges(); ++e) {
    const Edge& ed = p.net.edge(e);
    Point2 d = map.pos(p.map_vertex[ed.head]) - map.pos(p.map_vertex[ed.tail]);
    drift[ed.tail] = drift[ed.tail] + ed.c * d;
    drift[ed.head] = drift[ed.head] - ed.c * d;
  }
  double worst = 0.0;
  for (int v : map.interior_primal()) {
    int x = p.net_vertex[v];
    worst = std::max(worst, norm(drift[x]) / (p.net.pi(x) * eps));
  }
  return worst;
}

MapNetwork primal_network(const OrthodiagonalMap& map) { return color_network(map, Color::Primal); }
MapNetwork dual_network(const OrthodiagonalMap& map) { return color_network(map, Color::Dual); }

std::vector<char> primal_boundary_flags(const OrthodiagonalMap& map, const MapNetwork& primal) {
  std::vector<char> flags(primal.map_vertex.size(), 0);
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = map.is_boundary(primal.map_vertex[i]) ? 1 : 0;
  return flags;
}

namespace {

// True when p and q lie strictly on opposite sides of line ab.
bool opposite_sides(Point2 a, Point2 b, Point2 p, Point2 q) {
  double s1 = cross(b - a, p - a), s2 = cross(b - a, q - a);
  return (s1 > 0 && s2 < 0) || (s1 < 0 && s2 > 0);
}

}  // namespace

std::vector<Point2> primal_edge_polyline(const OrthodiagonalMap& map, int face) {
  const Quad& q = map.face(face);
  Point2 v1 = map.pos(q[0]), w1 = map.pos(q[1]), v2 = map.pos(q[2]), w2 = map.pos(q[3]);
  if (opposite_sides(v1, v2, w1, w2)) return {v1, v2};
  return {v1, midpoint(w1, w2), v2};
}

std::vector<Point2> dual_edge_polyline(const OrthodiagonalMap& map, int face) {
  const Quad& q = map.face(face);
  Point2 v1 = map.pos(q[0]), w1 = map.pos(q[1]), v2 = map.pos(q[2]), w2 = map.pos(q[3]);
  if (opposite_sides(w1, w2, v1, v2)) return {w1, w2};
  return {w1, midpoint(v1, v2), w2};
}

AugmentedDuals augmented_duals(const OrthodiagonalMap& map, Point2 center, double apex_radius) {
  const auto& walk = map.boundary_walk();
  if (walk.empty()) throw GeometryError("augmented duals need a simple boundary walk");
  double reach = 0.0;
  for (int v = 0; v < map.num_vertices(); ++v) reach = std::max(reach, dist(map.pos(v), center));
  if (!(apex_radius > reach)) throw GeometryError("apex radius must exceed the distance to every vertex");

  MapNetwork p = primal_network(map);
  MapNetwork d = dual_network(map);
  AugmentedDuals out;
  out.num_face_edges = map.num_faces();
  out.primal_map_vertex = p.map_vertex;
  out.dual_map_vertex = d.map_vertex;
  out.apex = static_cast<int>(d.map_vertex.size());
  out.dual_map_vertex.push_back(-1);
  out.apex_pos = {center.x + apex_radius, center.y};
  for (int v : p.map_vertex) out.primal_pos.push_back(map.pos(v));
  for (int v : d.map_vertex) out.dual_pos.push_back(map.pos(v));
  out.dual_pos.push_back(out.apex_pos);

  std::vector<Edge> pe = p.net.edges();
  std::vector<Edge> de = d.net.edges();
  std::size_t k = walk.size();
  for (std::size_t i = 0; i < k; ++i) {
    int w = walk[i];
    if (map.color(w) != Color::Dual) continue;
    int a = walk[(i + k - 1) % k], b = walk[(i + 1) % k];
    pe.push_back({p.net_vertex[a], p.net_vertex[b], 1.0});
    de.push_back({d.net_vertex[w], out.apex, 1.0});
    out.boundary_dual.push_back(w);
  }
  out.primal = Network(p.net.num_vertices(), std::move(pe));
  out.dual = Network(d.net.num_vertices() + 1, std::move(de));
  return out;
}

OrthodiagonalMap face_submap(const OrthodiagonalMap& map, const std::vector<int>& faces) {
  std::vector<int> remap(map.num_vertices(), -1);
  std::vector<MapVertex> verts;
  std::vector<Quad> quads;
  std::vector<int> sorted = faces;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> used;
  for (int f : sorted)
    for (int v : map.face(f)) used.push_back(v);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  for (int v : used) {
    remap[v] = static_cast<int>(verts.size());
    verts.push_back(map.vertex(v));
  }
  for (int f : sorted) {
    const Quad& q = map.face(f);
    quads.push_back({remap[q[0]], remap[q[1]], remap[q[2]], remap[q[3]]});
  }
  return OrthodiagonalMap::from_indices(std::move(verts), std::move(quads));
}

std::vector<OrthodiagonalMap> blocks(const OrthodiagonalMap& map) {
  int n = map.num_vertices();
  const auto& edges = map.edges();
  int m = static_cast<int>(edges.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour, edge)
  for (int e = 0; e < m; ++e) {
    adj[edges[e].a].push_back({edges[e].b, e});
    adj[edges[e].b].push_back({edges[e].a, e});
  }

  // Iterative Tarjan with an edge stack; comp[e] is the block label of edge e.
  std::vector<int> disc(n, -1), low(n, 0), comp(m, -1);
  std::vector<int> estack;
  int timer = 0, ncomp = 0;
  struct Frame {
    int v, parent_edge;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0 || adj[root].empty()) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& fr = stack.back();
      if (fr.next < adj[fr.v].size()) {
        auto [w, e] = adj[fr.v][fr.next++];
        if (e == fr.parent_edge) continue;
        if (disc[w] < 0) {
          estack.push_back(e);
          disc[w] = low[w] = timer++;
          stack.push_back({w, e, 0});
        } else if (disc[w] < disc[fr.v]) {
          estack.push_back(e);
          low[fr.v] = std::min(low[fr.v], disc[w]);
        }
        continue;
      }
      int v = fr.v, pe = fr.parent_edge;
      stack.pop_back();
      if (stack.empty()) break;
      int u = stack.back().v;
      low[u] = std::min(low[u], low[v]);
      if (low[v] >= disc[u]) {
        while (!estack.empty()) {
          int e = estack.back();
          estack.pop_back();
          comp[e] = ncomp;
          if (e == pe) break;
        }
        ++ncomp;
      }
    }
  }

  std::unordered_map<std::uint64_t, int> edge_index;
  for (int e = 0; e < m; ++e) edge_index[edge_key(edges[e].a, edges[e].b)] = e;
  std::map<int, std::vector<int>> by_comp;
  std::vector<int> order;
  for (int f = 0; f < map.num_faces(); ++f) {
    const Quad& q = map.face(f);
    int c = comp[edge_index[edge_key(q[0], q[1])]];
    if (by_comp.find(c) == by_comp.end()) order.push_back(c);
    by_comp[c].push_back(f);
  }
  std::vector<OrthodiagonalMap> out;
  for (int c : order) out.push_back(face_submap(map, by_comp[c]));
  return out;
}

}  // namespace odmap
