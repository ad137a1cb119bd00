#include "odmap/flows.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

double polygon_diameter(const std::vector<Point2>& poly) {
  double best = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    for (std::size_t j = i + 1; j < poly.size(); ++j) best = std::max(best, dist(poly[i], poly[j]));
  return best;
}

std::vector<int> to_net(const MapNetwork& p, const std::vector<int>& map_vertices, const char* what) {
  std::vector<int> out;
  out.reserve(map_vertices.size());
  for (int v : map_vertices) {
    if (v < 0 || v >= static_cast<int>(p.net_vertex.size()) || p.net_vertex[v] < 0) {
      throw GeometryError(std::string(what) + " must contain primal vertices only");
    }
    out.push_back(p.net_vertex[v]);
  }
  return out;
}

}  // namespace

EdgeField argument_increments(const OrthodiagonalMap& map, Point2 x) {
  EdgeField phi(map.num_faces(), 0.0);
  for (int f = 0; f < map.num_faces(); ++f) {
    auto line = dual_edge_polyline(map, f);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < line.size(); ++k) {
      Point2 a = line[k] - x, b = line[k + 1] - x;
      s += std::atan2(cross(a, b), dot(a, b));
    }
    phi[f] = s;
  }
  return phi;
}

void recompute_flow_diagnostics(const OrthodiagonalMap& map, FlowReport& report) {
  MapNetwork p = primal_network(map);
  auto src = to_net(p, report.sources, "sources");
  auto snk = to_net(p, report.sinks, "sinks");
  report.strength = strength(p.net, report.flow, src, snk);
  report.energy = energy(p.net, report.flow);
  report.ratio = report.bound_shape > 0 ? report.energy / report.bound_shape : INFINITY;
  std::vector<char> in_u(p.net.num_vertices(), 1);
  for (int v : src) in_u[v] = 0;
  for (int v : snk) in_u[v] = 0;
  report.max_node_residual = 0.0;
  for (double d : node_law_residuals(p.net, report.flow, in_u))
    report.max_node_residual = std::max(report.max_node_residual, std::abs(d));
}

FlowReport argument_flow(const OrthodiagonalMap& map, int x, double r, bool relax) {
  if (x < 0 || x >= map.num_vertices() || map.color(x) != Color::Primal) {
    throw GeometryError("argument flow centre must be a primal vertex");
  }
  FlowReport out;
  double eps = mesh_size(map);
  if (r < 3 * eps) {
    if (!relax) {
      std::ostringstream msg;
      msg << "radius " << r << " is below 3 * mesh size (" << 3 * eps << ")";
      throw GeometryError(msg.str());
    }
    out.warnings.push_back("radius below 3 * mesh size; the energy bound need not hold");
  }
  auto poly = map.boundary_polygon();
  if (poly.empty()) throw GeometryError("map boundary is not a simple closed walk");
  Point2 c = map.pos(x);
  double nearest = INFINITY;
  Point2 witness;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    double d = point_segment_distance(c, a, b);
    if (d < nearest) {
      nearest = d;
      Point2 ab = b - a;
      double t = std::clamp(dot(c - a, ab) / dot(ab, ab), 0.0, 1.0);
      witness = a + t * ab;
    }
  }
  if (!point_in_polygon(c, poly) || nearest <= r) {
    std::ostringstream msg;
    msg << "closed disk of radius " << r << " about (" << c.x << ", " << c.y
        << ") is not inside the map; boundary point (" << witness.x << ", " << witness.y << ") at distance "
        << nearest;
    throw GeometryError(msg.str());
  }

  std::vector<char> in_a(map.num_vertices(), 0);
  for (int v : map.primal_vertices()) {
    if (dist(map.pos(v), c) <= r) {
      in_a[v] = 1;
      out.sources.push_back(v);
    }
  }
  out.sinks = map.boundary_primal();
  out.flow = argument_increments(map, c);
  for (int f = 0; f < map.num_faces(); ++f) {
    const Quad& q = map.face(f);
    out.flow[f] = (in_a[q[0]] && in_a[q[2]]) ? 0.0 : out.flow[f] / (2 * std::numbers::pi);
  }
  out.bound_shape = std::log(polygon_diameter(poly) / r);
  recompute_flow_diagnostics(map, out);
  return out;
}

bool is_rho_edge(const OrthodiagonalMap& map, int face, Point2 center, double rho) {
  const Quad& q = map.face(face);
  double d1 = dist(map.pos(q[1]), center), d2 = dist(map.pos(q[3]), center);
  return (d1 < rho && rho <= d2) || (d2 < rho && rho <= d1);
}

RhoEdgeSet rho_edges(const OrthodiagonalMap& map, Point2 center, double rho) {
  RhoEdgeSet out{center, rho, {}};
  for (int f = 0; f < map.num_faces(); ++f)
    if (is_rho_edge(map, f, center, rho)) out.edges.push_back(f);
  return out;
}

RhoEdgeSet rho_edges(const AugmentedDuals& aug, Point2 center, double rho) {
  RhoEdgeSet out{center, rho, {}};
  for (int e = 0; e < aug.dual.num_edges(); ++e) {
    const Edge& ed = aug.dual.edge(e);
    double d1 = dist(aug.dual_pos[ed.tail], center), d2 = dist(aug.dual_pos[ed.head], center);
    if ((d1 < rho && rho <= d2) || (d2 < rho && rho <= d1)) out.edges.push_back(e);
  }
  return out;
}

namespace {

// Breadth-first search over allowed primal edges from sources to targets.
// Sources and neighbours are scanned in vertex-id order, so ties resolve to the smallest ids.
std::optional<RhoPath> bfs_path(const OrthodiagonalMap& map, const MapNetwork& p, const std::vector<char>& allowed,
                                const std::vector<int>& a, const std::vector<int>& b) {
  int n = p.net.num_vertices();
  std::vector<char> target(n, 0);
  for (int v : b) target[p.net_vertex[v]] = 1;
  std::vector<int> sources;
  for (int v : a) sources.push_back(p.net_vertex[v]);
  auto by_id = [&](int u, int w) { return map.id(p.map_vertex[u]) < map.id(p.map_vertex[w]); };
  std::sort(sources.begin(), sources.end(), by_id);
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());

  std::vector<int> parent_edge(n, -2), depth(n, -1);
  std::deque<int> queue;
  for (int s : sources) {
    if (target[s]) throw GeometryError("source and target sets overlap");
    depth[s] = 0;
    parent_edge[s] = -1;
    queue.push_back(s);
  }
  int found = -1;
  int found_depth = -1;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    if (found >= 0 && depth[x] >= found_depth) break;
    std::vector<std::pair<int, int>> nbrs;
    for (int e : p.net.incident(x)) {
      if (!allowed[e]) continue;
      nbrs.push_back({p.net.other_end(e, x), e});
    }
    std::sort(nbrs.begin(), nbrs.end(), [&](auto& u, auto& w) {
      if (u.first != w.first) return by_id(u.first, w.first);
      return u.second < w.second;
    });
    for (auto [y, e] : nbrs) {
      if (depth[y] >= 0) continue;
      depth[y] = depth[x] + 1;
      parent_edge[y] = e;
      if (target[y]) {
        if (found < 0 || by_id(y, found)) found = y;
        found_depth = depth[y];
      } else {
        queue.push_back(y);
      }
    }
  }
  if (found < 0) return std::nullopt;
  RhoPath path;
  int y = found;
  while (parent_edge[y] >= 0) {
    path.vertices.push_back(p.map_vertex[y]);
    path.edges.push_back(parent_edge[y]);
    y = p.net.other_end(parent_edge[y], y);
  }
  path.vertices.push_back(p.map_vertex[y]);
  std::reverse(path.vertices.begin(), path.vertices.end());
  std::reverse(path.edges.begin(), path.edges.end());
  return path;
}

}  // namespace

std::optional<RhoPath> rho_edge_path(const OrthodiagonalMap& map, Point2 center, double rho,
                                     const std::vector<int>& a, const std::vector<int>& b) {
  MapNetwork p = primal_network(map);
  to_net(p, a, "A");
  to_net(p, b, "B");
  std::vector<char> allowed(map.num_faces(), 0);
  for (int f : rho_edges(map, center, rho).edges) allowed[f] = 1;
  return bfs_path(map, p, allowed, a, b);
}

RhoPath rho_path(const OrthodiagonalMap& map, Point2 center, double rho, const std::vector<int>& a,
                 const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw GeometryError("rho_path: A and B' must be nonempty");
  double reach = 0.0;
  for (int v = 0; v < map.num_vertices(); ++v) reach = std::max(reach, dist(map.pos(v), center));
  AugmentedDuals aug = augmented_duals(map, center, 2 * reach + rho + 1.0);
  int nd = aug.dual.num_vertices();

  // S_rho: dual vertices reachable from the innermost one without leaving the open disk.
  int seed = -1;
  double best = INFINITY;
  for (int w = 0; w < nd; ++w) {
    double d = dist(aug.dual_pos[w], center);
    if (d < rho && d < best) {
      best = d;
      seed = w;
    }
  }
  if (seed < 0) {
    std::ostringstream msg;
    msg << "no dual vertex lies inside radius " << rho << "; S_rho is empty";
    throw GeometryError(msg.str());
  }
  std::vector<char> in_s(nd, 0);
  std::vector<int> stack{seed};
  in_s[seed] = 1;
  while (!stack.empty()) {
    int w = stack.back();
    stack.pop_back();
    for (int e : aug.dual.incident(w)) {
      int u = aug.dual.other_end(e, w);
      if (!in_s[u] && dist(aug.dual_pos[u], center) < rho) {
        in_s[u] = 1;
        stack.push_back(u);
      }
    }
  }
  // Faces outside S_rho that reach the apex form the outer face of the union.
  std::vector<char> outer(nd, 0);
  stack = {aug.apex};
  outer[aug.apex] = 1;
  while (!stack.empty()) {
    int w = stack.back();
    stack.pop_back();
    for (int e : aug.dual.incident(w)) {
      int u = aug.dual.other_end(e, w);
      if (!outer[u] && !in_s[u]) {
        outer[u] = 1;
        stack.push_back(u);
      }
    }
  }
  std::vector<char> allowed(map.num_faces(), 0);
  int k_edges = 0;
  for (int e = 0; e < aug.num_face_edges; ++e) {
    const Edge& ed = aug.dual.edge(e);
    if ((in_s[ed.tail] && outer[ed.head]) || (in_s[ed.head] && outer[ed.tail])) {
      allowed[e] = 1;
      ++k_edges;
    }
  }
  MapNetwork p = primal_network(map);
  to_net(p, a, "A");
  to_net(p, b, "B'");
  auto path = bfs_path(map, p, allowed, a, b);
  if (!path) {
    std::ostringstream msg;
    msg << "no path from A to B' along the outer boundary of S_rho at rho = " << rho << " (" << k_edges
        << " boundary edges in G)";
    throw GeometryError(msg.str());
  }
  return *path;
}

RandomPathFlow random_path_flow(const OrthodiagonalMap& map, Point2 center, const std::vector<int>& s,
                                const std::vector<int>& t, double r1, double r2, int m,
                                std::optional<std::uint64_t> seed, bool relax) {
  if (m < 1) throw GeometryError("random_path_flow needs at least one quadrature point");
  RandomPathFlow out;
  double eps = mesh_size(map);
  if (r1 < eps || r2 < 2 * r1) {
    if (!relax) throw GeometryError("random_path_flow requires r1 >= mesh size and r2 >= 2 r1");
    out.report.warnings.push_back("radii outside the hypothesis r1 >= mesh size, r2 >= 2 r1");
  }
  double z = std::log(r2 / r1);
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int k = 0; k < m; ++k) out.rho.push_back(r1 * std::exp(z * unif(rng)));
  } else {
    for (int k = 0; k < m; ++k) out.rho.push_back(r1 * std::exp(z * (k + 0.5) / m));
  }

  MapNetwork p = primal_network(map);
  to_net(p, s, "S");
  to_net(p, t, "T");
  out.report.flow.assign(map.num_faces(), 0.0);
  std::vector<double> failing;
  for (double rho : out.rho) {
    std::vector<char> allowed(map.num_faces(), 0);
    for (int f : rho_edges(map, center, rho).edges) allowed[f] = 1;
    auto path = bfs_path(map, p, allowed, s, t);
    if (!path) {
      failing.push_back(rho);
      continue;
    }
    for (std::size_t k = 0; k < path->edges.size(); ++k) {
      int f = path->edges[k];
      int sign = map.face(f)[0] == path->vertices[k] ? +1 : -1;
      out.report.flow[f] += sign / static_cast<double>(m);
    }
    out.paths.push_back(std::move(*path));
  }
  if (!failing.empty()) {
    std::ostringstream msg;
    msg << "no rho-edge path from S to T for rho in {";
    for (std::size_t i = 0; i < failing.size(); ++i) msg << (i ? ", " : "") << failing[i];
    msg << "}";
    throw GeometryError(msg.str());
  }
  out.report.sources = s;
  out.report.sinks = t;
  out.report.bound_shape = 1.0 / z;
  recompute_flow_diagnostics(map, out.report);
  return out;
}

EquicontinuityProbe equicontinuity_probe(const OrthodiagonalMap& map, const VertexFunction& h, int x, int y, double R) {
  MapNetwork p = primal_network(map);
  if (static_cast<int>(h.size()) != p.net.num_vertices()) throw StructuralError("h must be indexed by primal vertex");
  int xi = to_net(p, {x}, "x")[0], yi = to_net(p, {y}, "y")[0];
  EquicontinuityProbe out;
  out.eps = mesh_size(map);
  out.r = 0.5 * dist(map.pos(x), map.pos(y));
  if (R < 2 * out.r + 3 * out.eps) throw GeometryError("R must be at least 2r + 3 * mesh size");
  Point2 mid = midpoint(map.pos(x), map.pos(y));
  out.lhs = std::abs(h[xi] - h[yi]);
  out.rhs_shape = std::sqrt(energy_of_function(p.net, h)) / std::sqrt(std::log(R / (out.r + out.eps)));
  double lo = INFINITY, hi = -INFINITY;
  for (int v : map.boundary_primal()) {
    if (dist(map.pos(v), mid) > R) continue;
    lo = std::min(lo, h[p.net_vertex[v]]);
    hi = std::max(hi, h[p.net_vertex[v]]);
  }
  out.beta = hi >= lo ? hi - lo : 0.0;
  return out;
}

}  // namespace odmap
