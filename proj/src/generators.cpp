#include "odmap/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

// Faces centred at (i, j), i + j odd, strictly inside [i0, i1] x [j0, j1].
OrthodiagonalMap lattice(int i0, int i1, int j0, int j1, const std::function<Point2(int, int)>& pos) {
  int width = j1 - j0 + 1;
  auto id = [&](int i, int j) { return (i - i0) * width + (j - j0); };
  std::map<int, MapVertex> verts;
  std::vector<std::array<int, 4>> faces;
  auto use = [&](int i, int j) {
    int k = id(i, j);
    if (!verts.count(k)) {
      bool primal = ((i % 2) + 2) % 2 == 0;
      verts[k] = {k, pos(i, j), primal ? Color::Primal : Color::Dual};
    }
    return k;
  };
  for (int i = i0 + 1; i < i1; ++i) {
    for (int j = j0 + 1; j < j1; ++j) {
      if (((i + j) % 2 + 2) % 2 == 0) continue;
      if (((i % 2) + 2) % 2 == 1) {
        faces.push_back({use(i - 1, j), use(i, j - 1), use(i + 1, j), use(i, j + 1)});
      } else {
        faces.push_back({use(i, j - 1), use(i + 1, j), use(i, j + 1), use(i - 1, j)});
      }
    }
  }
  std::vector<MapVertex> list;
  for (auto& [k, v] : verts) list.push_back(v);
  return OrthodiagonalMap(std::move(list), faces);
}

bool face_inside(const OrthodiagonalMap& map, int f, const Domain& domain, double b) {
  auto poly = map.face_polygon(f);
  for (auto& p : poly)
    if (!domain.contains(p)) return false;
  if (domain.kind() == Domain::Kind::Polygon) {
    const auto& dv = domain.vertices();
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < dv.size(); ++j)
        if (segments_properly_intersect(poly[i], poly[(i + 1) % poly.size()], dv[j], dv[(j + 1) % dv.size()]))
          return false;
  }
  if (b <= 0) return true;
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (domain.segment_boundary_distance(poly[i], poly[(i + 1) % poly.size()]) < b) return false;
  return true;
}

void check_increasing(const std::vector<double>& c, const char* name) {
  if (c.size() < 3) throw GeometryError(std::string(name) + " needs at least 3 cuts");
  for (std::size_t i = 1; i < c.size(); ++i)
    if (!(c[i] > c[i - 1])) throw GeometryError(std::string(name) + " must be strictly increasing");
}

}  // namespace

OrthodiagonalMap diamond_map() {
  std::vector<MapVertex> v = {
      {0, {0, 0}, Color::Primal},  {1, {2, 0}, Color::Primal},   {2, {0, 2}, Color::Primal},
      {3, {-2, 0}, Color::Primal}, {4, {0, -2}, Color::Primal},  {5, {1, 1}, Color::Dual},
      {6, {-1, 1}, Color::Dual},   {7, {-1, -1}, Color::Dual},   {8, {1, -1}, Color::Dual},
  };
  std::vector<std::array<int, 4>> f = {{0, 8, 1, 5}, {0, 5, 2, 6}, {0, 6, 3, 7}, {0, 7, 4, 8}};
  return OrthodiagonalMap(std::move(v), f);
}

std::vector<OrthodiagonalMap> clip_to_domain(const OrthodiagonalMap& map, const Domain& domain, double b) {
  if (b < 0) throw GeometryError("clip buffer must be nonnegative");
  std::vector<int> keep;
  for (int f = 0; f < map.num_faces(); ++f)
    if (face_inside(map, f, domain, b)) keep.push_back(f);
  if (keep.empty()) return {};
  return blocks(face_submap(map, keep));
}

OrthodiagonalMap rotated_grid(const Domain& domain, int n) {
  if (n < 2) throw GeometryError("rotated_grid needs n >= 2");
  Point2 anchor = domain.kind() == Domain::Kind::Disk ? domain.center() : domain.vertices().front();
  double x0, y0, x1, y1;
  domain.bounding_box(x0, y0, x1, y1);
  int i0 = static_cast<int>(std::floor((x0 - anchor.x) * n)) - 1;
  int i1 = static_cast<int>(std::ceil((x1 - anchor.x) * n)) + 1;
  int j0 = static_cast<int>(std::floor((y0 - anchor.y) * n)) - 1;
  int j1 = static_cast<int>(std::ceil((y1 - anchor.y) * n)) + 1;
  // Keep (even, even) primal after the shift.
  i0 -= ((i0 % 2) + 2) % 2;
  j0 -= ((j0 % 2) + 2) % 2;
  auto full = lattice(i0, i1, j0, j1, [&](int i, int j) {
    return Point2{anchor.x + static_cast<double>(i) / n, anchor.y + static_cast<double>(j) / n};
  });
  auto parts = clip_to_domain(full, domain, 0.0);
  if (parts.empty()) throw GeometryError("no lattice face fits inside the domain at this n");
  std::size_t best = 0;
  for (std::size_t k = 1; k < parts.size(); ++k)
    if (parts[k].num_faces() > parts[best].num_faces()) best = k;
  return parts[best];
}

OrthodiagonalMap rect_nonuniform(const std::vector<double>& xs, const std::vector<double>& ys) {
  check_increasing(xs, "x cuts");
  check_increasing(ys, "y cuts");
  int ni = static_cast<int>(xs.size()) - 1, nj = static_cast<int>(ys.size()) - 1;
  return lattice(0, ni, 0, nj, [&](int i, int j) { return Point2{xs[i], ys[j]}; });
}

OrthodiagonalMap perturbed(const OrthodiagonalMap& base, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0 && amplitude < 1)) throw GeometryError("perturbation amplitude must lie in [0, 1)");
  for (int f = 0; f < base.num_faces(); ++f) {
    const Quad& q = base.face(f);
    for (int k = 0; k < 2; ++k) {
      Point2 d = base.pos(q[k + 2]) - base.pos(q[k]);
      if (d.x != 0 && d.y != 0) throw GeometryError("perturbed needs a map with axis-parallel diagonals");
    }
  }
  std::set<double> xs, ys;
  for (auto& v : base.vertices()) {
    xs.insert(v.pos.x);
    ys.insert(v.pos.y);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-amplitude, amplitude);
  auto jitter = [&](const std::set<double>& s) {
    std::vector<double> v(s.begin(), s.end());
    std::map<double, double> moved;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double gap = INFINITY;
      if (i > 0) gap = std::min(gap, v[i] - v[i - 1]);
      if (i + 1 < v.size()) gap = std::min(gap, v[i + 1] - v[i]);
      if (!std::isfinite(gap)) gap = 0.0;
      moved[v[i]] = v[i] + unif(rng) * 0.5 * gap;
    }
    return moved;
  };
  auto mx = jitter(xs);
  auto my = jitter(ys);
  std::vector<MapVertex> verts = base.vertices();
  for (auto& v : verts) v.pos = {mx[v.pos.x], my[v.pos.y]};
  return OrthodiagonalMap::from_indices(std::move(verts), base.faces());
}

double hausdorff_delta(const OrthodiagonalMap& map, const Domain& domain, int samples) {
  if (samples < 100) throw GeometryError("hausdorff_delta needs at least 100 samples");
  auto poly = map.boundary_polygon();
  if (poly.empty()) throw GeometryError("map boundary is not a simple closed walk");
  return hausdorff_distance(poly, domain, samples);
}

// ---------------------------------------------------------------- triangulations

namespace {

struct HexLattice {
  std::map<std::pair<int, int>, int> index;
  std::vector<std::array<int, 3>> faces;
};

HexLattice hex_lattice(int k) {
  if (k < 1) throw GeometryError("hexagon size must be at least 1");
  HexLattice h;
  auto inside = [&](int i, int j) { return std::abs(i) <= k && std::abs(j) <= k && std::abs(i + j) <= k; };
  for (int i = -k; i <= k; ++i)
    for (int j = -k; j <= k; ++j)
      if (inside(i, j)) h.index.emplace(std::make_pair(i, j), static_cast<int>(h.index.size()));
  for (int i = -k - 1; i <= k; ++i) {
    for (int j = -k - 1; j <= k; ++j) {
      if (inside(i, j) && inside(i + 1, j) && inside(i, j + 1))
        h.faces.push_back({h.index[{i, j}], h.index[{i + 1, j}], h.index[{i, j + 1}]});
      if (inside(i + 1, j) && inside(i + 1, j + 1) && inside(i, j + 1))
        h.faces.push_back({h.index[{i + 1, j}], h.index[{i + 1, j + 1}], h.index[{i, j + 1}]});
    }
  }
  return h;
}

}  // namespace

Triangulation hex_triangulation(int k) {
  auto h = hex_lattice(k);
  std::vector<int> ids(h.index.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return Triangulation::from_indices(std::move(ids), h.faces);
}

Triangulation random_triangulation(int k, int flips, std::uint64_t seed) {
  Triangulation base = hex_triangulation(k);
  int n = base.num_vertices();
  auto faces = base.faces();
  std::map<std::pair<int, int>, int> dir;
  std::vector<int> degree(n, 0);
  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    for (int s = 0; s < 3; ++s) dir[{faces[f][s], faces[f][(s + 1) % 3]}] = f;
  for (auto& e : base.edges()) {
    ++degree[e.a];
    ++degree[e.b];
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_face(0, static_cast<int>(faces.size()) - 1), pick_side(0, 2);
  int done = 0;
  for (long attempt = 0; done < flips && attempt < 50L * flips + 100; ++attempt) {
    int f = pick_face(rng), s = pick_side(rng);
    int a = faces[f][s], b = faces[f][(s + 1) % 3], c = faces[f][(s + 2) % 3];
    auto it = dir.find({b, a});
    if (it == dir.end()) continue;
    int g = it->second;
    int t = 0;
    while (faces[g][t] != b) ++t;
    int d = faces[g][(t + 2) % 3];
    if (degree[a] < 4 || degree[b] < 4) continue;
    if (base.is_boundary(c) && base.is_boundary(d)) continue;
    if (dir.count({c, d}) || dir.count({d, c})) continue;
    for (auto* face : {&faces[f], &faces[g]})
      for (int u = 0; u < 3; ++u) dir.erase({(*face)[u], (*face)[(u + 1) % 3]});
    faces[f] = {a, d, c};
    faces[g] = {d, b, c};
    for (int h : {f, g})
      for (int u = 0; u < 3; ++u) dir[{faces[h][u], faces[h][(u + 1) % 3]}] = h;
    --degree[a];
    --degree[b];
    ++degree[c];
    ++degree[d];
    ++done;
  }
  return Triangulation::from_indices(base.ids(), std::move(faces));
}

// ---------------------------------------------------------------- planar 3-connected maps

PlanarMap3C tetrahedron() { return PlanarMap3C::from_indices({0, 1, 2, 3}, {{0, 1, 3}, {1, 2, 3}, {2, 0, 3}, {0, 2, 1}}); }

PlanarMap3C prism(int k) {
  if (k < 3) throw GeometryError("prism needs k >= 3");
  std::vector<int> ids(2 * k);
  for (int i = 0; i < 2 * k; ++i) ids[i] = i;
  std::vector<std::vector<int>> faces;
  std::vector<int> outer, inner;
  for (int i = 0; i < k; ++i) {
    int j = (i + 1) % k;
    faces.push_back({i, j, k + j, k + i});
    inner.push_back(k + i);
    outer.push_back((k - i) % k);
  }
  faces.push_back(inner);
  faces.push_back(outer);
  return PlanarMap3C::from_indices(std::move(ids), std::move(faces));
}

PlanarMap3C wheel(int k) {
  if (k < 3) throw GeometryError("wheel needs k >= 3");
  std::vector<int> ids(k + 1);
  for (int i = 0; i <= k; ++i) ids[i] = i;
  std::vector<std::vector<int>> faces;
  std::vector<int> outer;
  for (int i = 0; i < k; ++i) {
    faces.push_back({0, 1 + i, 1 + (i + 1) % k});
    outer.push_back(1 + (k - i) % k);
  }
  faces.push_back(outer);
  return PlanarMap3C::from_indices(std::move(ids), std::move(faces));
}

PlanarMap3C sphere_from_triangulation(const Triangulation& t) {
  std::vector<int> ids(t.num_vertices() + 1);
  for (int v = 0; v <= t.num_vertices(); ++v) ids[v] = v;
  int apex = t.num_vertices();
  std::vector<std::vector<int>> faces;
  for (auto& f : t.faces()) faces.push_back({f[0], f[1], f[2]});
  const auto& b = t.boundary();
  for (std::size_t k = 0; k < b.size(); ++k) faces.push_back({b[(k + 1) % b.size()], b[k], apex});
  return PlanarMap3C::from_indices(std::move(ids), std::move(faces));
}

// ---------------------------------------------------------------- families

std::vector<std::string> generator_families() {
  return {"rotated_grid", "rect_nonuniform", "perturbed", "packed_triangulation", "double_packed"};
}

OrthodiagonalMap generate(const GeneratorSpec& spec) {
  if (spec.family == "rotated_grid") return rotated_grid(spec.domain, spec.n);
  if (spec.family == "perturbed") return perturbed(rotated_grid(spec.domain, spec.n), spec.amplitude, spec.seed);
  if (spec.family == "rect_nonuniform") {
    if (spec.n < 2) throw GeometryError("rect_nonuniform needs n >= 2");
    double x0, y0, x1, y1;
    spec.domain.bounding_box(x0, y0, x1, y1);
    int m = spec.n;
    std::vector<double> xs, ys;
    // Alternating x spacings 1.3 : 0.7, uniform y spacing.
    for (int i = 0; i <= m; ++i) {
      xs.push_back(x0 + (x1 - x0) * (i + (i % 2 && i < m ? 0.3 : 0.0)) / m);
      ys.push_back(y0 + (y1 - y0) * static_cast<double>(i) / m);
    }
    return rect_nonuniform(xs, ys);
  }
  PackOptions opt;
  opt.tol = spec.tol;
  int size = std::max(1, spec.n);
  int verts = 3 * size * size + 3 * size + 1;
  Triangulation t = random_triangulation(size, verts / 4, spec.seed);
  if (spec.family == "packed_triangulation") {
    auto p = pack_in_disk(t, opt);
    return orthodiagonal_from_packing(t, p).map;
  }
  if (spec.family == "double_packed") {
    PlanarMap3C h = sphere_from_triangulation(t);
    auto dp = double_pack(h, h.num_faces() - 1, opt);
    return orthodiagonal_from_double_packing(h, dp).map;
  }
  throw StructuralError("unknown generator family '" + spec.family + "'");
}

}  // namespace odmap
