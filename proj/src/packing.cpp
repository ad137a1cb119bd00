#include "odmap/packing.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

std::string id_pair(int a, int b) {
  std::ostringstream s;
  s << a << " -> " << b;
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------- triangulation

Triangulation::Triangulation(std::vector<int> ids, const std::vector<std::array<int, 3>>& faces_by_id) {
  std::unordered_map<int, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    if (!index.emplace(ids[i], i).second) throw StructuralError("duplicate vertex id " + std::to_string(ids[i]));
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(faces_by_id.size());
  for (auto& f : faces_by_id) {
    std::array<int, 3> g{};
    for (int k = 0; k < 3; ++k) {
      auto it = index.find(f[k]);
      if (it == index.end()) throw StructuralError("face refers to unknown vertex id " + std::to_string(f[k]));
      g[k] = it->second;
    }
    faces.push_back(g);
  }
  ids_ = std::move(ids);
  faces_ = std::move(faces);
  derive();
}

Triangulation Triangulation::from_indices(std::vector<int> ids, std::vector<std::array<int, 3>> faces) {
  Triangulation t;
  t.ids_ = std::move(ids);
  for (auto& f : faces)
    for (int v : f)
      if (v < 0 || v >= static_cast<int>(t.ids_.size())) throw StructuralError("face index out of range");
  t.faces_ = std::move(faces);
  t.derive();
  return t;
}

int Triangulation::num_interior() const {
  return static_cast<int>(std::count(on_boundary_.begin(), on_boundary_.end(), 0));
}

void Triangulation::derive() {
  int n = num_vertices();
  if (faces_.empty()) throw StructuralError("triangulation has no faces");
  std::map<std::pair<int, int>, int> dir;
  faces_at_.assign(n, {});
  for (int f = 0; f < num_faces(); ++f) {
    auto& q = faces_[f];
    if (q[0] == q[1] || q[1] == q[2] || q[0] == q[2]) throw StructuralError("face repeats a vertex");
    for (int k = 0; k < 3; ++k) {
      int a = q[k], b = q[(k + 1) % 3];
      if (!dir.emplace(std::make_pair(a, b), f).second) {
        throw StructuralError("directed edge " + id_pair(ids_[a], ids_[b]) + " used by two faces");
      }
      faces_at_[a].push_back(f);
    }
  }
  for (int v = 0; v < n; ++v)
    if (faces_at_[v].empty()) throw StructuralError("vertex " + std::to_string(ids_[v]) + " lies on no face");

  edges_.clear();
  std::unordered_map<int, int> succ;
  for (auto& [key, f] : dir) {
    auto [a, b] = key;
    auto rev = dir.find({b, a});
    if (a < b) edges_.push_back({a, b, f, rev == dir.end() ? -1 : rev->second});
    if (b < a && rev == dir.end()) edges_.push_back({b, a, -1, f});
    if (rev == dir.end()) {
      if (!succ.emplace(a, b).second) {
        throw StructuralError("boundary is pinched at vertex " + std::to_string(ids_[a]));
      }
    }
  }
  if (succ.size() < 3) throw StructuralError("triangulation has no boundary cycle");
  int start = succ.begin()->first;
  for (auto& [a, b] : succ) start = std::min(start, a);
  boundary_.clear();
  int v = start;
  do {
    boundary_.push_back(v);
    auto it = succ.find(v);
    if (it == succ.end()) throw StructuralError("boundary edges do not close up");
    v = it->second;
  } while (v != start && boundary_.size() <= succ.size());
  if (boundary_.size() != succ.size()) throw StructuralError("boundary edges form more than one cycle");
  on_boundary_.assign(n, 0);
  for (int b : boundary_) on_boundary_[b] = 1;

  int e = static_cast<int>(edges_.size());
  if (n - e + num_faces() != 1) throw StructuralError("faces do not form a disk (Euler characteristic)");

  // Each vertex link must be a single fan.
  for (int x = 0; x < n; ++x) {
    auto next_face = [&](int f) -> int {
      auto& q = faces_[f];
      int k = q[0] == x ? 0 : q[1] == x ? 1 : 2;
      auto it = dir.find({x, q[(k + 2) % 3]});
      return it == dir.end() ? -1 : it->second;
    };
    auto prev_face = [&](int f) -> int {
      auto& q = faces_[f];
      int k = q[0] == x ? 0 : q[1] == x ? 1 : 2;
      auto it = dir.find({q[(k + 1) % 3], x});
      return it == dir.end() ? -1 : it->second;
    };
    int f0 = faces_at_[x][0];
    std::size_t seen = 1;
    int f = next_face(f0);
    while (f >= 0 && f != f0 && seen <= faces_at_[x].size()) {
      ++seen;
      f = next_face(f);
    }
    if (f < 0) {
      f = prev_face(f0);
      while (f >= 0 && seen <= faces_at_[x].size()) {
        ++seen;
        f = prev_face(f);
      }
    }
    if (seen != faces_at_[x].size()) {
      throw StructuralError("faces around vertex " + std::to_string(ids_[x]) + " do not form a single fan");
    }
  }
}

// ---------------------------------------------------------------- angle model

namespace {

// sinh(hx) / sinh(hv + hx), stable for large and infinite hx.
double ratio(double hv, double hx) {
  if (std::isinf(hx)) return std::exp(-hv);
  return std::exp(-hv) * std::expm1(-2 * hx) / std::expm1(-2 * (hv + hx));
}
double dlog_ratio_dv(double hv, double hx) {
  if (std::isinf(hx)) return -1.0;
  return -1.0 - 2.0 / std::expm1(2 * (hv + hx));
}
double dlog_ratio_dx(double hv, double hx) {
  if (std::isinf(hx)) return 0.0;
  return 2.0 / std::expm1(2 * hx) - 2.0 / std::expm1(2 * (hv + hx));
}

// Newton-Raphson in log-radii with backtracking, preceded by damped per-circle sweeps.
struct AngleSystem {
  int n = 0;
  // Angle sum at unknown i with its own radius replaced by hi.
  std::function<double(int, const std::vector<double>&, double)> local_sum;
  // Residuals F = sums - 2 pi and the Jacobian with respect to h.
  std::function<void(const std::vector<double>&, std::vector<double>&, std::vector<Eigen::Triplet<double>>*)> eval;
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

int solve_angle_system(const AngleSystem& sys, std::vector<double>& h, const PackOptions& opt, double& residual) {
  const double lo = std::log(1e-10), hi = std::log(50.0);
  std::vector<double> F;
  int iterations = 0;
  auto sweep = [&]() {
    for (int i = 0; i < sys.n; ++i) {
      double a = lo, b = hi;
      for (int k = 0; k < 40; ++k) {
        double m = 0.5 * (a + b);
        if (sys.local_sum(i, h, std::exp(m)) > kTwoPi) a = m;
        else b = m;
      }
      double target = 0.5 * (a + b);
      h[i] = std::exp(std::log(h[i]) + 0.5 * (target - std::log(h[i])));
    }
    ++iterations;
  };
  auto newton = [&]() -> bool {
    std::vector<Eigen::Triplet<double>> trip;
    for (int step = 0; step < 200 && iterations < opt.max_iter; ++step) {
      trip.clear();
      sys.eval(h, F, &trip);
      double r0 = inf_norm(F);
      if (r0 <= opt.tol) return true;
      for (auto& t : trip) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() * h[t.col()]);
      Eigen::SparseMatrix<double> J(sys.n, sys.n);
      J.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success) return false;
      Eigen::VectorXd rhs(sys.n);
      for (int i = 0; i < sys.n; ++i) rhs[i] = -F[i];
      Eigen::VectorXd du = lu.solve(rhs);
      if (lu.info() != Eigen::Success || !du.allFinite()) return false;
      double t = 1.0;
      std::vector<double> trial(sys.n);
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        for (int i = 0; i < sys.n; ++i) trial[i] = h[i] * std::exp(std::clamp(t * du[i], -5.0, 5.0));
        sys.eval(trial, F, nullptr);
        if (inf_norm(F) < r0) {
          accepted = true;
          break;
        }
      }
      ++iterations;
      if (!accepted) return false;
      h = trial;
    }
    sys.eval(h, F, nullptr);
    return inf_norm(F) <= opt.tol;
  };

  if (sys.n == 0) {
    residual = 0.0;
    return 0;
  }
  sys.eval(h, F, nullptr);
  residual = inf_norm(F);
  while (residual > 0.1 && iterations < std::min(opt.max_iter, 200)) {
    sweep();
    sys.eval(h, F, nullptr);
    residual = inf_norm(F);
  }
  while (true) {
    bool ok = newton();
    sys.eval(h, F, nullptr);
    residual = inf_norm(F);
    if (ok || residual <= opt.tol) break;
    if (iterations >= opt.max_iter) {
      throw ConvergenceError("angle-sum iteration did not converge", residual);
    }
    for (int k = 0; k < 50 && iterations < opt.max_iter; ++k) sweep();
  }
  return iterations;
}

// Disk frame moving a to the origin and its inverse.
cplx to_frame(cplx a, cplx z) { return (z - a) / (1.0 - std::conj(a) * z); }
cplx from_frame(cplx a, cplx w) { return (w + a) / (1.0 + std::conj(a) * w); }

// Euclidean radius of the horocycle at ideal point zeta through p.
double horocycle_radius(cplx zeta, cplx p) {
  double re = (p * std::conj(zeta)).real();
  return std::norm(zeta - p) / (2.0 * (1.0 - re));
}

Circle hyperbolic_to_euclidean(cplx z, double h) {
  double t = std::tanh(h / 2);
  double a = std::norm(z);
  double den = 1.0 - t * t * a;
  return {to_point(z * ((1.0 - t * t) / den)), t * (1.0 - a) / den};
}

struct Horo {
  cplx zeta;
  double rho = 0.0;
};

Horo horocycle_from_frame(cplx frame, cplx ideal, cplx on_curve) {
  cplx zeta = from_frame(frame, ideal);
  zeta /= std::abs(zeta);
  cplx p = from_frame(frame, on_curve);
  return {zeta, horocycle_radius(zeta, p)};
}

}  // namespace

double triangle_angle(double hv, double ha, double hb) {
  double q = std::clamp(ratio(hv, ha) * ratio(hv, hb), 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(q));
}

std::vector<double> angle_sums(const Triangulation& t, const std::vector<double>& h) {
  std::vector<double> s(t.num_vertices(), 0.0);
  for (auto& f : t.faces()) {
    for (int k = 0; k < 3; ++k) {
      int v = f[k];
      if (!t.is_boundary(v)) s[v] += triangle_angle(h[v], h[f[(k + 1) % 3]], h[f[(k + 2) % 3]]);
    }
  }
  return s;
}

// ---------------------------------------------------------------- disk packing

CirclePacking pack_in_disk(const Triangulation& t, const PackOptions& opt) {
  int n = t.num_vertices();
  std::vector<int> unknown_of(n, -1), vertex_of;
  for (int v = 0; v < n; ++v) {
    if (!t.is_boundary(v)) {
      unknown_of[v] = static_cast<int>(vertex_of.size());
      vertex_of.push_back(v);
    }
  }
  std::vector<double> full(n, INFINITY);
  auto spread = [&](const std::vector<double>& h) {
    for (std::size_t i = 0; i < vertex_of.size(); ++i) full[vertex_of[i]] = h[i];
  };

  AngleSystem sys;
  sys.n = static_cast<int>(vertex_of.size());
  sys.local_sum = [&](int i, const std::vector<double>& h, double hi) {
    spread(h);
    int v = vertex_of[i];
    full[v] = hi;
    double s = 0.0;
    for (int f : t.faces_at(v)) {
      auto& q = t.faces()[f];
      int k = q[0] == v ? 0 : q[1] == v ? 1 : 2;
      s += triangle_angle(hi, full[q[(k + 1) % 3]], full[q[(k + 2) % 3]]);
    }
    return s;
  };
  sys.eval = [&](const std::vector<double>& h, std::vector<double>& F,
                 std::vector<Eigen::Triplet<double>>* J) {
    spread(h);
    F.assign(sys.n, -kTwoPi);
    for (auto& q : t.faces()) {
      for (int k = 0; k < 3; ++k) {
        int v = q[k];
        int i = unknown_of[v];
        if (i < 0) continue;
        int a = q[(k + 1) % 3], b = q[(k + 2) % 3];
        double hv = full[v], ha = full[a], hb = full[b];
        double ang = triangle_angle(hv, ha, hb);
        F[i] += ang;
        if (!J) continue;
        double rq = std::clamp(ratio(hv, ha) * ratio(hv, hb), 0.0, 1.0 - 1e-16);
        double tan_half = std::sqrt(rq / (1.0 - rq));
        J->emplace_back(i, i, tan_half * (dlog_ratio_dv(hv, ha) + dlog_ratio_dv(hv, hb)));
        if (unknown_of[a] >= 0) J->emplace_back(i, unknown_of[a], tan_half * dlog_ratio_dx(hv, ha));
        if (unknown_of[b] >= 0) J->emplace_back(i, unknown_of[b], tan_half * dlog_ratio_dx(hv, hb));
      }
    }
  };

  CirclePacking out;
  std::vector<double> h(sys.n, 1.0);
  double residual = 0.0;
  out.iterations = solve_angle_system(sys, h, opt, residual);
  out.angle_residual = residual;
  spread(h);
  out.hyperbolic_radius = full;

  // Layout: hyperbolic centres for interior circles, (ideal point, radius) for horocycles.
  std::vector<char> placed(n, 0);
  std::vector<cplx> z(n);
  std::vector<Horo> horo(n);
  std::deque<int> queue;
  auto mark = [&](int v) {
    placed[v] = 1;
    for (int f : t.faces_at(v)) queue.push_back(f);
  };

  if (sys.n > 0) {
    // Seed: the interior vertex farthest (in hops) from the boundary, lowest index on ties.
    std::vector<int> depth(n, -1);
    std::deque<int> bfs;
    for (int b : t.boundary()) {
      depth[b] = 0;
      bfs.push_back(b);
    }
    std::vector<std::vector<int>> nbr(n);
    for (auto& e : t.edges()) {
      nbr[e.a].push_back(e.b);
      nbr[e.b].push_back(e.a);
    }
    while (!bfs.empty()) {
      int x = bfs.front();
      bfs.pop_front();
      for (int y : nbr[x])
        if (depth[y] < 0) {
          depth[y] = depth[x] + 1;
          bfs.push_back(y);
        }
    }
    int seed = vertex_of[0];
    for (int v : vertex_of)
      if (depth[v] > depth[seed]) seed = v;
    out.center_vertex = seed;
    z[seed] = 0.0;
    auto& q = t.faces()[t.faces_at(seed)[0]];
    int k = q[0] == seed ? 0 : q[1] == seed ? 1 : 2;
    int a = q[(k + 1) % 3];
    if (t.is_boundary(a)) {
      double ts = std::tanh(full[seed] / 2);
      horo[a] = horocycle_from_frame(0.0, 1.0, ts);
    } else {
      z[a] = std::tanh((full[seed] + full[a]) / 2);
    }
    mark(seed);
    mark(a);
  } else {
    auto& q = t.faces()[0];
    double r = 2 * std::sqrt(3.0) - 3;
    for (int k = 0; k < 3; ++k) {
      horo[q[k]] = {std::polar(1.0, kTwoPi * k / 3), r};
      mark(q[k]);
    }
  }

  while (!queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    auto& q = t.faces()[f];
    int missing = -1, count = 0;
    for (int k = 0; k < 3; ++k) {
      if (placed[q[k]]) ++count;
      else missing = k;
    }
    if (count != 2) continue;
    int w = q[missing], x = q[(missing + 1) % 3], y = q[(missing + 2) % 3];
    // (x, y, w) is counterclockwise.
    auto ideal_or_center = [&](int v) { return t.is_boundary(v) ? horo[v].zeta : z[v]; };
    if (!t.is_boundary(x) || !t.is_boundary(y)) {
      bool use_x = !t.is_boundary(x);
      int p = use_x ? x : y, other = use_x ? y : x;
      double phi = std::arg(to_frame(z[p], ideal_or_center(other)));
      double ang = use_x ? triangle_angle(full[x], full[y], full[w]) : triangle_angle(full[y], full[w], full[x]);
      phi += use_x ? ang : -ang;
      cplx dir = std::polar(1.0, phi);
      if (t.is_boundary(w)) {
        horo[w] = horocycle_from_frame(z[p], dir, std::tanh(full[p] / 2) * dir);
      } else {
        z[w] = from_frame(z[p], std::tanh((full[p] + full[w]) / 2) * dir);
      }
    } else {
      cplx zx = horo[x].zeta;
      auto C = [&](cplx u) { return cplx(0, 1) * (zx + u) / (zx - u); };
      auto Cinv = [&](cplx u) { return zx * (u - cplx(0, 1)) / (u + cplx(0, 1)); };
      double H = (1 - horo[x].rho) / horo[x].rho;
      double xy = C(horo[y].zeta).real();
      if (t.is_boundary(w)) {
        double xw = xy + H;
        cplx zeta = Cinv(xw);
        zeta /= std::abs(zeta);
        horo[w] = {zeta, horocycle_radius(zeta, Cinv(cplx(xw, H)))};
      } else {
        double e = std::exp(-2 * full[w]);
        double R = H * (1 - e) / 2, y0 = H * (1 + e) / 2;
        double off = std::sqrt(std::max(0.0, (H / 2 + R) * (H / 2 + R) - (y0 - H / 2) * (y0 - H / 2)));
        z[w] = Cinv(cplx(xy + off, H * std::exp(-full[w])));
      }
    }
    mark(w);
  }
  for (int v = 0; v < n; ++v)
    if (!placed[v]) throw GeometryError("layout did not reach vertex " + std::to_string(t.id(v)));

  out.circles.resize(n);
  for (int v = 0; v < n; ++v) {
    if (t.is_boundary(v)) out.circles[v] = {to_point((1 - horo[v].rho) * horo[v].zeta), horo[v].rho};
    else out.circles[v] = hyperbolic_to_euclidean(z[v], full[v]);
    out.max_radius = std::max(out.max_radius, out.circles[v].radius);
    if (t.is_boundary(v)) {
      out.max_boundary_radius = std::max(out.max_boundary_radius, out.circles[v].radius);
      out.boundary_residual =
          std::max(out.boundary_residual, std::abs(norm(out.circles[v].center) + out.circles[v].radius - 1));
    }
  }
  for (auto& e : t.edges()) {
    auto& a = out.circles[e.a];
    auto& b = out.circles[e.b];
    out.tangency_residual = std::max(out.tangency_residual, std::abs(dist(a.center, b.center) - a.radius - b.radius));
  }
  return out;
}

// ---------------------------------------------------------------- orthodiagonal maps from packings

Circle incircle(Point2 a, Point2 b, Point2 c) {
  double la = dist(b, c), lb = dist(c, a), lc = dist(a, b);
  double area = 0.5 * std::abs(cross(b - a, c - a));
  double s = la + lb + lc;
  if (!(area > 1e-14 * s * s)) throw GeometryError("incircle of a degenerate triangle");
  Point2 center = (1.0 / s) * (la * a + lb * b + lc * c);
  return {center, 2 * area / s};
}

namespace {

Point2 contact(const Circle& a, const Circle& b) {
  Point2 d = b.center - a.center;
  return a.center + (a.radius / norm(d)) * d;
}

Point2 right_normal(Point2 d) {
  double l = norm(d);
  return {d.y / l, -d.x / l};
}

DiskCertificate disk_certificate(const OrthodiagonalMap& map, double mesh_bound, double hausdorff_bound,
                                 const std::vector<Circle>& circles, double delta, int samples) {
  DiskCertificate c;
  c.mesh = mesh_size(map);
  c.mesh_bound = mesh_bound;
  c.hausdorff = hausdorff_distance(map.boundary_polygon(), Domain::unit_disk(), samples);
  c.hausdorff_bound = hausdorff_bound;
  for (auto& ci : circles) {
    if (norm(ci.center) <= 1e-12) c.center_at_origin = true;
    if (norm(ci.center) < 1 - 2 * delta) c.center_in_inner_disk = true;
  }
  return c;
}

}  // namespace

PackedMap orthodiagonal_from_packing(const Triangulation& t, const CirclePacking& p, std::optional<double> eta,
                                     int hausdorff_samples) {
  if (static_cast<int>(p.circles.size()) != t.num_vertices()) throw StructuralError("packing does not match triangulation");
  PackedMap out;
  int n = t.num_vertices();
  int base = *std::max_element(t.ids().begin(), t.ids().end()) + 1;
  std::vector<MapVertex> verts;
  for (int v = 0; v < n; ++v) verts.push_back({t.id(v), p.circles[v].center, Color::Primal});
  int face_base = static_cast<int>(verts.size());
  std::vector<Circle> inc(t.num_faces());
  for (int f = 0; f < t.num_faces(); ++f) {
    auto& q = t.faces()[f];
    inc[f] = incircle(p.circles[q[0]].center, p.circles[q[1]].center, p.circles[q[2]].center);
    verts.push_back({base + f, inc[f].center, Color::Dual});
  }
  // Tangency of the incircle with each side against the contact of the two circles.
  for (int f = 0; f < t.num_faces(); ++f) {
    auto& q = t.faces()[f];
    for (int k = 0; k < 3; ++k) {
      Point2 a = p.circles[q[k]].center, b = p.circles[q[(k + 1) % 3]].center;
      Point2 d = b - a;
      Point2 foot = a + (dot(inc[f].center - a, d) / dot(d, d)) * d;
      double r = dist(foot, contact(p.circles[q[k]], p.circles[q[(k + 1) % 3]]));
      out.tangency_point_residual = std::max(out.tangency_point_residual, r);
    }
  }
  std::map<std::pair<int, int>, int> boundary_index;
  const auto& bd = t.boundary();
  for (std::size_t k = 0; k < bd.size(); ++k) {
    int u = bd[k], w = bd[(k + 1) % bd.size()];
    const Circle &cu = p.circles[u], &cw = p.circles[w];
    double cap = 0.5 * std::min(cu.radius, cw.radius);
    double e = eta.value_or(cap);
    if (e > cap) {
      std::ostringstream msg;
      msg << "eta " << e << " shrunk to " << cap << " on boundary edge " << id_pair(t.id(u), t.id(w));
      out.warnings.push_back(msg.str());
      e = cap;
    }
    if (!(e > 0)) throw GeometryError("boundary offset eta must be positive");
    out.eta.push_back(e);
    Point2 pe = contact(cu, cw) + e * right_normal(cw.center - cu.center);
    boundary_index[{u, w}] = static_cast<int>(verts.size());
    verts.push_back({base + t.num_faces() + static_cast<int>(k), pe, Color::Dual});
  }
  std::vector<Quad> quads;
  for (auto& e : t.edges()) {
    if (e.left >= 0 && e.right >= 0) {
      quads.push_back({e.a, face_base + e.right, e.b, face_base + e.left});
    } else if (e.right < 0) {
      quads.push_back({e.a, boundary_index.at({e.a, e.b}), e.b, face_base + e.left});
    } else {
      quads.push_back({e.b, boundary_index.at({e.b, e.a}), e.a, face_base + e.right});
    }
  }
  out.map = OrthodiagonalMap::from_indices(std::move(verts), std::move(quads));
  out.certificate = disk_certificate(out.map, 2 * p.max_radius, 2 * p.max_boundary_radius, p.circles,
                                     p.max_boundary_radius, hausdorff_samples);
  return out;
}

// ---------------------------------------------------------------- planar maps

PlanarMap3C::PlanarMap3C(std::vector<int> ids, const std::vector<std::vector<int>>& faces_by_id) {
  std::unordered_map<int, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) {
    if (!index.emplace(ids[i], i).second) throw StructuralError("duplicate vertex id " + std::to_string(ids[i]));
  }
  std::vector<std::vector<int>> faces;
  for (auto& f : faces_by_id) {
    std::vector<int> g;
    for (int v : f) {
      auto it = index.find(v);
      if (it == index.end()) throw StructuralError("face refers to unknown vertex id " + std::to_string(v));
      g.push_back(it->second);
    }
    faces.push_back(std::move(g));
  }
  ids_ = std::move(ids);
  faces_ = std::move(faces);
  derive();
}

PlanarMap3C PlanarMap3C::from_indices(std::vector<int> ids, std::vector<std::vector<int>> faces) {
  PlanarMap3C h;
  h.ids_ = std::move(ids);
  for (auto& f : faces)
    for (int v : f)
      if (v < 0 || v >= static_cast<int>(h.ids_.size())) throw StructuralError("face index out of range");
  h.faces_ = std::move(faces);
  h.derive();
  return h;
}

int PlanarMap3C::face_of(int u, int v) const {
  for (auto [head, f] : out_[u])
    if (head == v) return f;
  return -1;
}

std::vector<std::array<int, 2>> PlanarMap3C::edges() const {
  std::vector<std::array<int, 2>> e;
  for (int u = 0; u < num_vertices(); ++u)
    for (auto [v, f] : out_[u])
      if (u < v) e.push_back({u, v});
  return e;
}

std::vector<std::vector<int>> PlanarMap3C::adjacency() const {
  std::vector<std::vector<int>> adj(num_vertices());
  for (int u = 0; u < num_vertices(); ++u)
    for (auto [v, f] : out_[u]) adj[u].push_back(v);
  return adj;
}

void PlanarMap3C::derive() {
  int n = num_vertices();
  out_.assign(n, {});
  for (int f = 0; f < num_faces(); ++f) {
    auto& c = faces_[f];
    if (c.size() < 3) throw StructuralError("face with fewer than 3 vertices");
    std::vector<int> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw StructuralError("face " + std::to_string(f) + " repeats a vertex");
    }
    for (std::size_t k = 0; k < c.size(); ++k) {
      int a = c[k], b = c[(k + 1) % c.size()];
      if (face_of(a, b) >= 0) throw StructuralError("directed edge " + id_pair(ids_[a], ids_[b]) + " used twice");
      out_[a].push_back({b, f});
    }
  }
  std::size_t directed = 0;
  for (int u = 0; u < n; ++u) {
    if (out_[u].empty()) throw StructuralError("vertex " + std::to_string(ids_[u]) + " lies on no face");
    for (auto [v, f] : out_[u]) {
      if (face_of(v, u) < 0) throw StructuralError("edge " + id_pair(ids_[u], ids_[v]) + " borders only one face");
      ++directed;
    }
  }
  int e = static_cast<int>(directed / 2);
  if (n - e + num_faces() != 2) throw StructuralError("faces do not form a map of the sphere (Euler characteristic)");

  rotation_.assign(n, {});
  for (int v = 0; v < n; ++v) {
    int f = out_[v][0].second;
    for (std::size_t k = 0; k <= out_[v].size(); ++k) {
      rotation_[v].push_back(f);
      auto& c = faces_[f];
      std::size_t i = std::find(c.begin(), c.end(), v) - c.begin();
      int pred = c[(i + c.size() - 1) % c.size()];
      f = face_of(v, pred);
      if (f == rotation_[v][0]) break;
    }
    if (rotation_[v].size() != out_[v].size()) {
      throw StructuralError("faces around vertex " + std::to_string(ids_[v]) + " do not form one cycle");
    }
  }
}

bool is_three_connected(const PlanarMap3C& h) {
  int n = h.num_vertices();
  if (n < 4) return false;
  // A simple triangulation of the sphere with at least 4 vertices is 3-connected.
  bool triangles = std::all_of(h.faces().begin(), h.faces().end(), [](auto& f) { return f.size() == 3; });
  if (triangles) return true;
  auto adj = h.adjacency();
  std::vector<char> removed(n, 0), seen(n, 0);
  auto connected_without = [&]() {
    std::fill(seen.begin(), seen.end(), 0);
    int start = -1, total = 0;
    for (int v = 0; v < n; ++v)
      if (!removed[v]) {
        ++total;
        if (start < 0) start = v;
      }
    std::vector<int> stack{start};
    seen[start] = 1;
    int count = 0;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      ++count;
      for (int y : adj[x])
        if (!removed[y] && !seen[y]) {
          seen[y] = 1;
          stack.push_back(y);
        }
    }
    return count == total;
  };
  if (!connected_without()) return false;
  for (int a = 0; a < n; ++a) {
    removed[a] = 1;
    for (int b = a + 1; b < n; ++b) {
      removed[b] = 1;
      bool ok = connected_without();
      removed[b] = 0;
      if (!ok) return false;
    }
    removed[a] = 0;
  }
  return true;
}

// ---------------------------------------------------------------- double packing

namespace {

struct DoubleKinds {
  std::vector<CircleKind> vertex, face;
};

DoubleKinds classify(const PlanarMap3C& h, int outer) {
  DoubleKinds k;
  k.vertex.assign(h.num_vertices(), CircleKind::Finite);
  k.face.assign(h.num_faces(), CircleKind::Finite);
  k.face[outer] = CircleKind::Outer;
  const auto& c = h.faces()[outer];
  for (std::size_t i = 0; i < c.size(); ++i) {
    int a = c[i], b = c[(i + 1) % c.size()];
    k.vertex[a] = CircleKind::Geodesic;
    k.face[h.face_of(b, a)] = CircleKind::Horocycle;
  }
  return k;
}

// Half of the angle that face circle f subtends at finite vertex circle w.
double vertex_half_angle(double hw, double hf, CircleKind fk) {
  double T = fk == CircleKind::Horocycle ? 1.0 : std::tanh(hf);
  return std::atan(T / std::sinh(hw));
}
// Half of the angle that vertex circle w subtends at finite face circle f.
double face_half_angle(double hf, double hw, CircleKind wk) {
  if (wk == CircleKind::Geodesic) return kPi / 2;
  return std::atan(std::tanh(hw) / std::sinh(hf));
}

}  // namespace

std::vector<double> double_angle_sums(const PlanarMap3C& h, int outer_face, const std::vector<double>& vertex_h,
                                      const std::vector<double>& face_h) {
  auto kinds = classify(h, outer_face);
  int V = h.num_vertices();
  std::vector<double> s(V + h.num_faces(), NAN);
  for (int v = 0; v < V; ++v) {
    if (kinds.vertex[v] != CircleKind::Finite) continue;
    s[v] = 0.0;
    for (int f : h.rotation(v)) s[v] += 2 * vertex_half_angle(vertex_h[v], face_h[f], kinds.face[f]);
  }
  for (int f = 0; f < h.num_faces(); ++f) {
    if (kinds.face[f] != CircleKind::Finite) continue;
    s[V + f] = 0.0;
    for (int w : h.faces()[f]) s[V + f] += 2 * face_half_angle(face_h[f], vertex_h[w], kinds.vertex[w]);
  }
  return s;
}

DoubleCirclePacking double_pack(const PlanarMap3C& h, int outer_face, const PackOptions& opt) {
  if (outer_face < 0 || outer_face >= h.num_faces()) throw StructuralError("outer face index out of range");
  if (!is_three_connected(h)) throw GeometryError("planar map is not 3-connected");
  int V = h.num_vertices(), Fn = h.num_faces();
  auto kinds = classify(h, outer_face);

  // Unknown index per node; nodes are vertices 0..V-1 then faces V..V+F-1.
  std::vector<int> unknown_of(V + Fn, -1), node_of;
  for (int v = 0; v < V; ++v)
    if (kinds.vertex[v] == CircleKind::Finite) {
      unknown_of[v] = static_cast<int>(node_of.size());
      node_of.push_back(v);
    }
  for (int f = 0; f < Fn; ++f)
    if (kinds.face[f] == CircleKind::Finite) {
      unknown_of[V + f] = static_cast<int>(node_of.size());
      node_of.push_back(V + f);
    }
  std::vector<double> vh(V, INFINITY), fh(Fn, INFINITY);
  auto spread = [&](const std::vector<double>& x) {
    for (std::size_t i = 0; i < node_of.size(); ++i) {
      int nd = node_of[i];
      if (nd < V) vh[nd] = x[i];
      else fh[nd - V] = x[i];
    }
  };
  auto node_sum = [&](int nd) {
    double s = 0.0;
    if (nd < V) {
      for (int f : h.rotation(nd)) s += 2 * vertex_half_angle(vh[nd], fh[f], kinds.face[f]);
    } else {
      int f = nd - V;
      for (int w : h.faces()[f]) s += 2 * face_half_angle(fh[f], vh[w], kinds.vertex[w]);
    }
    return s;
  };

  AngleSystem sys;
  sys.n = static_cast<int>(node_of.size());
  sys.local_sum = [&](int i, const std::vector<double>& x, double xi) {
    spread(x);
    int nd = node_of[i];
    if (nd < V) vh[nd] = xi;
    else fh[nd - V] = xi;
    return node_sum(nd);
  };
  sys.eval = [&](const std::vector<double>& x, std::vector<double>& F, std::vector<Eigen::Triplet<double>>* J) {
    spread(x);
    F.assign(sys.n, -kTwoPi);
    for (int i = 0; i < sys.n; ++i) {
      int nd = node_of[i];
      F[i] += node_sum(nd);
      if (!J) continue;
      // a = 2 atan(T / S): da = 2 (S dT - T dS) / (S^2 + T^2).
      if (nd < V) {
        double S = std::sinh(vh[nd]), dS = std::cosh(vh[nd]);
        for (int f : h.rotation(nd)) {
          bool horo = kinds.face[f] == CircleKind::Horocycle;
          double T = horo ? 1.0 : std::tanh(fh[f]);
          double den = S * S + T * T;
          J->emplace_back(i, i, -2 * T * dS / den);
          if (!horo) J->emplace_back(i, unknown_of[V + f], 2 * S * (1 - T * T) / den);
        }
      } else {
        int f = nd - V;
        double S = std::sinh(fh[f]), dS = std::cosh(fh[f]);
        for (int w : h.faces()[f]) {
          if (kinds.vertex[w] == CircleKind::Geodesic) continue;
          double T = std::tanh(vh[w]);
          double den = S * S + T * T;
          J->emplace_back(i, i, -2 * T * dS / den);
          J->emplace_back(i, unknown_of[w], 2 * S * (1 - T * T) / den);
        }
      }
    }
  };

  DoubleCirclePacking out;
  out.outer_face = outer_face;
  out.vertex_kind = kinds.vertex;
  out.face_kind = kinds.face;
  std::vector<double> x(sys.n, 1.0);
  double residual = 0.0;
  out.iterations = solve_angle_system(sys, x, opt, residual);
  out.angle_residual = residual;
  spread(x);
  out.vertex_h = vh;
  out.face_h = fh;

  // Layout by breadth-first placement over finite circles, each expanding its cycle of neighbours.
  auto finite = [&](int nd) { return nd < V ? kinds.vertex[nd] == CircleKind::Finite : kinds.face[nd - V] == CircleKind::Finite; };
  auto radius_of = [&](int nd) { return nd < V ? vh[nd] : fh[nd - V]; };
  struct Entry {
    int node;
    double pos;
    bool tangent;  // tangent neighbour (same class) rather than orthogonal one
  };
  auto cycle_of = [&](int nd) {
    std::vector<Entry> c;
    double pos = 0.0;
    if (nd < V) {
      const auto& rot = h.rotation(nd);
      for (std::size_t i = 0; i < rot.size(); ++i) {
        int f = rot[i];
        double th = vertex_half_angle(vh[nd], fh[f], kinds.face[f]);
        if (i > 0) pos += th;
        c.push_back({V + f, pos, false});
        pos += th;
        const auto& fc = h.faces()[f];
        std::size_t k = std::find(fc.begin(), fc.end(), nd) - fc.begin();
        c.push_back({fc[(k + fc.size() - 1) % fc.size()], pos, true});
      }
    } else {
      int f = nd - V;
      const auto& fc = h.faces()[f];
      for (std::size_t i = 0; i < fc.size(); ++i) {
        int w = fc[i], w2 = fc[(i + 1) % fc.size()];
        double ps = face_half_angle(fh[f], vh[w], kinds.vertex[w]);
        if (i > 0) pos += ps;
        c.push_back({w, pos, false});
        pos += ps;
        c.push_back({V + h.face_of(w2, w), pos, true});
      }
    }
    return c;
  };

  std::vector<char> placed(V + Fn, 0);
  std::vector<cplx> z(V + Fn);
  std::vector<Horo> horo(V + Fn);
  std::vector<int> parent(V + Fn, -1);
  int seed = -1;
  for (int v = 0; v < V && seed < 0; ++v)
    if (finite(v)) seed = v;
  if (seed < 0) throw GeometryError("double packing has no finite vertex circle to anchor the layout");
  z[seed] = 0.0;
  placed[seed] = 1;
  std::deque<int> queue{seed};
  while (!queue.empty()) {
    int X = queue.front();
    queue.pop_front();
    auto cyc = cycle_of(X);
    double shift = 0.0;
    if (parent[X] >= 0) {
      double anchor = std::arg(to_frame(z[X], z[parent[X]]));
      for (auto& e : cyc)
        if (e.node == parent[X]) shift = anchor - e.pos;
    }
    double hx = radius_of(X);
    double tx = std::tanh(hx / 2);
    for (auto& e : cyc) {
      int Y = e.node;
      if (placed[Y]) continue;
      bool is_vertex = Y < V;
      CircleKind ky = is_vertex ? kinds.vertex[Y] : kinds.face[Y - V];
      if (ky == CircleKind::Geodesic || ky == CircleKind::Outer) continue;
      cplx dir = std::polar(1.0, e.pos + shift);
      if (ky == CircleKind::Horocycle) {
        cplx on = e.tangent ? tx * dir : tx * tx * dir;
        horo[Y] = horocycle_from_frame(z[X], dir, on);
        placed[Y] = 1;
        continue;
      }
      double hy = radius_of(Y);
      double d = e.tangent ? hx + hy : std::acosh(std::cosh(hx) * std::cosh(hy));
      z[Y] = from_frame(z[X], std::tanh(d / 2) * dir);
      placed[Y] = 1;
      parent[Y] = X;
      queue.push_back(Y);
    }
  }

  out.vertex_circles.resize(V);
  out.face_circles.resize(Fn);
  for (int f = 0; f < Fn; ++f) {
    int nd = V + f;
    if (kinds.face[f] == CircleKind::Outer) {
      out.face_circles[f] = {{0, 0}, 1.0};
      continue;
    }
    if (!placed[nd]) throw GeometryError("layout did not reach face " + std::to_string(f));
    if (kinds.face[f] == CircleKind::Horocycle) out.face_circles[f] = {to_point((1 - horo[nd].rho) * horo[nd].zeta), horo[nd].rho};
    else out.face_circles[f] = hyperbolic_to_euclidean(z[nd], fh[f]);
  }
  for (int v = 0; v < V; ++v) {
    if (kinds.vertex[v] == CircleKind::Finite) {
      if (!placed[v]) throw GeometryError("layout did not reach vertex " + std::to_string(h.id(v)));
      out.vertex_circles[v] = hyperbolic_to_euclidean(z[v], vh[v]);
    }
  }
  // Geodesic circles pass through the ideal points of the horocycles across their two outer edges.
  const auto& oc = h.faces()[outer_face];
  for (std::size_t i = 0; i < oc.size(); ++i) {
    int w = oc[i];
    int next = oc[(i + 1) % oc.size()], prev = oc[(i + oc.size() - 1) % oc.size()];
    cplx a = horo[V + h.face_of(next, w)].zeta, b = horo[V + h.face_of(w, prev)].zeta;
    cplx s = a + b;
    if (std::abs(s) < 1e-12) throw GeometryError("outer vertex circle degenerates to a line in this normalization");
    cplx c = 2.0 * s / std::norm(s);
    out.vertex_circles[w] = {to_point(c), std::sqrt(std::max(0.0, std::norm(c) - 1.0))};
  }

  // Contact points and residuals.
  auto ortho = [](Point2 q, const Circle& a, const Circle& b) {
    Point2 u = q - a.center, v = q - b.center;
    return std::abs(dot(u, v)) / (norm(u) * norm(v));
  };
  for (auto [u, v] : h.edges()) {
    DoubleCirclePacking::EdgePoint ep;
    ep.u = u;
    ep.v = v;
    ep.left = h.face_of(u, v);
    ep.right = h.face_of(v, u);
    const Circle &cu = out.vertex_circles[u], &cv = out.vertex_circles[v];
    ep.q = contact(cu, cv);
    out.tangency_residual =
        std::max(out.tangency_residual, std::abs(dist(cu.center, cv.center) - cu.radius - cv.radius) / std::max(cu.radius, cv.radius));
    const Circle &fl = out.face_circles[ep.left], &fr = out.face_circles[ep.right];
    Point2 qf;
    if (ep.left == outer_face || ep.right == outer_face) {
      const Circle& in = ep.left == outer_face ? fr : fl;
      qf = (1.0 / norm(in.center)) * in.center;
      out.tangency_residual = std::max(out.tangency_residual, std::abs(norm(in.center) + in.radius - 1.0) / in.radius);
    } else {
      qf = contact(fl, fr);
      out.tangency_residual =
          std::max(out.tangency_residual, std::abs(dist(fl.center, fr.center) - fl.radius - fr.radius) / std::max(fl.radius, fr.radius));
    }
    out.contact_residual = std::max(out.contact_residual, dist(ep.q, qf));
    for (const Circle* a : {&cu, &cv})
      for (const Circle* b : {&fl, &fr}) out.orthogonality_residual = std::max(out.orthogonality_residual, ortho(ep.q, *a, *b));
    out.edge_points.push_back(ep);
  }
  return out;
}

PackedMap orthodiagonal_from_double_packing(const PlanarMap3C& h, const DoubleCirclePacking& dp, std::optional<double> eta,
                                            int hausdorff_samples) {
  PackedMap out;
  int V = h.num_vertices();
  int base = *std::max_element(h.ids().begin(), h.ids().end()) + 1;
  std::vector<MapVertex> verts;
  for (int v = 0; v < V; ++v) verts.push_back({h.id(v), dp.vertex_circles[v].center, Color::Primal});
  std::vector<int> face_vertex(h.num_faces(), -1);
  for (int f = 0; f < h.num_faces(); ++f) {
    if (f == dp.outer_face) continue;
    face_vertex[f] = static_cast<int>(verts.size());
    verts.push_back({base + f, dp.face_circles[f].center, Color::Dual});
  }
  int next_id = base + h.num_faces();
  std::vector<Quad> quads;
  double max_r = 0.0, max_outer_r = 0.0;
  for (int v = 0; v < V; ++v) {
    max_r = std::max(max_r, dp.vertex_circles[v].radius);
    if (dp.vertex_kind[v] == CircleKind::Geodesic) max_outer_r = std::max(max_outer_r, dp.vertex_circles[v].radius);
  }
  for (int f = 0; f < h.num_faces(); ++f)
    if (f != dp.outer_face) max_r = std::max(max_r, dp.face_circles[f].radius);
  for (auto& ep : dp.edge_points) {
    if (ep.left != dp.outer_face && ep.right != dp.outer_face) {
      quads.push_back({ep.u, face_vertex[ep.right], ep.v, face_vertex[ep.left]});
      continue;
    }
    // Orient so that a -> b has the inner face on its left.
    int a = ep.left == dp.outer_face ? ep.v : ep.u;
    int b = ep.left == dp.outer_face ? ep.u : ep.v;
    int inner = ep.left == dp.outer_face ? ep.right : ep.left;
    const Circle &ca = dp.vertex_circles[a], &cb = dp.vertex_circles[b];
    double cap = 0.5 * std::min(ca.radius, cb.radius);
    double e = eta.value_or(cap);
    if (e > cap) {
      std::ostringstream msg;
      msg << "eta " << e << " shrunk to " << cap << " on outer edge " << id_pair(h.id(a), h.id(b));
      out.warnings.push_back(msg.str());
      e = cap;
    }
    out.eta.push_back(e);
    Point2 q = ep.q;
    Point2 pe = q + e * (1.0 / norm(q)) * q;
    int idx = static_cast<int>(verts.size());
    verts.push_back({next_id++, pe, Color::Dual});
    quads.push_back({a, idx, b, face_vertex[inner]});
  }
  out.map = OrthodiagonalMap::from_indices(std::move(verts), std::move(quads));
  std::vector<Circle> all = dp.vertex_circles;
  for (int f = 0; f < h.num_faces(); ++f)
    if (f != dp.outer_face) all.push_back(dp.face_circles[f]);
  out.certificate = disk_certificate(out.map, 2 * max_r, max_outer_r, all, max_outer_r, hausdorff_samples);
  return out;
}

// ---------------------------------------------------------------- svg

std::string packing_svg(const std::vector<Circle>& circles, const OrthodiagonalMap* map) {
  double x0 = -1, y0 = -1, x1 = 1, y1 = 1;
  for (auto& c : circles) {
    x0 = std::min(x0, c.center.x - c.radius);
    x1 = std::max(x1, c.center.x + c.radius);
    y0 = std::min(y0, c.center.y - c.radius);
    y1 = std::max(y1, c.center.y + c.radius);
  }
  double w = x1 - x0, hgt = y1 - y0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << x0 << ' ' << -y1 << ' ' << w << ' ' << hgt
    << "\" width=\"800\" height=\"" << 800 * hgt / w << "\">\n";
  double stroke = 0.002 * std::max(w, hgt);
  s << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#888\" stroke-width=\"" << stroke << "\"/>\n";
  for (auto& c : circles) {
    s << "<circle cx=\"" << c.center.x << "\" cy=\"" << -c.center.y << "\" r=\"" << c.radius
      << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"" << stroke << "\"/>\n";
  }
  if (map) {
    for (int f = 0; f < map->num_faces(); ++f) {
      s << "<polygon fill=\"none\" stroke=\"#d62728\" stroke-width=\"" << stroke << "\" points=\"";
      for (auto& p : map->face_polygon(f)) s << p.x << ',' << -p.y << ' ';
      s << "\"/>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace odmap
