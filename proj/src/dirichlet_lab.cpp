#include "odmap/dirichlet_lab.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "odmap/errors.hpp"

namespace odmap {

namespace {

using cplx = std::complex<double>;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Largest |z| over a box is attained at a corner.
double max_modulus(const Box& b) {
  double m = 0.0;
  for (double x : {b.x0, b.x1})
    for (double y : {b.y0, b.y1}) m = std::max(m, std::hypot(x, y));
  return m;
}

// f = Re F. Derivatives of F give the gradient (F' conjugated) and the Hessian rows.
TestFunction from_analytic(const std::string& name, std::function<cplx(cplx)> F, std::function<cplx(cplx)> dF,
                           std::function<cplx(cplx)> d2F, std::function<double(const Box&)> grad_sup,
                           std::function<double(const Box&)> hess_sup) {
  TestFunction t;
  t.name = name;
  t.value = [F](Point2 p) { return F(to_complex(p)).real(); };
  t.conjugate = [F](Point2 p) { return F(to_complex(p)).imag(); };
  t.gradient = [dF](Point2 p) {
    cplx d = dF(to_complex(p));
    return Point2{d.real(), -d.imag()};
  };
  t.hessian = [d2F](Point2 p) {
    cplx d = d2F(to_complex(p));
    return std::array<double, 3>{d.real(), -d.imag(), -d.real()};
  };
  t.grad_sup = std::move(grad_sup);
  t.hess_sup = std::move(hess_sup);
  return t;
}

}  // namespace

Box bounding_box(const std::vector<Point2>& pts) {
  if (pts.empty()) throw GeometryError("bounding box of an empty point set");
  Box b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (auto& p : pts) {
    b.x0 = std::min(b.x0, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.x1 = std::max(b.x1, p.x);
    b.y1 = std::max(b.y1, p.y);
  }
  return b;
}

Box box_union(const Box& a, const Box& b) {
  return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

const std::vector<std::string>& test_function_names() {
  static const std::vector<std::string> names = {"coord_x", "coord_y", "xy",         "x2_minus_y2",
                                                 "re_z3",   "im_z3",   "exp_x_cos_y"};
  return names;
}

TestFunction test_function(const std::string& name) {
  const cplx I(0, 1);
  auto one = [](const Box&) { return 1.0; };
  auto zero = [](const Box&) { return 0.0; };
  if (name == "coord_x") {
    return from_analytic(name, [](cplx z) { return z; }, [](cplx) { return cplx(1); }, [](cplx) { return cplx(0); },
                         one, zero);
  }
  if (name == "coord_y") {
    return from_analytic(name, [I](cplx z) { return -I * z; }, [I](cplx) { return -I; },
                         [](cplx) { return cplx(0); }, one, zero);
  }
  if (name == "xy") {
    return from_analytic(name, [I](cplx z) { return -0.5 * I * z * z; }, [I](cplx z) { return -I * z; },
                         [I](cplx) { return -I; }, max_modulus, one);
  }
  if (name == "x2_minus_y2") {
    return from_analytic(name, [](cplx z) { return z * z; }, [](cplx z) { return 2.0 * z; },
                         [](cplx) { return cplx(2); }, [](const Box& b) { return 2 * max_modulus(b); },
                         [](const Box&) { return 2.0; });
  }
  if (name == "re_z3" || name == "im_z3") {
    cplx s = name == "re_z3" ? cplx(1) : -I;
    return from_analytic(name, [s](cplx z) { return s * z * z * z; }, [s](cplx z) { return 3.0 * s * z * z; },
                         [s](cplx z) { return 6.0 * s * z; },
                         [](const Box& b) { return 3 * std::pow(max_modulus(b), 2); },
                         [](const Box& b) { return 6 * max_modulus(b); });
  }
  if (name == "exp_x_cos_y") {
    auto e = [](cplx z) { return std::exp(z); };
    auto sup = [](const Box& b) { return std::exp(b.x1); };
    return from_analytic(name, e, e, e, sup, sup);
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

// ---------------------------------------------------------------- solver

namespace {

DirichletSolution solve_with(const OrthodiagonalMap& map, const std::function<double(int)>& g_of_map_vertex,
                             const SolverOptions& opt) {
  DirichletSolution s;
  s.primal = primal_network(map);
  const Network& net = s.primal.net;
  s.boundary = primal_boundary_flags(map, s.primal);
  VertexFunction g(net.num_vertices(), 0.0);
  double gmax = 0.0;
  for (int x = 0; x < net.num_vertices(); ++x) {
    if (!s.boundary[x]) continue;
    g[x] = g_of_map_vertex(s.primal.map_vertex[x]);
    gmax = std::max(gmax, std::abs(g[x]));
  }
  if (std::count(s.boundary.begin(), s.boundary.end(), 0) == 0) {
    s.h = g;
    return s;
  }
  DirichletProblem prob{&net, s.boundary, g};
  s.h = harmonic_extension(prob, opt, &s.stats);
  double scale = gmax > 0 ? gmax : 1.0;
  for (int x = 0; x < net.num_vertices(); ++x) {
    if (s.boundary[x]) continue;
    double lap = 0.0;
    for (int e : net.incident(x)) lap += net.conductance(e) * (s.h[net.other_end(e, x)] - s.h[x]);
    s.residual = std::max(s.residual, std::abs(lap) / (net.pi(x) * scale));
  }
  return s;
}

}  // namespace

DirichletSolution solve_dirichlet(const OrthodiagonalMap& map, const TestFunction& g, const SolverOptions& opt) {
  return solve_with(map, [&](int v) { return g.value(map.pos(v)); }, opt);
}

DirichletSolution solve_dirichlet(const OrthodiagonalMap& map, const std::map<int, double>& boundary_values,
                                  const SolverOptions& opt) {
  return solve_with(
      map,
      [&](int v) {
        auto it = boundary_values.find(map.id(v));
        if (it == boundary_values.end()) {
          throw StructuralError("boundary table has no value for primal vertex " + std::to_string(map.id(v)));
        }
        return it->second;
      },
      opt);
}

// ---------------------------------------------------------------- energies

double triangle_integral(Point2 a, Point2 b, Point2 c, const std::function<double(Point2)>& q, int n) {
  double twice_area = std::abs(cross(b - a, c - a));
  auto integrand = [&](auto rule) {
    return rule.integrate(
        [&](double s) {
          return s * rule.integrate([&](double t) { return q(a + s * (b - a) + (s * t) * (c - b)); }, 0.0, 1.0);
        },
        0.0, 1.0);
  };
  namespace bq = boost::math::quadrature;
  double v;
  switch (n) {
    case 7: v = integrand(bq::gauss<double, 7>()); break;
    case 10: v = integrand(bq::gauss<double, 10>()); break;
    case 15: v = integrand(bq::gauss<double, 15>()); break;
    case 20: v = integrand(bq::gauss<double, 20>()); break;
    case 30: v = integrand(bq::gauss<double, 30>()); break;
    default: throw std::invalid_argument("unsupported quadrature size " + std::to_string(n));
  }
  return twice_area * v;
}

double gradient_energy_integral(const OrthodiagonalMap& map, const TestFunction& f, int* points_used) {
  auto q = [&](Point2 p) {
    Point2 g = f.gradient(p);
    return dot(g, g);
  };
  auto total = [&](int n) {
    double s = 0.0;
    for (int k = 0; k < map.num_faces(); ++k) {
      auto P = map.face_polygon(k);
      // Split along a diagonal that leaves both halves positively oriented.
      bool along_v = cross(P[1] - P[0], P[2] - P[0]) > 0 && cross(P[3] - P[2], P[0] - P[2]) > 0;
      if (along_v) {
        s += triangle_integral(P[0], P[1], P[2], q, n) + triangle_integral(P[2], P[3], P[0], q, n);
      } else {
        s += triangle_integral(P[1], P[2], P[3], q, n) + triangle_integral(P[3], P[0], P[1], q, n);
      }
    }
    return s;
  };
  const int sizes[] = {7, 10, 15, 20, 30};
  double prev = total(sizes[0]);
  for (int i = 1; i < 5; ++i) {
    double cur = total(sizes[i]);
    if (std::abs(cur - prev) <= 1e-10 * std::max(1.0, std::abs(cur))) {
      if (points_used) *points_used = sizes[i];
      return cur;
    }
    prev = cur;
  }
  throw ConvergenceError("quadrature of |grad f|^2 did not settle", 0.0);
}

namespace {

Box map_box(const OrthodiagonalMap& map) {
  std::vector<Point2> pts;
  pts.reserve(map.num_vertices());
  for (auto& v : map.vertices()) pts.push_back(v.pos);
  return bounding_box(pts);
}

VertexFunction restrict_values(const OrthodiagonalMap& map, const MapNetwork& mn, const TestFunction& f) {
  VertexFunction out(mn.net.num_vertices());
  for (int x = 0; x < mn.net.num_vertices(); ++x) out[x] = f.value(map.pos(mn.map_vertex[x]));
  return out;
}

}  // namespace

EnergyPair energy_pair_check(const OrthodiagonalMap& map, const TestFunction& f) {
  EnergyPair r;
  auto P = primal_network(map);
  auto D = dual_network(map);
  r.primal = energy_of_function(P.net, restrict_values(map, P, f));
  r.dual = energy_of_function(D.net, restrict_values(map, D, f));
  r.integral = gradient_energy_integral(map, f);
  r.discrepancy = 0.5 * (r.primal + r.dual) - r.integral;
  Box b = map_box(map);
  r.L = f.grad_sup(b);
  r.M = f.hess_sup(b);
  r.eps = mesh_size(map);
  r.area = map.area();
  r.bound = r.area * (10 * r.L * r.M * r.eps + 8 * r.M * r.M * r.eps * r.eps);
  return r;
}

EnergyConvergence energy_convergence_check(const OrthodiagonalMap& map, const TestFunction& f,
                                           const DirichletSolution& sol) {
  EnergyConvergence r;
  VertexFunction diff = restrict_values(map, sol.primal, f);
  for (std::size_t x = 0; x < diff.size(); ++x) diff[x] -= sol.h[x];
  r.lhs = energy_of_function(sol.primal.net, diff);
  r.M = f.hess_sup(map_box(map));
  r.eps = mesh_size(map);
  r.area = map.area();
  r.rhs = 32 * r.area * r.M * r.M * r.eps * r.eps;
  return r;
}

EnergyConvergence energy_convergence_check(const OrthodiagonalMap& map, const TestFunction& f,
                                           const SolverOptions& opt) {
  return energy_convergence_check(map, f, solve_dirichlet(map, f, opt));
}

double sup_error(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, const DirichletSolution& sol) {
  double worst = 0.0;
  for (int x = 0; x < sol.primal.net.num_vertices(); ++x) {
    Point2 p = map.pos(sol.primal.map_vertex[x]);
    if (!domain.contains(p)) continue;
    worst = std::max(worst, std::abs(sol.h[x] - f.value(p)));
  }
  return worst;
}

double sup_error(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, const SolverOptions& opt) {
  return sup_error(map, domain, f, solve_dirichlet(map, f, opt));
}

double thm1_shape(const OrthodiagonalMap& map, const Domain& domain, const TestFunction& f, double eps, double delta) {
  Box b;
  domain.bounding_box(b.x0, b.y0, b.x1, b.y1);
  b = box_union(b, map_box(map));
  double diam = domain.diameter();
  double lg = std::log(diam / std::max(delta, eps));
  if (!(lg > 0)) throw GeometryError("mesh too coarse for the convergence shape: diam / max(delta, eps) <= 1");
  return diam * (f.grad_sup(b) + f.hess_sup(b) * eps) / std::sqrt(lg);
}

// ---------------------------------------------------------------- sweeps

Domain sweep_domain(const GeneratorSpec& spec) {
  if (spec.family == "packed_triangulation" || spec.family == "double_packed") return Domain::unit_disk();
  return spec.domain;
}

namespace {

SweepRecord run_level(const GeneratorSpec& base, int n, const TestFunction& f, const SolverOptions& opt) {
  SweepRecord r;
  r.family = base.family;
  r.n = n;
  auto t0 = std::chrono::steady_clock::now();
  try {
    GeneratorSpec spec = base;
    spec.n = n;
    OrthodiagonalMap map = generate(spec);
    Domain domain = sweep_domain(spec);
    r.eps = mesh_size(map);
    r.delta = hausdorff_delta(map, domain);
    auto sol = solve_dirichlet(map, f, opt);
    r.sup_error = sup_error(map, domain, f, sol);
    auto ec = energy_convergence_check(map, f, sol);
    r.energy_error = ec.lhs;
    r.prop52_bound = ec.rhs;
    auto ep = energy_pair_check(map, f);
    r.prop51_disc = ep.discrepancy;
    r.prop51_bound = ep.bound;
    r.thm1_shape = thm1_shape(map, domain, f, r.eps, r.delta);
  } catch (const std::exception& e) {
    r.error = e.what();
    r.eps = r.delta = r.sup_error = r.energy_error = r.prop52_bound = kNaN;
    r.prop51_disc = r.prop51_bound = r.thm1_shape = kNaN;
  }
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::vector<SweepRecord> convergence_sweep(const GeneratorSpec& base, const std::vector<int>& levels,
                                           const TestFunction& f, int threads, const SolverOptions& opt) {
  if (levels.size() < 2) throw std::invalid_argument("a sweep needs at least 2 levels");
  std::vector<SweepRecord> out(levels.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next++) < levels.size();) out[i] = run_level(base, levels[i], f, opt);
  };
  int t = std::clamp<int>(threads, 1, static_cast<int>(levels.size()));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream s;
  s.precision(17);
  s << "family,n,eps,delta,sup_error,energy_error,prop52_bound,prop51_disc,prop51_bound,thm1_shape,runtime_ms,error\n";
  for (auto& r : records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    s << r.family << ',' << r.n << ',' << r.eps << ',' << r.delta << ',' << r.sup_error << ',' << r.energy_error << ','
      << r.prop52_bound << ',' << r.prop51_disc << ',' << r.prop51_bound << ',' << r.thm1_shape << ','
      << r.runtime_ms << ",\"" << err << "\"\n";
  }
  return s.str();
}

// ---------------------------------------------------------------- exit measure

double disk_arc_measure(Point2 z, double a, double b) {
  if (!(norm(z) < 1)) throw GeometryError("start point must lie in the open unit disk");
  constexpr double two_pi = 2 * std::numbers::pi;
  if (b - a >= two_pi) return 1.0;
  if (b <= a) return 0.0;
  cplx w = to_complex(z);
  auto image = [&](double t) {
    cplx u = std::polar(1.0, t);
    return std::arg((u - w) / (1.0 - std::conj(w) * u));
  };
  double d = std::fmod(image(b) - image(a), two_pi);
  if (d < 0) d += two_pi;
  return d / two_pi;
}

HarmonicMeasureComparison harmonic_measure_compare(const OrthodiagonalMap& map, int start_vertex, int arcs,
                                                   const SolverOptions& opt) {
  if (arcs < 1) throw std::invalid_argument("need at least one arc");
  auto mn = primal_network(map);
  auto flags = primal_boundary_flags(map, mn);
  if (start_vertex < 0 || start_vertex >= map.num_vertices() || mn.net_vertex[start_vertex] < 0 ||
      flags[mn.net_vertex[start_vertex]]) {
    throw GeometryError("exit measure start must be an interior primal vertex");
  }
  DirichletProblem prob{&mn.net, flags, VertexFunction(mn.net.num_vertices(), 0.0)};
  auto em = exit_measure_exact(prob, mn.net_vertex[start_vertex], opt);
  constexpr double two_pi = 2 * std::numbers::pi;
  HarmonicMeasureComparison r;
  r.exit_arcs.assign(arcs, 0.0);
  r.harmonic_arcs.assign(arcs, 0.0);
  for (std::size_t i = 0; i < em.boundary.size(); ++i) {
    Point2 p = map.pos(mn.map_vertex[em.boundary[i]]);
    double t = std::atan2(p.y, p.x);
    if (t < 0) t += two_pi;
    int j = std::min(arcs - 1, static_cast<int>(t / (two_pi / arcs)));
    r.exit_arcs[j] += em.probability[i];
  }
  Point2 z = map.pos(start_vertex);
  r.start_offset = norm(z);
  for (int j = 0; j < arcs; ++j) {
    r.harmonic_arcs[j] = disk_arc_measure(z, two_pi * j / arcs, two_pi * (j + 1) / arcs);
    r.tv += 0.5 * std::abs(r.exit_arcs[j] - r.harmonic_arcs[j]);
  }
  return r;
}

}  // namespace odmap
