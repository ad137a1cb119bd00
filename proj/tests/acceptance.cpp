// Acceptance run: one PASS/FAIL line per criterion, INFO lines underneath.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/dirichlet_lab.hpp"
#include "odmap/flows.hpp"
#include "odmap/generators.hpp"
#include "odmap/network.hpp"
#include "odmap/packing.hpp"

using namespace odmap;

namespace {

struct Outcome {
  bool pass = true;
  // A failure the ledger explains; the run still exits 0 for these.
  bool known_failure = false;
  std::vector<std::string> info;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<int> kSweep = {8, 16, 32, 64};

OrthodiagonalMap packed_map(int k, std::uint64_t seed = 1) {
  GeneratorSpec s;
  s.family = "packed_triangulation";
  s.n = k;
  s.seed = seed;
  return generate(s);
}

int nearest_primal(const OrthodiagonalMap& m, Point2 p, bool interior_only) {
  int best = -1;
  for (int v : interior_only ? m.interior_primal() : m.primal_vertices())
    if (best < 0 || dist(m.pos(v), p) < dist(m.pos(best), p)) best = v;
  return best;
}

// ---------------------------------------------------------------- 1

Outcome martingale() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, OrthodiagonalMap>> maps;
  for (int n : {8, 16, 32, 64, 128}) maps.push_back({fmt("rotated_grid n=%d", n), rotated_grid(Domain::unit_square(), n)});
  for (int n : {8, 16, 32, 64, 128}) maps.push_back({fmt("rotated_grid disk n=%d", n), rotated_grid(Domain::unit_disk(), n)});
  for (std::uint64_t seed : {1u, 2u, 3u})
    for (double a : {0.3, 0.7})
      maps.push_back({fmt("perturbed n=40 a=%.1f seed=%d", a, int(seed)),
                      perturbed(rotated_grid(Domain::unit_square(), 40), a, seed)});
  for (std::uint64_t seed : {1u, 2u, 3u}) maps.push_back({fmt("packed k=13 seed=%d", int(seed)), packed_map(13, seed)});
  double worst = 0;
  for (auto& [name, m] : maps) {
    double r = martingale_residual(m);
    worst = std::max(worst, r);
    if (!(r <= 1e-9)) {
      o.pass = false;
      o.info.push_back(fmt("%s residual %.3e", name.c_str(), r));
    }
  }
  int packed_vertices = static_cast<int>(maps.back().second.primal_vertices().size());
  double secs = seconds_since(t0);
  o.pass = o.pass && packed_vertices >= 500 && secs < 10;
  o.info.push_back(fmt("%zu maps, worst residual / (pi eps) %.3e, packed primal vertices %d, %.2f s", maps.size(), worst,
                       packed_vertices, secs));
  return o;
}

// ---------------------------------------------------------------- 2, 3, 4 share the sweep

struct SweepData {
  std::vector<OrthodiagonalMap> maps;
  std::vector<EnergyConvergence> ec;
  std::vector<double> sup, shape, hd_gap;
  double seconds = 0;
};

SweepData run_sweep(const TestFunction& f) {
  SweepData d;
  auto t0 = std::chrono::steady_clock::now();
  for (int n : kSweep) {
    auto m = rotated_grid(Domain::unit_square(), n);
    auto sol = solve_dirichlet(m, f);
    d.ec.push_back(energy_convergence_check(m, f, sol));
    d.sup.push_back(sup_error(m, Domain::unit_square(), f, sol));
    double gap = 0;
    for (int i = 0; i < sol.primal.net.num_vertices(); ++i)
      gap = std::max(gap, std::abs(sol.h[i] - f.value(m.pos(sol.primal.map_vertex[i]))));
    d.hd_gap.push_back(gap);
    double eps = mesh_size(m);
    d.shape.push_back(thm1_shape(m, Domain::unit_square(), f, eps, hausdorff_delta(m, Domain::unit_square())));
    d.maps.push_back(std::move(m));
  }
  d.seconds = seconds_since(t0);
  return d;
}

Outcome energy_convergence(const SweepData& s, const SweepData& exp_data) {
  Outcome o;
  bool bounds = true, ratios = true;
  for (std::size_t k = 0; k < kSweep.size(); ++k) {
    auto& c = s.ec[k];
    double rhs = 32 * c.area * 4 * c.eps * c.eps;
    bool ok = c.M == 2.0 && c.lhs <= rhs;
    bounds = bounds && ok;
    o.info.push_back(fmt("n=%d E(hc-hd)=%.3e bound 32*area*4*eps^2=%.3e%s", kSweep[k], c.lhs, rhs, ok ? "" : " VIOLATED"));
  }
  for (std::size_t k = 0; k + 1 < kSweep.size(); ++k) {
    double r = s.ec[k].lhs / s.ec[k + 1].lhs;
    bool ok = r >= 2;
    ratios = ratios && ok;
    o.info.push_back(fmt("E(%d)/E(%d) = %.3g%s", kSweep[k], kSweep[k + 1], r, ok ? "" : " < 2"));
  }
  bool fast = s.seconds < 30;
  o.pass = bounds && ratios && fast;
  double worst_gap = *std::max_element(s.hd_gap.begin(), s.hd_gap.end());
  o.info.push_back(fmt("max |h_d - g| over the sweep %.3e: x^2-y^2 is exactly discrete harmonic on the square lattice", worst_gap));
  for (std::size_t k = 0; k < kSweep.size(); ++k)
    o.info.push_back(fmt("exp_x_cos_y n=%d E(hc-hd)=%.3e bound %.3e", kSweep[k], exp_data.ec[k].lhs, exp_data.ec[k].rhs));
  for (std::size_t k = 0; k + 1 < kSweep.size(); ++k)
    o.info.push_back(fmt("exp_x_cos_y E(%d)/E(%d) = %.3g", kSweep[k], kSweep[k + 1], exp_data.ec[k].lhs / exp_data.ec[k + 1].lhs));
  o.info.push_back(fmt("%.2f s", s.seconds));
  o.known_failure = !o.pass && bounds && fast && worst_gap <= 1e-10;
  return o;
}

Outcome energy_pairs(const SweepData& s) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  for (const char* name : {"x2_minus_y2", "exp_x_cos_y"}) {
    auto f = test_function(name);
    for (std::size_t k = 0; k < kSweep.size(); ++k) {
      auto e = energy_pair_check(s.maps[k], f);
      double bound = e.area * (10 * e.L * e.M * e.eps + 8 * e.M * e.M * e.eps * e.eps);
      bool ok = std::abs(e.discrepancy) <= bound;
      o.pass = o.pass && ok;
      o.info.push_back(fmt("%s n=%d |disc|=%.3e bound=%.3e%s", name, kSweep[k], std::abs(e.discrepancy), bound,
                           ok ? "" : " VIOLATED"));
    }
  }
  double worst_linear = 0;
  for (std::size_t k = 0; k < kSweep.size(); ++k)
    worst_linear = std::max(worst_linear, std::abs(energy_pair_check(s.maps[k], test_function("coord_x")).discrepancy));
  o.pass = o.pass && worst_linear <= 1e-12;
  o.info.push_back(fmt("coord_x worst |disc| %.3e, %.2f s", worst_linear, seconds_since(t0)));
  return o;
}

Outcome sup_rates(const SweepData& s, const SweepData& exp_data) {
  Outcome o;
  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < s.sup.size(); ++k) decreasing = decreasing && s.sup[k + 1] < s.sup[k];
  bool quarter = s.sup.back() <= s.sup.front() / 4;
  std::vector<double> ratio;
  for (std::size_t k = 0; k < s.sup.size(); ++k) ratio.push_back(s.sup[k] / s.shape[k]);
  double spread = *std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end());
  bool bounded = spread <= 5;
  o.pass = decreasing && quarter && bounded;
  std::string line = "x2_minus_y2 sup_error:";
  for (double v : s.sup) line += fmt(" %.3e", v);
  o.info.push_back(line);
  o.info.push_back(fmt("strictly decreasing %s, sup(64) <= sup(8)/4 %s, ratio max/min %.3g", decreasing ? "yes" : "no",
                       quarter ? "yes" : "no", spread));
  std::vector<double> er;
  line = "exp_x_cos_y sup_error:";
  for (std::size_t k = 0; k < exp_data.sup.size(); ++k) {
    line += fmt(" %.3e", exp_data.sup[k]);
    er.push_back(exp_data.sup[k] / exp_data.shape[k]);
  }
  o.info.push_back(line);
  o.info.push_back(fmt("exp_x_cos_y ratio max/min %.3g: the rate is O(eps^2) against a log-rate shape",
                       *std::max_element(er.begin(), er.end()) / *std::min_element(er.begin(), er.end())));
  double worst_gap = *std::max_element(s.hd_gap.begin(), s.hd_gap.end());
  o.known_failure = !o.pass && worst_gap <= 1e-10;
  return o;
}

// ---------------------------------------------------------------- 5

Outcome network_identities() {
  Outcome o;
  std::mt19937_64 gen(20240501);
  auto unif = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); };
  auto integer = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen); };
  double worst_sandwich = 0, worst_recompose = 0, worst_dt_eq = 0;
  bool dt = true, dims = true, pre = true;
  for (int trial = 0; trial < 100; ++trial) {
    int n = integer(5, 80);
    int m = integer(n - 1, std::min(200, n * (n - 1) / 2 + n));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.push_back({perm[integer(0, i - 1)], perm[i], std::exp(unif(std::log(0.1), std::log(10.0)))});
    while (static_cast<int>(edges.size()) < m) {
      int a = integer(0, n - 1), b = integer(0, n - 1);
      if (a != b) edges.push_back({a, b, std::exp(unif(std::log(0.1), std::log(10.0)))});
    }
    Network net(n, edges);
    std::shuffle(perm.begin(), perm.end(), gen);
    int na = integer(1, std::max(1, n / 4)), nb = integer(1, std::max(1, n / 4));
    std::vector<int> a(perm.begin(), perm.begin() + na), b(perm.begin() + na, perm.begin() + na + nb);

    std::vector<char> fixed(n, 0);
    VertexFunction volt_bc(n, 0.0);
    for (int x : a) fixed[x] = 1;
    for (int x : b) fixed[x] = 1, volt_bc[x] = 1.0;
    DirichletProblem unit{&net, fixed, volt_bc};
    auto volt = harmonic_extension(unit);
    auto current = discrete_gradient(net, volt);

    // Flow on U: a random current plus a random divergence-free part.
    DirichletProblem rnd = unit;
    for (auto& v : rnd.g) v = unif(-1, 1);
    EdgeField theta = discrete_gradient(net, harmonic_extension(rnd));
    EdgeField noise(net.num_edges());
    for (auto& v : noise) v = unif(-1, 1);
    auto dec = star_cycle_decomposition(net, noise);
    for (int e = 0; e < net.num_edges(); ++e) theta[e] += dec.cycle_part[e];

    double recompose = 0;
    for (int e = 0; e < net.num_edges(); ++e)
      recompose = std::max(recompose, std::abs(dec.star_part[e] + dec.cycle_part[e] - noise[e]));
    worst_recompose = std::max(worst_recompose, recompose);
    dims = dims && dec.star_dimension == n - 1 && dec.cycle_dimension == net.num_edges() - n + 1;

    VertexFunction f(n);
    for (int x = 0; x < n; ++x) f[x] = fixed[x] ? rnd.g[x] : unif(-1, 1);
    auto s = sandwich_check(rnd, f, theta);
    pre = pre && s.preconditions_ok;
    worst_sandwich = std::max(worst_sandwich, s.relative_error);

    // Any f with gap >= 0: A below 0, B above 0, free elsewhere.
    VertexFunction g(n);
    for (auto& v : g) v = unif(-2, 2);
    for (int x : a) g[x] = unif(-1, 0);
    for (int x : b) g[x] = unif(0, 1);
    dt = dt && dirichlet_thomson_check(net, theta, g, a, b).holds();
    auto eq = dirichlet_thomson_check(net, current, volt, a, b);
    dt = dt && eq.holds();
    worst_dt_eq = std::max(worst_dt_eq, std::abs(eq.lhs - eq.rhs) / std::max(eq.rhs, 1e-300));
  }
  o.pass = pre && worst_sandwich <= 1e-8 && dt && worst_recompose <= 1e-10 && dims;
  o.info.push_back(fmt("100 networks: sandwich rel err %.3e, preconditions %s", worst_sandwich, pre ? "ok" : "FAILED"));
  o.info.push_back(fmt("Dirichlet-Thomson %s, equality case rel gap %.3e", dt ? "holds" : "VIOLATED", worst_dt_eq));
  o.info.push_back(fmt("star/cycle recomposition %.3e, dimensions %s", worst_recompose, dims ? "ok" : "WRONG"));
  return o;
}

// ---------------------------------------------------------------- 6

Outcome flows() {
  Outcome o;
  auto d = diamond_map();
  auto fd = argument_flow(d, d.index_of(0), 0.5, true);
  bool diamond = std::abs(fd.energy - 0.25) <= 1e-12;
  o.info.push_back(fmt("diamond E(theta) = %.15f", fd.energy));

  auto g = rotated_grid(Domain::unit_square(), 32);
  auto fg = argument_flow(g, nearest_primal(g, {0.5, 0.5}, true), 4 * mesh_size(g));
  bool grid = std::abs(fg.strength - 1) <= 1e-10 && fg.max_node_residual <= 1e-10;
  o.info.push_back(fmt("grid n=32 r=4eps: strength-1 %.2e, divergence %.2e", fg.strength - 1, fg.max_node_residual));

  bool refine = true;
  double first = 0;
  std::string line = "E/log(diam/r) at r=0.3:";
  for (int n : {16, 32, 64, 128}) {
    auto m = rotated_grid(Domain::unit_square(), n);
    auto f = argument_flow(m, nearest_primal(m, {0.5, 0.5}, true), 0.3);
    if (first == 0) first = f.ratio;
    refine = refine && f.ratio <= 2 * first && f.ratio >= first / 2 && std::abs(f.strength - 1) <= 1e-10 &&
             f.max_node_residual <= 1e-10;
    line += fmt(" %.4f", f.ratio);
  }
  o.info.push_back(line);

  Point2 c{0.5, 0.5};
  std::vector<int> s, t;
  for (int v : g.primal_vertices()) {
    if (g.pos(v).x < 0.35) s.push_back(v);
    if (g.pos(v).x > 0.65) t.push_back(v);
  }
  auto rp = random_path_flow(g, c, s, t, 0.2, 0.4, 64);
  bool bounded = std::all_of(rp.report.flow.begin(), rp.report.flow.end(), [](double x) { return std::abs(x) <= 1 + 1e-12; });
  bool rho_only = rp.paths.size() == rp.rho.size();
  for (std::size_t k = 0; k < rp.paths.size(); ++k)
    for (int e : rp.paths[k].edges) rho_only = rho_only && is_rho_edge(g, e, c, rp.rho[k]);
  bool unit = std::abs(rp.report.strength - 1) <= 1e-10;
  o.info.push_back(fmt("random paths: strength-1 %.2e, max|theta| %s, %zu paths all rho-edges %s", rp.report.strength - 1,
                       bounded ? "<= 1" : "> 1", rp.paths.size(), rho_only ? "yes" : "NO"));
  o.pass = diamond && grid && refine && bounded && rho_only && unit;
  return o;
}

// ---------------------------------------------------------------- 7

Outcome packing() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  auto tri = Triangulation::from_indices({0, 1, 2}, {{0, 1, 2}});
  auto tp = pack_in_disk(tri);
  double fixture = 0;
  for (auto& cc : tp.circles) fixture = std::max(fixture, std::abs(cc.radius - (2 * std::sqrt(3.0) - 3)));
  o.pass = fixture <= 1e-8;
  o.info.push_back(fmt("triangle fixture radius error %.2e", fixture));

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto t = random_triangulation(13, 150, seed);
    auto p = pack_in_disk(t);
    double tang = 0;
    for (auto& e : t.edges()) {
      auto& a = p.circles[e.a];
      auto& b = p.circles[e.b];
      tang = std::max(tang, std::abs(dist(a.center, b.center) - a.radius - b.radius));
    }
    auto pm = orthodiagonal_from_packing(t, p);
    bool valid = validate(pm.map, 1e-7).pass();
    bool cert = pm.certificate.center_at_origin && pm.certificate.holds();
    bool ok = t.num_vertices() >= 500 && tang <= 1e-7 * p.max_radius && valid && cert;
    o.pass = o.pass && ok;
    o.info.push_back(fmt("random V=%d seed=%d: tangency %.2e (max r %.3f), valid %s, mesh %.4f<=%.4f, hausdorff %.4f<=%.4f",
                         t.num_vertices(), int(seed), tang, p.max_radius, valid ? "yes" : "NO", pm.certificate.mesh,
                         pm.certificate.mesh_bound, pm.certificate.hausdorff, pm.certificate.hausdorff_bound));
  }

  std::vector<std::pair<std::string, PlanarMap3C>> polys = {{"K4", tetrahedron()}, {"prism5", prism(5)}, {"cube", cube()}};
  for (auto& [name, h] : polys) {
    auto dp = double_pack(h, h.num_faces() - 1);
    auto pm = orthodiagonal_from_double_packing(h, dp);
    bool valid = validate(pm.map, 1e-7).pass();
    bool ok = dp.angle_residual <= 1e-8 && dp.orthogonality_residual <= 1e-7 && valid && pm.certificate.holds();
    o.pass = o.pass && ok;
    o.info.push_back(fmt("%s: angle %.2e, orthogonality %.2e, valid %s, mesh %.4f<=%.4f, hausdorff %.4f<=%.4f", name.c_str(),
                         dp.angle_residual, dp.orthogonality_residual, valid ? "yes" : "NO", pm.certificate.mesh,
                         pm.certificate.mesh_bound, pm.certificate.hausdorff, pm.certificate.hausdorff_bound));
  }
  double secs = seconds_since(t0);
  o.pass = o.pass && secs < 60;
  o.info.push_back(fmt("%.2f s", secs));
  return o;
}

// ---------------------------------------------------------------- 8

Outcome exit_measure() {
  Outcome o;
  std::vector<double> tv;
  for (int k : {4, 8, 16}) {
    auto m = packed_map(k);
    int start = nearest_primal(m, {0, 0}, true);
    auto r = harmonic_measure_compare(m, start, 16);
    tv.push_back(r.tv);
    o.info.push_back(fmt("k=%d: %d map vertices, start offset %.2e, TV %.4f", k, m.num_vertices(), r.start_offset, r.tv));
  }
  o.pass = tv[1] < tv[0] && tv[2] < tv[1] && tv[2] <= 0.1;
  return o;
}

// ---------------------------------------------------------------- 9

VertexFunction dense_solution(const Network& net, const std::vector<char>& fixed, const VertexFunction& g) {
  int n = net.num_vertices();
  std::vector<int> idx(n, -1);
  int m = 0;
  for (int x = 0; x < n; ++x)
    if (!fixed[x]) idx[x] = m++;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (auto& e : net.edges()) {
    int a = e.tail, b = e.head;
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      if (idx[x] < 0) continue;
      L(idx[x], idx[x]) += e.c;
      if (idx[y] >= 0) L(idx[x], idx[y]) -= e.c;
      else rhs[idx[x]] += e.c * g[y];
    }
  }
  Eigen::VectorXd u = L.llt().solve(rhs);
  VertexFunction h(n);
  for (int x = 0; x < n; ++x) h[x] = fixed[x] ? g[x] : u[idx[x]];
  return h;
}

Outcome harmonic_vs_dense() {
  Outcome o;
  std::vector<std::pair<std::string, OrthodiagonalMap>> maps;
  for (int n : kSweep) maps.push_back({fmt("rotated_grid n=%d", n), rotated_grid(Domain::unit_square(), n)});
  for (int n : {16, 40}) maps.push_back({fmt("perturbed n=%d", n), perturbed(rotated_grid(Domain::unit_disk(), n), 0.5, 4)});
  for (int k : {4, 8, 13, 16}) maps.push_back({fmt("packed k=%d", k), packed_map(k)});
  maps.push_back({"double packed k=4", [] {
                    GeneratorSpec s;
                    s.family = "double_packed";
                    s.n = 4;
                    return generate(s);
                  }()});
  double worst = 0;
  int used = 0;
  for (auto& [name, m] : maps) {
    if (m.interior_primal().size() > 2000) {
      o.info.push_back(fmt("%s skipped: %zu interior vertices", name.c_str(), m.interior_primal().size()));
      continue;
    }
    for (const char* fname : {"exp_x_cos_y", "re_z3"}) {
      auto f = test_function(fname);
      auto sol = solve_dirichlet(m, f);
      VertexFunction g(sol.h.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = f.value(m.pos(sol.primal.map_vertex[i]));
      auto ref = dense_solution(sol.primal.net, sol.boundary, g);
      double d = 0;
      for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(ref[i] - sol.h[i]));
      worst = std::max(worst, d);
      if (!(d <= 1e-9)) o.info.push_back(fmt("%s %s differs by %.3e", name.c_str(), fname, d));
    }
    ++used;
  }
  o.pass = worst <= 1e-9 && used >= 8;
  o.info.push_back(fmt("%d instances, worst |h - dense| %.3e", used, worst));
  return o;
}

}  // namespace

int main() {
  const char* names[] = {"",
                         "martingale identity",
                         "energy convergence bound",
                         "energy pair bound",
                         "sup error rates",
                         "network identities",
                         "flows",
                         "packing and double packing",
                         "exit measure",
                         "harmonic extension vs dense solve"};
  auto f = test_function("x2_minus_y2");
  auto g = test_function("exp_x_cos_y");
  std::vector<std::function<Outcome()>> runs;
  SweepData sx, se;
  runs.push_back(martingale);
  runs.push_back([&] {
    sx = run_sweep(f);
    se = run_sweep(g);
    return energy_convergence(sx, se);
  });
  runs.push_back([&] { return energy_pairs(sx); });
  runs.push_back([&] { return sup_rates(sx, se); });
  runs.push_back(network_identities);
  runs.push_back(flows);
  runs.push_back(packing);
  runs.push_back(exit_measure);
  runs.push_back(harmonic_vs_dense);

  int unexpected = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    Outcome o;
    try {
      o = runs[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.info.push_back(std::string("exception: ") + e.what());
    }
    std::printf("criterion %zu %s %s%s\n", i + 1, o.pass ? "PASS" : "FAIL", names[i + 1],
                !o.pass && o.known_failure ? " (known, see notes)" : "");
    for (auto& line : o.info) std::printf("  INFO %s\n", line.c_str());
    std::fflush(stdout);
    if (!o.pass && !o.known_failure) ++unexpected;
  }
  return unexpected ? 1 : 0;
}
