#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "odmap/errors.hpp"
#include "odmap/network.hpp"
#include "support.hpp"

using namespace odmap;
using namespace testsupport;

namespace {

Network path3(double c0, double c1) { return Network(3, {{0, 1, c0}, {1, 2, c1}}); }

DirichletProblem ends_problem(const Network& net, double g0, double g2) {
  return {&net, {1, 0, 1}, {g0, 0.0, g2}};
}

// Flow on U: current of a random harmonic function plus a divergence-free part.
EdgeField admissible_flow(Rng& rng, const DirichletProblem& p) {
  const Network& net = *p.net;
  DirichletProblem q = p;
  for (auto& v : q.g) v = rng.uniform(-1, 1);
  EdgeField theta = discrete_gradient(net, harmonic_extension(q));
  EdgeField noise(net.num_edges());
  for (auto& v : noise) v = rng.uniform(-1, 1);
  auto dec = star_cycle_decomposition(net, noise);
  for (int e = 0; e < net.num_edges(); ++e) theta[e] += dec.cycle_part[e];
  return theta;
}

}  // namespace

TEST_CASE("discrete gradient on a path") {
  Network net = path3(1, 1);
  auto d = discrete_gradient(net, {0, 0.75, 1});
  CHECK(d[0] == doctest::Approx(0.75));
  CHECK(d[1] == doctest::Approx(0.25));
  for (double v : discrete_gradient(net, {2, 2, 2})) CHECK(v == 0.0);
}

TEST_CASE("energies") {
  Network one(2, {{0, 1, 2.0}});
  CHECK(energy_of_function(one, {0, 3}) == doctest::Approx(18));
  Network net = path3(1, 3);
  auto p = ends_problem(net, 0, 1);
  auto h = harmonic_extension(p);
  CHECK(h[1] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(energy_of_function(net, h) == doctest::Approx(0.75).epsilon(1e-14));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Network r = random_network(rng, 12, 30);
    EdgeField a(r.num_edges()), b(r.num_edges()), s(r.num_edges());
    for (int e = 0; e < r.num_edges(); ++e) {
      a[e] = rng.uniform(-1, 1);
      b[e] = rng.uniform(-1, 1);
      s[e] = a[e] + b[e];
    }
    CHECK(energy(r, s) <= 2 * energy(r, a) + 2 * energy(r, b) + 1e-12);
    EdgeField a3 = a;
    for (auto& v : a3) v *= 3;
    CHECK(energy(r, a3) == doctest::Approx(9 * energy(r, a)).epsilon(1e-13));
    CHECK(inner_product(r, a, b) == doctest::Approx(inner_product(r, b, a)).epsilon(1e-13));
  }
}

TEST_CASE("harmonic extension on small paths") {
  Network net = path3(1, 1);
  auto p = ends_problem(net, 0, 1);
  CHECK(harmonic_extension(p)[1] == doctest::Approx(0.5));
  DirichletProblem all{&net, {1, 1, 1}, {1, 2, 3}};
  auto h = harmonic_extension(all);
  CHECK(h == VertexFunction{1, 2, 3});
}

TEST_CASE("harmonic extension errors") {
  Network split(4, {{0, 1, 1}, {2, 3, 1}});
  DirichletProblem p{&split, {1, 0, 1, 0}, {0, 0, 1, 0}};
  CHECK_THROWS_AS(harmonic_extension(p), GeometryError);
  Network net = path3(1, 1);
  DirichletProblem none{&net, {0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(harmonic_extension(none), GeometryError);
}

TEST_CASE("harmonic extension matches a dense solve on a 5x5 grid") {
  Network net = grid_network(5);
  std::vector<char> fixed(25, 0);
  VertexFunction g(25, 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      int x = i * 5 + j;
      fixed[x] = i == 0 || j == 0 || i == 4 || j == 4;
      g[x] = i * i - j * j;
    }
  DirichletProblem p{&net, fixed, g};
  CHECK(max_abs_diff(harmonic_extension(p), dense_harmonic(net, fixed, g)) <= 1e-10);
}

TEST_CASE("property: extension agrees with dense solve, max principle, node law") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    int n = rng.integer(3, 60);
    Network net = random_network(rng, n, rng.integer(n - 1, 3 * n));
    std::vector<char> fixed(n, 0);
    VertexFunction g(n, 0.0);
    int nb = rng.integer(1, n - 1);
    for (int k = 0; k < nb; ++k) fixed[rng.integer(0, n - 1)] = 1;
    double lo = INFINITY, hi = -INFINITY, gmax = 0;
    for (int x = 0; x < n; ++x) {
      if (!fixed[x]) continue;
      g[x] = rng.uniform(-5, 5);
      lo = std::min(lo, g[x]);
      hi = std::max(hi, g[x]);
      gmax = std::max(gmax, std::abs(g[x]));
    }
    DirichletProblem p{&net, fixed, g};
    auto h = harmonic_extension(p);
    CHECK(max_abs_diff(h, dense_harmonic(net, fixed, g)) <= 1e-9 * std::max(1.0, gmax));
    for (int x = 0; x < n; ++x) {
      CHECK(h[x] >= lo - 1e-12);
      CHECK(h[x] <= hi + 1e-12);
      if (fixed[x]) CHECK(h[x] == g[x]);
    }
    std::vector<char> in_u(n);
    for (int x = 0; x < n; ++x) in_u[x] = !fixed[x];
    auto res = node_law_residuals(net, discrete_gradient(net, h), in_u);
    for (int x = 0; x < n; ++x) CHECK(std::abs(res[x]) <= 1e-9 * net.pi(x) * std::max(1.0, gmax));
  }
}

TEST_CASE("cycle and node laws") {
  Rng rng(5);
  Network net = random_network(rng, 15, 40);
  VertexFunction f(15);
  for (auto& v : f) v = rng.uniform(-1, 1);
  for (double r : cycle_law_residuals(net, discrete_gradient(net, f))) CHECK(std::abs(r) <= 1e-12);
  auto basis = fundamental_cycles(net);
  CHECK(basis.cycles.size() == static_cast<std::size_t>(40 - 15 + 1));

  // Star of x: net outflow at x equals pi(x).
  std::vector<char> all(15, 1);
  auto st = star(net, 4);
  CHECK(node_law_residuals(net, st, all)[4] == doctest::Approx(net.pi(4)));

  Network tri(3, {{0, 1, 2.0}, {1, 2, 0.5}, {2, 0, 4.0}});
  EdgeField th{0.3, -0.7, 1.1};
  auto cr = cycle_law_residuals(tri, th);
  REQUIRE(cr.size() == 1);
  double direct = 0.3 / 2.0 - 0.7 / 0.5 + 1.1 / 4.0;
  CHECK(std::abs(std::abs(cr[0]) - std::abs(direct)) <= 1e-14);
}

TEST_CASE("star derivative and flow inner product lemmas") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    int n = rng.integer(4, 30);
    Network net = random_network(rng, n, rng.integer(n, 3 * n));
    VertexFunction f(n);
    for (auto& v : f) v = rng.uniform(-2, 2);
    EdgeField s = discrete_gradient(net, f);
    for (int x = 0; x < n; ++x) {
      auto sx = star(net, x);
      for (int e = 0; e < net.num_edges(); ++e) s[e] += f[x] * sx[e];
    }
    for (double v : s) CHECK(std::abs(v) <= 1e-10);

    std::vector<char> fixed(n, 0);
    for (int k = 0; k < 3; ++k) fixed[rng.integer(0, n - 1)] = 1;
    DirichletProblem p{&net, fixed, VertexFunction(n, 0.0)};
    EdgeField theta = admissible_flow(rng, p);
    auto div = divergence(net, theta);
    double rhs = 0;
    for (int x = 0; x < n; ++x)
      if (fixed[x]) rhs += f[x] * (-div[x]);
    CHECK(inner_product(net, theta, discrete_gradient(net, f)) == doctest::Approx(rhs).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("strength and gap") {
  Network net = path3(1, 3);
  auto p = ends_problem(net, 0, 1);
  auto cur = discrete_gradient(net, harmonic_extension(p));
  CHECK(strength(net, cur, {0}, {2}) == doctest::Approx(0.75));
  CHECK(strength_into(net, cur, {2}) == doctest::Approx(0.75));
  EdgeField s2 = cur;
  for (auto& v : s2) v *= 2.5;
  CHECK(strength(net, s2, {0}, {2}) == doctest::Approx(1.875));
  CHECK_THROWS_AS(strength(net, cur, {0, 1}, {1}), GeometryError);

  Network g = grid_network(4);
  VertexFunction x(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) x[i * 4 + j] = j;
  CHECK(gap(x, {0, 4, 8, 12}, {3, 7, 11, 15}) == 3.0);
}

TEST_CASE("projection to currents") {
  Network net = path3(1, 1);
  auto p = ends_problem(net, 0, 1);
  VertexFunction lin{0, 0.5, 1};
  auto proj = project_to_current(p, lin);
  CHECK(proj[0] == doctest::Approx(0.5));
  CHECK(proj[1] == doctest::Approx(0.5));
  auto sq = project_to_current(p, {0, 0.9, 1});
  CHECK(sq[0] == doctest::Approx(0.5));

  Rng rng(23);
  Network g = grid_network(4);
  std::vector<char> fixed(16, 0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) fixed[i * 4 + j] = i == 0 || i == 3 || j == 0 || j == 3;
  for (int trial = 0; trial < 10; ++trial) {
    VertexFunction f(16);
    for (auto& v : f) v = rng.uniform(-1, 1);
    DirichletProblem q{&g, fixed, f};
    auto out = project_to_current(q, f);
    auto df = discrete_gradient(g, f);
    CHECK(energy(g, out) <= energy(g, df) + 1e-12);
    EdgeField diff(df.size());
    for (std::size_t e = 0; e < df.size(); ++e) diff[e] = df[e] - out[e];
    CHECK(std::abs(inner_product(g, diff, out)) <= 1e-9);
    auto dense = discrete_gradient(g, dense_harmonic(g, fixed, f));
    CHECK(max_abs_diff(out, dense) <= 1e-9);
  }
}

TEST_CASE("sandwich identity") {
  Network net = path3(1, 3);
  auto p = ends_problem(net, 0, 1);
  auto h = harmonic_extension(p);
  auto r = sandwich_check(p, h, discrete_gradient(net, h));
  CHECK(r.df_minus_dh <= 1e-30);
  CHECK(r.theta_minus_dh <= 1e-30);
  CHECK(r.preconditions_ok);

  VertexFunction f{0, 0.2, 1};
  r = sandwich_check(p, f, discrete_gradient(net, h));
  CHECK(r.theta_minus_dh <= 1e-30);
  CHECK(r.df_minus_dh == doctest::Approx(r.df_minus_theta));

  // A field that breaks the node law is flagged.
  r = sandwich_check(p, f, EdgeField{1.0, 0.0});
  CHECK_FALSE(r.preconditions_ok);

  Rng rng(29);
  Network g = grid_network(5);
  std::vector<char> fixed(25, 0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) fixed[i * 5 + j] = i == 0 || i == 4 || j == 0 || j == 4;
  for (int trial = 0; trial < 10; ++trial) {
    DirichletProblem q{&g, fixed, VertexFunction(25, 0.0)};
    for (auto& v : q.g) v = rng.uniform(-1, 1);
    VertexFunction ff = q.g;
    for (int x = 0; x < 25; ++x)
      if (!fixed[x]) ff[x] = rng.uniform(-1, 1);
    auto theta = admissible_flow(rng, q);
    auto s = sandwich_check(q, ff, theta);
    CHECK(s.preconditions_ok);
    CHECK(s.relative_error <= 1e-8);
  }
}

TEST_CASE("Dirichlet-Thomson on the path and on random networks") {
  Network net = path3(1, 3);
  auto p = ends_problem(net, 0, 1);
  auto h = harmonic_extension(p);
  auto r = dirichlet_thomson_check(net, discrete_gradient(net, h), h, {0}, {2});
  CHECK(r.lhs == doctest::Approx(0.75));
  CHECK(r.rhs == doctest::Approx(0.75));
  CHECK(r.holds());

  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.integer(4, 15);
    Network g = random_network(rng, n, 20);
    std::vector<int> a, b;
    random_disjoint_sets(rng, n, a, b);
    std::vector<char> fixed(n, 0);
    VertexFunction bv(n, 0.0);
    for (int x : a) fixed[x] = 1, bv[x] = 0.0;
    for (int x : b) fixed[x] = 1, bv[x] = 1.0;
    DirichletProblem q{&g, fixed, bv};
    auto volt = harmonic_extension(q);
    auto cur = discrete_gradient(g, volt);
    auto eq = dirichlet_thomson_check(g, cur, volt, a, b);
    CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-8));

    VertexFunction f(n);
    for (auto& v : f) v = rng.uniform(-1, 1);
    auto theta = admissible_flow(rng, q);
    auto ineq = dirichlet_thomson_check(g, theta, f, a, b);
    if (!ineq.negative_gap) CHECK(ineq.holds());
  }
}

TEST_CASE("star-cycle decomposition") {
  Rng rng(37);
  Network g = grid_network(4);
  EdgeField theta(g.num_edges());
  for (auto& v : theta) v = rng.uniform(-1, 1);
  auto d = star_cycle_decomposition(g, theta);
  CHECK(d.star_dimension == 15);
  CHECK(d.cycle_dimension == g.num_edges() - 16 + 1);
  CHECK(std::abs(inner_product(g, d.star_part, d.cycle_part)) <= 1e-10);
  for (int e = 0; e < g.num_edges(); ++e) CHECK(std::abs(d.star_part[e] + d.cycle_part[e] - theta[e]) <= 1e-10);
  for (double r : divergence(g, d.cycle_part)) CHECK(std::abs(r) <= 1e-9);

  // Least-squares oracle: the star part is the r-weighted projection onto gradients.
  int n = 16, m = g.num_edges();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, n - 1);
  Eigen::VectorXd w(m), t(m);
  for (int e = 0; e < m; ++e) {
    auto ed = g.edge(e);
    if (ed.head > 0) D(e, ed.head - 1) += ed.c;
    if (ed.tail > 0) D(e, ed.tail - 1) -= ed.c;
    w[e] = 1.0 / std::sqrt(ed.c);
    t[e] = theta[e];
  }
  Eigen::MatrixXd WD = w.asDiagonal() * D;
  Eigen::VectorXd u = WD.colPivHouseholderQr().solve(w.asDiagonal() * t);
  Eigen::VectorXd star_ls = D * u;
  for (int e = 0; e < m; ++e) CHECK(std::abs(star_ls[e] - d.star_part[e]) <= 1e-9);

  Network tri(3, {{0, 1, 1.0}, {1, 2, 2.0}, {2, 0, 0.5}});
  auto cyc = star_cycle_decomposition(tri, EdgeField{1, 1, 1});
  for (double v : cyc.star_part) CHECK(std::abs(v) <= 1e-12);

  auto constant = star_cycle_decomposition(g, discrete_gradient(g, VertexFunction(16, 2.0)));
  for (double v : constant.star_part) CHECK(std::abs(v) <= 1e-14);
}

TEST_CASE("exit measures") {
  Network net = path3(1, 3);
  auto p = ends_problem(net, 0, 1);
  auto em = exit_measure_exact(p, 1);
  REQUIRE(em.boundary.size() == 2);
  CHECK(em.probability[1] == doctest::Approx(0.75));
  CHECK(em.total() == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(41);
  Network g = random_network(rng, 30, 70);
  std::vector<char> fixed(30, 0);
  for (int k = 0; k < 6; ++k) fixed[rng.integer(1, 29)] = 1;
  DirichletProblem q{&g, fixed, VertexFunction(30, 0.0)};
  auto exact = exit_measure_exact(q, 0);
  CHECK(std::abs(exact.total() - 1.0) <= 1e-12);
  // The exit measure integrates boundary data to the harmonic extension.
  for (auto& v : q.g) v = rng.uniform(-1, 1);
  double integral = 0;
  for (std::size_t i = 0; i < exact.boundary.size(); ++i) integral += exact.probability[i] * q.g[exact.boundary[i]];
  CHECK(integral == doctest::Approx(harmonic_extension(q)[0]).epsilon(1e-9));

  int walks = 20000;
  auto sampled = exit_measure_sampled(q, 0, walks, 7);
  for (std::size_t i = 0; i < exact.boundary.size(); ++i) {
    double pr = exact.probability[i];
    double sigma = std::sqrt(pr * (1 - pr) / walks);
    CHECK(std::abs(sampled.probability[i] - pr) <= 4 * sigma + 1e-12);
  }
}
