#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "odmap/core_map.hpp"
#include "odmap/errors.hpp"
#include "odmap/generators.hpp"
#include "support.hpp"

using namespace odmap;

namespace {

std::set<double> conductances(const OrthodiagonalMap& m) {
  std::set<double> s;
  auto p = primal_network(m);
  for (int e = 0; e < p.net.num_edges(); ++e) s.insert(std::round(p.net.conductance(e) * 1e9) / 1e9);
  return s;
}

OrthodiagonalMap scaled(const OrthodiagonalMap& m, double s) {
  auto v = m.vertices();
  for (auto& u : v) u.pos = s * u.pos;
  return OrthodiagonalMap::from_indices(v, m.faces());
}

}  // namespace

TEST_CASE("rotated grid") {
  auto m = rotated_grid(Domain::unit_square(), 8);
  CHECK(validate(m).pass());
  CHECK(mesh_size(m) == doctest::Approx(std::sqrt(2.0) / 8).epsilon(1e-12));
  CHECK(hausdorff_delta(m, Domain::unit_square()) <= mesh_size(m));
  CHECK(conductances(m) == std::set<double>{1.0});
  for (int n : {4, 8, 16, 32}) {
    auto a = rotated_grid(Domain::unit_square(), n);
    auto b = rotated_grid(Domain::unit_square(), 2 * n);
    CHECK(mesh_size(b) == doctest::Approx(mesh_size(a) / 2).epsilon(1e-12));
  }
  auto disk = rotated_grid(Domain::unit_disk(), 10);
  CHECK(validate(disk).pass());
  for (auto& v : disk.vertices()) CHECK(norm(v.pos) <= 1 + 1e-12);
  CHECK_THROWS_AS(rotated_grid(Domain::unit_square(), 2), GeometryError);
  CHECK_THROWS_AS(rotated_grid(Domain::unit_square(), 1), GeometryError);
}

TEST_CASE("hausdorff delta of an inscribed square") {
  auto m = scaled(diamond_map(), 0.5);
  CHECK(hausdorff_delta(m, Domain::unit_disk(), 4000) == doctest::Approx(1 - std::sqrt(2.0) / 2).epsilon(1e-3));
  CHECK_THROWS_AS(hausdorff_delta(m, Domain::unit_disk(), 50), GeometryError);
}

TEST_CASE("rect_nonuniform") {
  std::vector<double> u = {0, 0.25, 0.5, 0.75, 1.0};
  auto a = rect_nonuniform(u, u);
  auto b = rotated_grid(Domain::unit_square(), 4);
  CHECK(validate(a).pass());
  CHECK(a.num_faces() == b.num_faces());
  CHECK(conductances(a) == std::set<double>{1.0});

  std::vector<double> xs = {0, 1, 2, 3, 4, 5, 6}, ys = {0, 2, 4, 6, 8};
  auto c = rect_nonuniform(xs, ys);
  CHECK(validate(c).pass());
  CHECK(conductances(c) == std::set<double>{0.5, 2.0});

  testsupport::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> cx{0}, cy{0};
    int nx = rng.integer(2, 9), ny = rng.integer(2, 9);
    for (int i = 0; i < nx; ++i) cx.push_back(cx.back() + rng.uniform(0.1, 2));
    for (int j = 0; j < ny; ++j) cy.push_back(cy.back() + rng.uniform(0.1, 2));
    auto m = rect_nonuniform(cx, cy);
    REQUIRE(validate(m).pass());
    double worst = 0;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        // Only cells touching a face contribute an edge.
        bool used = false;
        for (auto& e : m.edges()) {
          Point2 p = m.pos(e.a), q = m.pos(e.b);
          if (std::min(p.x, q.x) == cx[i] && std::max(p.x, q.x) == cx[i + 1] && std::min(p.y, q.y) == cy[j] &&
              std::max(p.y, q.y) == cy[j + 1])
            used = true;
        }
        if (used) worst = std::max(worst, std::hypot(cx[i + 1] - cx[i], cy[j + 1] - cy[j]));
      }
    CHECK(mesh_size(m) == doctest::Approx(worst).epsilon(1e-14));
  }
  CHECK_THROWS_AS(rect_nonuniform({0, 2, 1}, {0, 1, 2}), GeometryError);
}

TEST_CASE("perturbed grids") {
  auto base = rotated_grid(Domain::unit_square(), 16);
  auto same = perturbed(base, 0.0, 1);
  for (int v = 0; v < base.num_vertices(); ++v) CHECK(same.pos(v) == base.pos(v));
  auto p = perturbed(base, 0.3, 9);
  CHECK(validate(p).pass());
  CHECK(conductances(p).size() > 10);
  CHECK(martingale_residual(p) <= 1e-9);
  for (int v = 0; v < base.num_vertices(); ++v) CHECK(p.faces_at(v).size() == base.faces_at(v).size());
  auto q = perturbed(base, 0.3, 9);
  for (int v = 0; v < base.num_vertices(); ++v) CHECK(q.pos(v) == p.pos(v));
  CHECK_THROWS_AS(perturbed(base, 1.0, 1), GeometryError);

  testsupport::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = perturbed(rotated_grid(Domain::unit_disk(), rng.integer(3, 14)), rng.uniform(0, 0.95), trial);
    CHECK(validate(m).pass());
  }
}

TEST_CASE("clip_to_domain") {
  auto inside = rotated_grid(Domain::unit_square(), 6);
  auto same = clip_to_domain(inside, Domain::unit_square(), 0.0);
  REQUIRE(same.size() == 1);
  CHECK(same[0].num_faces() == inside.num_faces());

  auto cover = rotated_grid(Domain::rectangle(-1.2, -1.2, 1.2, 1.2), 12);
  double eps = mesh_size(cover);
  auto parts = clip_to_domain(cover, Domain::unit_disk(), 3 * eps);
  REQUIRE(!parts.empty());
  for (auto& part : parts) {
    CHECK(validate(part).pass());
    for (int f = 0; f < part.num_faces(); ++f) {
      auto poly = part.face_polygon(f);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(Domain::unit_disk().segment_boundary_distance(poly[k], poly[(k + 1) % 4]) >= 3 * eps - 1e-12);
      }
    }
    for (auto p : part.boundary_polygon()) CHECK(Domain::unit_disk().boundary_distance(p) <= 3 * eps + 2 * eps + 1e-12);
  }

  // Two diamonds touching at one point.
  auto a = diamond_map();
  std::vector<MapVertex> v = a.vertices();
  std::vector<std::array<int, 4>> f;
  for (auto& q : a.faces()) f.push_back({a.id(q[0]), a.id(q[1]), a.id(q[2]), a.id(q[3])});
  for (auto& u : a.vertices())
    if (u.id != 3) v.push_back({u.id + 100, u.pos + Point2{4, 0}, u.color});
  auto sh = [](int id) { return id == 3 ? 1 : id + 100; };
  for (auto& q : a.faces()) f.push_back({sh(a.id(q[0])), sh(a.id(q[1])), sh(a.id(q[2])), sh(a.id(q[3]))});
  OrthodiagonalMap pinched(std::move(v), f);
  CHECK(clip_to_domain(pinched, Domain::rectangle(-3, -3, 7, 3), 0.0).size() == 2);
  CHECK(clip_to_domain(pinched, Domain::rectangle(10, 10, 11, 11), 0.0).empty());
}

TEST_CASE("triangulations") {
  for (int k : {1, 2, 5}) {
    auto t = hex_triangulation(k);
    CHECK(t.num_vertices() == 3 * k * (k + 1) + 1);
    CHECK(t.num_faces() == 6 * k * k);
    CHECK(t.boundary().size() == static_cast<std::size_t>(6 * k));
  }
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto t = random_triangulation(6, 60, seed);
    CHECK(t.num_vertices() == 127);
    CHECK(t.num_faces() == 6 * 36);
    std::vector<int> deg(t.num_vertices(), 0);
    for (auto& e : t.edges()) deg[e.a]++, deg[e.b]++;
    for (int d : deg) CHECK(d >= 2);
    for (int v = 0; v < t.num_vertices(); ++v)
      if (!t.is_boundary(v)) CHECK(deg[v] >= 3);
  }
  auto a = random_triangulation(5, 40, 7), b = random_triangulation(5, 40, 7);
  CHECK(a.faces() == b.faces());
}

TEST_CASE("planar maps and 3-connectivity") {
  auto euler = [](const PlanarMap3C& h) {
    return h.num_vertices() - static_cast<int>(h.edges().size()) + h.num_faces();
  };
  CHECK(tetrahedron().num_vertices() == 4);
  CHECK(tetrahedron().num_faces() == 4);
  CHECK(cube().num_vertices() == 8);
  CHECK(cube().num_faces() == 6);
  CHECK(prism(5).num_faces() == 7);
  CHECK(wheel(6).num_faces() == 7);
  for (auto h : {tetrahedron(), cube(), prism(3), prism(7), wheel(4), wheel(9), sphere_from_triangulation(hex_triangulation(2))}) {
    CHECK(euler(h) == 2);
    CHECK(is_three_connected(h));
  }
  // Square with one chord: removing the chord's ends separates the other two vertices.
  auto chord = PlanarMap3C::from_indices({0, 1, 2, 3}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 2, 1}});
  CHECK_FALSE(is_three_connected(chord));
  CHECK_THROWS_AS(PlanarMap3C::from_indices({0, 1, 2}, {{0, 1, 2}, {0, 1, 2}}), StructuralError);
}

TEST_CASE("every generator family validates") {
  for (auto& fam : generator_families()) {
    GeneratorSpec s;
    s.family = fam;
    s.n = (fam == "packed_triangulation" || fam == "double_packed") ? 3 : 8;
    auto m = generate(s);
    INFO(fam);
    CHECK(validate(m, 1e-9).pass());
  }
  GeneratorSpec bad;
  bad.family = "nope";
  CHECK_THROWS(generate(bad));
}
