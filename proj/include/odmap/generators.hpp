#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/geometry.hpp"
#include "odmap/packing.hpp"

namespace odmap {

// V• = {(0,0), (+-2,0), (0,+-2)}, V° = {(+-1,+-1)}, four square faces.
OrthodiagonalMap diamond_map();

// Square faces centred at lattice points (i,j)/n with i+j odd; primal vertices at (even, even).
// The lattice is anchored at the disk centre or the first polygon vertex, and only faces inside the
// closed domain are kept (largest block). Mesh size is sqrt(2)/n.
OrthodiagonalMap rotated_grid(const Domain& domain, int n);

// Same combinatorics over arbitrary strictly increasing cuts: lattice index i maps to xs[i].
OrthodiagonalMap rect_nonuniform(const std::vector<double>& xs, const std::vector<double>& ys);

// Moves every distinct x and every distinct y coordinate by uniform(-a, a) times half the smaller
// adjacent gap. Requires axis-parallel diagonals and 0 <= a < 1; keeps ids and faces.
OrthodiagonalMap perturbed(const OrthodiagonalMap& base, double amplitude, std::uint64_t seed);

// Faces whose closure lies in the closed domain at distance >= b from its boundary, split into blocks.
std::vector<OrthodiagonalMap> clip_to_domain(const OrthodiagonalMap& map, const Domain& domain, double b);

double hausdorff_delta(const OrthodiagonalMap& map, const Domain& domain, int samples = 2000);

// Triangular-lattice hexagon |i|, |j|, |i+j| <= k.
Triangulation hex_triangulation(int k);
// Hexagon followed by random flips of interior edges that keep degrees >= 3 and create no chords.
Triangulation random_triangulation(int k, int flips, std::uint64_t seed);

PlanarMap3C tetrahedron();
PlanarMap3C prism(int k);  // prism(4) is the cube
inline PlanarMap3C cube() { return prism(4); }
PlanarMap3C wheel(int k);
// Closes a disk triangulation with one extra vertex joined to its boundary.
PlanarMap3C sphere_from_triangulation(const Triangulation& t);

struct GeneratorSpec {
  std::string family = "rotated_grid";  // rotated_grid | rect_nonuniform | perturbed | packed_triangulation | double_packed
  int n = 8;
  std::uint64_t seed = 1;
  Domain domain = Domain::unit_square();
  double amplitude = 0.3;  // perturbed only
  double tol = 1e-12;      // packing families
};

std::vector<std::string> generator_families();
// Packed families ignore the domain and land in the unit disk; n is the hexagon size.
OrthodiagonalMap generate(const GeneratorSpec& spec);

}  // namespace odmap
