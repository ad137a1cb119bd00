#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/network.hpp"

namespace odmap {

// Flows live on the primal network of the map: edge i is the primal edge of face i, oriented v1 -> v2.
struct FlowReport {
  EdgeField flow;
  double strength = 0.0;
  double energy = 0.0;
  double bound_shape = 0.0;  // the proposition's right side without its constant
  double ratio = 0.0;        // energy / bound_shape
  double max_node_residual = 0.0;  // off sources and sinks
  std::vector<int> sources;        // map vertex indices
  std::vector<int> sinks;
  std::vector<std::string> warnings;
};

// Unit flow from V• within distance r of x to the boundary, built from increments of arg about x.
// With relax set, r < 3 * mesh size is accepted with a warning.
FlowReport argument_flow(const OrthodiagonalMap& map, int x, double r, bool relax = false);

// The unnormalised increments arg(w2) - arg(w1) about x, one per face, before any zeroing.
EdgeField argument_increments(const OrthodiagonalMap& map, Point2 x);

struct RhoEdgeSet {
  Point2 center;
  double rho = 0.0;
  std::vector<int> edges;
};

// Primal edges whose dual endpoints satisfy |w - c| < rho <= |w' - c|.
RhoEdgeSet rho_edges(const OrthodiagonalMap& map, Point2 center, double rho);
// Same over the augmented pair; indices refer to AugmentedDuals::primal edges.
RhoEdgeSet rho_edges(const AugmentedDuals& aug, Point2 center, double rho);
bool is_rho_edge(const OrthodiagonalMap& map, int face, Point2 center, double rho);

struct RhoPath {
  std::vector<int> vertices;  // map vertex indices, first in A, last in B'
  std::vector<int> edges;     // face indices
};

// Shortest path over rho-edges of the primal graph from A to B; nullopt when none exists.
std::optional<RhoPath> rho_edge_path(const OrthodiagonalMap& map, Point2 center, double rho,
                                     const std::vector<int>& a, const std::vector<int>& b);

// Path along the outer boundary of the union of augmented-primal faces reachable inside the open
// disk of radius rho. Throws GeometryError with a diagnostic when the construction degenerates.
RhoPath rho_path(const OrthodiagonalMap& map, Point2 center, double rho, const std::vector<int>& a,
                 const std::vector<int>& b);

struct RandomPathFlow {
  FlowReport report;
  std::vector<double> rho;
  std::vector<RhoPath> paths;
};

// Average of unit path flows over m values of rho with density proportional to 1/t on [r1, r2].
// Without a seed the values are midpoints of m cells of equal log-length; with a seed they are sampled.
RandomPathFlow random_path_flow(const OrthodiagonalMap& map, Point2 center, const std::vector<int>& s,
                                const std::vector<int>& t, double r1, double r2, int m,
                                std::optional<std::uint64_t> seed = std::nullopt, bool relax = false);

struct EquicontinuityProbe {
  double lhs = 0.0;        // |h(x) - h(y)|
  double rhs_shape = 0.0;  // E(h)^{1/2} / log^{1/2}(R / (r + eps))
  double beta = 0.0;
  double r = 0.0;
  double eps = 0.0;
};

// h is indexed by primal network vertex; x and y are map vertex indices.
EquicontinuityProbe equicontinuity_probe(const OrthodiagonalMap& map, const VertexFunction& h, int x, int y, double R);

// Recomputes strength and node-law residuals of a report on the map's primal network.
void recompute_flow_diagnostics(const OrthodiagonalMap& map, FlowReport& report);

}  // namespace odmap
