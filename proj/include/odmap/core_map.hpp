#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "odmap/geometry.hpp"
#include "odmap/network.hpp"

namespace odmap {

enum class Color { Primal, Dual };

struct MapVertex {
  int id = 0;
  Point2 pos;
  Color color = Color::Primal;
};

// Quad (v1, w1, v2, w2) as vertex indices, counterclockwise.
using Quad = std::array<int, 4>;

struct MapEdge {
  int a = 0;  // a < b
  int b = 0;
  std::vector<int> faces;
};

// Faces are the single source of truth; everything else is derived at construction.
class OrthodiagonalMap {
 public:
  OrthodiagonalMap() = default;
  // Faces by vertex id. Throws StructuralError on dangling or duplicate ids.
  OrthodiagonalMap(std::vector<MapVertex> vertices, const std::vector<std::array<int, 4>>& faces_by_id);
  static OrthodiagonalMap from_indices(std::vector<MapVertex> vertices, std::vector<Quad> faces);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  const std::vector<MapVertex>& vertices() const { return vertices_; }
  const MapVertex& vertex(int i) const { return vertices_[i]; }
  Point2 pos(int i) const { return vertices_[i].pos; }
  Color color(int i) const { return vertices_[i].color; }
  int id(int i) const { return vertices_[i].id; }
  int index_of(int id) const;
  const std::vector<Quad>& faces() const { return faces_; }
  const Quad& face(int f) const { return faces_[f]; }
  std::vector<Point2> face_polygon(int f) const;

  const std::vector<MapEdge>& edges() const { return edges_; }
  // Faces incident to each vertex, ordered by face index.
  const std::vector<int>& faces_at(int v) const { return faces_at_[v]; }

  // Empty when the edges bordering one face do not form a single simple cycle.
  const std::vector<int>& boundary_walk() const { return walk_; }
  bool is_boundary(int v) const { return on_boundary_[v] != 0; }
  std::vector<int> boundary_primal() const;
  std::vector<int> boundary_dual() const;
  std::vector<int> interior_primal() const;
  std::vector<int> interior_dual() const;
  std::vector<int> primal_vertices() const;
  std::vector<int> dual_vertices() const;

  std::vector<Point2> boundary_polygon() const;
  double area() const;  // sum of signed face areas

 private:
  void derive();

  std::vector<MapVertex> vertices_;
  std::vector<Quad> faces_;
  std::unordered_map<int, int> index_;
  std::vector<MapEdge> edges_;
  std::vector<std::vector<int>> faces_at_;
  std::vector<int> walk_;
  std::vector<char> on_boundary_;
};

struct ValidationReport {
  bool colors_ok = true;
  bool nondegenerate_ok = true;
  bool orthogonality_ok = true;
  bool orientation_ok = true;
  bool edge_faces_ok = true;
  bool boundary_ok = true;
  bool connected_ok = true;
  bool angle_sum_ok = true;

  double tol = 0.0;
  double worst_orthogonality = 0.0;
  int worst_orthogonality_face = -1;
  double worst_angle_sum = 0.0;

  std::vector<int> bad_color_faces;
  std::vector<int> degenerate_faces;
  std::vector<int> bad_orthogonality_faces;
  std::vector<int> bad_orientation_faces;
  std::vector<std::array<int, 2>> bad_edges;  // vertex ids
  std::vector<int> bad_angle_vertices;        // vertex ids
  std::vector<std::string> messages;

  bool pass() const {
    return colors_ok && nondegenerate_ok && orthogonality_ok && orientation_ok && edge_faces_ok &&
           boundary_ok && connected_ok && angle_sum_ok;
  }
};

// Orthogonality residual |<v2-v1, w2-w1>| / (|v1v2| |w1w2|) of one face.
double orthogonality_residual(const OrthodiagonalMap& map, int face);

ValidationReport validate(const OrthodiagonalMap& map, double tol = 1e-9);
double mesh_size(const OrthodiagonalMap& map);

// Worst |rot90(unit(v2 - v1)) - unit(w2 - w1)| over faces.
double orientation_residual(const OrthodiagonalMap& map);
// Worst |sum_Q c(e_Q) (v_Q - v)| / (pi(v) * eps) over interior primal vertices v.
double martingale_residual(const OrthodiagonalMap& map);

// Network on one color class. Edge i corresponds to face i.
struct MapNetwork {
  Network net;
  std::vector<int> map_vertex;  // network index -> map index
  std::vector<int> net_vertex;  // map index -> network index, -1 for the other color
};

MapNetwork primal_network(const OrthodiagonalMap& map);
MapNetwork dual_network(const OrthodiagonalMap& map);

// Boundary flags of the primal network, aligned with MapNetwork::net indices.
std::vector<char> primal_boundary_flags(const OrthodiagonalMap& map, const MapNetwork& primal);

// Polylines of the drawn edges of a face; bent through a diagonal midpoint when a diagonal leaves the quad.
std::vector<Point2> primal_edge_polyline(const OrthodiagonalMap& map, int face);
std::vector<Point2> dual_edge_polyline(const OrthodiagonalMap& map, int face);

struct AugmentedDuals {
  Network primal;  // face edges first, then one edge per boundary dual vertex
  Network dual;    // face edges first, then one edge per boundary dual vertex to the apex
  std::vector<int> primal_map_vertex;
  std::vector<int> dual_map_vertex;  // -1 for the apex
  std::vector<Point2> primal_pos;
  std::vector<Point2> dual_pos;
  int num_face_edges = 0;
  int apex = -1;  // index in dual
  Point2 apex_pos;
  // New primal edge j joins the two boundary primal neighbours of boundary dual vertex boundary_dual[j].
  std::vector<int> boundary_dual;
};

// Apex is placed at center + (apex_radius, 0); new edges carry unit conductance.
AugmentedDuals augmented_duals(const OrthodiagonalMap& map, Point2 center, double apex_radius);

// 2-connected components of the vertex-edge graph, each re-emitted with its faces.
std::vector<OrthodiagonalMap> blocks(const OrthodiagonalMap& map);
// Submap induced by a face subset, keeping vertex ids.
OrthodiagonalMap face_submap(const OrthodiagonalMap& map, const std::vector<int>& faces);

}  // namespace odmap
