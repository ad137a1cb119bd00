#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "odmap/core_map.hpp"
#include "odmap/geometry.hpp"

namespace odmap {

// Finite triangulation of a closed disk. Faces are counterclockwise index triples.
class Triangulation {
 public:
  Triangulation() = default;
  // Throws StructuralError unless the faces form a simple triangulated disk.
  Triangulation(std::vector<int> ids, const std::vector<std::array<int, 3>>& faces_by_id);
  static Triangulation from_indices(std::vector<int> ids, std::vector<std::array<int, 3>> faces);

  int num_vertices() const { return static_cast<int>(ids_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int id(int v) const { return ids_[v]; }
  const std::vector<int>& ids() const { return ids_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  // Outer cycle, oriented so each step u -> v is a directed edge of some face.
  const std::vector<int>& boundary() const { return boundary_; }
  bool is_boundary(int v) const { return on_boundary_[v] != 0; }
  const std::vector<int>& faces_at(int v) const { return faces_at_[v]; }
  // Undirected edges (a < b) with the face on the left of a -> b and of b -> a, -1 if none.
  struct TriEdge {
    int a, b, left, right;
  };
  const std::vector<TriEdge>& edges() const { return edges_; }
  int num_interior() const;

 private:
  void derive();

  std::vector<int> ids_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<int> boundary_;
  std::vector<char> on_boundary_;
  std::vector<std::vector<int>> faces_at_;
  std::vector<TriEdge> edges_;
};

struct PackOptions {
  double tol = 1e-12;  // angle-sum residual target
  int max_iter = 100000;
};

// Packing in the unit disk: interior circles are hyperbolic circles, boundary circles horocycles.
struct CirclePacking {
  std::vector<Circle> circles;            // by triangulation vertex index
  std::vector<double> hyperbolic_radius;  // +inf on the boundary
  int center_vertex = -1;                 // its circle is centred at the origin, -1 if none
  int iterations = 0;
  double angle_residual = 0.0;     // worst |angle sum - 2 pi| over interior vertices
  double tangency_residual = 0.0;  // worst ||c_u - c_v| - r_u - r_v| over edges
  double boundary_residual = 0.0;  // worst ||c_b| + r_b - 1| over boundary vertices
  double max_radius = 0.0;
  double max_boundary_radius = 0.0;
};

// Angle at v of the hyperbolic triangle of mutually tangent circles; inf radii are horocycles.
double triangle_angle(double hv, double ha, double hb);
// Angle sums at the interior vertices for given hyperbolic radii.
std::vector<double> angle_sums(const Triangulation& t, const std::vector<double>& h);

CirclePacking pack_in_disk(const Triangulation& t, const PackOptions& opt = {});

// Incircle of a non-degenerate triangle.
Circle incircle(Point2 a, Point2 b, Point2 c);

struct DiskCertificate {
  double mesh = 0.0;
  double mesh_bound = 0.0;
  double hausdorff = 0.0;
  double hausdorff_bound = 0.0;
  bool center_at_origin = false;    // some circle is centred at 0
  bool center_in_inner_disk = false;  // some centre has |z| < 1 - 2 delta
  bool holds() const { return mesh <= mesh_bound * (1 + 1e-9) && hausdorff <= hausdorff_bound * (1 + 1e-9); }
};

struct PackedMap {
  OrthodiagonalMap map;
  std::vector<double> eta;  // per boundary edge, in boundary order
  DiskCertificate certificate;
  double tangency_point_residual = 0.0;  // worst distance between incircle contact and circle contact
  std::vector<std::string> warnings;
};

// Primal vertices at circle centres keep the triangulation ids; dual vertices get fresh ids above them.
// eta defaults to half the smaller adjacent boundary radius; larger requests are shrunk with a warning.
PackedMap orthodiagonal_from_packing(const Triangulation& t, const CirclePacking& p,
                                     std::optional<double> eta = std::nullopt, int hausdorff_samples = 2000);

// Simple planar map given by its faces, every face a cycle and every directed edge used once.
class PlanarMap3C {
 public:
  PlanarMap3C() = default;
  // Throws StructuralError when the faces do not describe a simple map of the sphere.
  PlanarMap3C(std::vector<int> ids, const std::vector<std::vector<int>>& faces_by_id);
  static PlanarMap3C from_indices(std::vector<int> ids, std::vector<std::vector<int>> faces);

  int num_vertices() const { return static_cast<int>(ids_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int id(int v) const { return ids_[v]; }
  const std::vector<int>& ids() const { return ids_; }
  const std::vector<std::vector<int>>& faces() const { return faces_; }
  // Face with u -> v on its boundary, -1 if the directed edge is absent.
  int face_of(int u, int v) const;
  // Faces around v in counterclockwise order.
  const std::vector<int>& rotation(int v) const { return rotation_[v]; }
  std::vector<std::array<int, 2>> edges() const;  // undirected, a < b
  std::vector<std::vector<int>> adjacency() const;

 private:
  void derive();

  std::vector<int> ids_;
  std::vector<std::vector<int>> faces_;
  std::vector<std::vector<std::pair<int, int>>> out_;  // per vertex: (head, face)
  std::vector<std::vector<int>> rotation_;
};

bool is_three_connected(const PlanarMap3C& h);

enum class CircleKind { Finite, Horocycle, Geodesic, Outer };

struct DoubleCirclePacking {
  int outer_face = -1;
  std::vector<Circle> vertex_circles;
  std::vector<Circle> face_circles;  // outer face is the unit circle
  std::vector<CircleKind> vertex_kind;
  std::vector<CircleKind> face_kind;
  std::vector<double> vertex_h;  // hyperbolic radii, +inf unless Finite
  std::vector<double> face_h;
  struct EdgePoint {
    int u = 0, v = 0;            // vertex indices, a < b
    int left = -1, right = -1;   // faces on the left of u -> v and of v -> u
    Point2 q;
  };
  std::vector<EdgePoint> edge_points;
  int iterations = 0;
  double angle_residual = 0.0;
  double tangency_residual = 0.0;       // vertex-vertex and face-face, relative to the larger radius
  double orthogonality_residual = 0.0;  // worst |cos| of the crossing angle at q_e
  double contact_residual = 0.0;        // worst distance between vertex and face contact points
};

DoubleCirclePacking double_pack(const PlanarMap3C& h, int outer_face, const PackOptions& opt = {});

// Angle sums at every finite circle (vertices first, then faces) for the given radii.
std::vector<double> double_angle_sums(const PlanarMap3C& h, int outer_face, const std::vector<double>& vertex_h,
                                      const std::vector<double>& face_h);

PackedMap orthodiagonal_from_double_packing(const PlanarMap3C& h, const DoubleCirclePacking& dp,
                                            std::optional<double> eta = std::nullopt,
                                            int hausdorff_samples = 2000);

// Static SVG of circles and, optionally, the map's faces.
std::string packing_svg(const std::vector<Circle>& circles, const OrthodiagonalMap* map = nullptr);

}  // namespace odmap
