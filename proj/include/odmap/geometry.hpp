#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace odmap {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }
inline Point2 rot90(Point2 a) { return {-a.y, a.x}; }
inline Point2 midpoint(Point2 a, Point2 b) { return 0.5 * (a + b); }
inline bool is_finite(Point2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

inline std::complex<double> to_complex(Point2 p) { return {p.x, p.y}; }
inline Point2 to_point(std::complex<double> z) { return {z.real(), z.imag()}; }

// Signed area of a closed polygon, positive when counterclockwise.
double signed_area(const std::vector<Point2>& poly);

double point_segment_distance(Point2 p, Point2 a, Point2 b);
double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d);
bool segments_properly_intersect(Point2 a, Point2 b, Point2 c, Point2 d);

// Even-odd test; points on the boundary count as inside.
bool point_in_polygon(Point2 p, const std::vector<Point2>& poly);

// Interior angle at corner i of a counterclockwise polygon, in (0, 2*pi).
double interior_angle(const std::vector<Point2>& poly, std::size_t i);

struct Circle {
  Point2 center;
  double radius = 0.0;
};

// Circle through three points; throws on collinear input.
Circle circumcircle(Point2 a, Point2 b, Point2 c);

// Bounded simply connected region used as a target for sweeps and clipping.
class Domain {
 public:
  enum class Kind { Disk, Square, Polygon };

  static Domain unit_disk();
  static Domain disk(Point2 center, double radius);
  static Domain unit_square();
  static Domain rectangle(double x0, double y0, double x1, double y1);
  static Domain polygon(std::vector<Point2> vertices);

  Kind kind() const { return kind_; }
  Point2 center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Point2>& vertices() const { return poly_; }

  bool contains(Point2 p) const;
  double boundary_distance(Point2 p) const;
  // Smallest distance from a segment to the boundary curve.
  double segment_boundary_distance(Point2 a, Point2 b) const;
  double diameter() const;
  double perimeter() const;
  // m points spaced evenly by arc length along the boundary.
  std::vector<Point2> boundary_samples(int m) const;
  void bounding_box(double& x0, double& y0, double& x1, double& y1) const;

 private:
  Kind kind_ = Kind::Square;
  Point2 center_;
  double radius_ = 0.0;
  std::vector<Point2> poly_;
};

// Two-sided Hausdorff distance between a closed polygon and a domain boundary.
// Polygon edges are exact; the domain boundary and the polygon edges are sampled with m points each.
double hausdorff_distance(const std::vector<Point2>& poly, const Domain& domain, int m);

}  // namespace odmap
