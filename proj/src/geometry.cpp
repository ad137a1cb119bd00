#include "odmap/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "odmap/errors.hpp"

namespace odmap {

double signed_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    s += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * s;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  Point2 ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

bool segments_properly_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  double d1 = cross(b - a, c - a);
  double d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c);
  double d4 = cross(d - c, b - c);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double segment_segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
  if (segments_properly_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

bool point_in_polygon(Point2 p, const std::vector<Point2>& poly) {
  bool inside = false;
  std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_segment_distance(p, poly[j], poly[i]) <= 1e-14) return true;
    Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double interior_angle(const std::vector<Point2>& poly, std::size_t i) {
  std::size_t n = poly.size();
  Point2 to_next = poly[(i + 1) % n] - poly[i];
  Point2 to_prev = poly[(i + n - 1) % n] - poly[i];
  double a = std::atan2(cross(to_next, to_prev), dot(to_next, to_prev));
  if (a <= 0) a += 2 * std::numbers::pi;
  return a;
}

Circle circumcircle(Point2 a, Point2 b, Point2 c) {
  Point2 ab = b - a, ac = c - a;
  double d = 2.0 * cross(ab, ac);
  if (std::abs(d) < 1e-300) throw GeometryError("circumcircle of collinear points");
  double b2 = dot(ab, ab), c2 = dot(ac, ac);
  Point2 u{(ac.y * b2 - ab.y * c2) / d, (ab.x * c2 - ac.x * b2) / d};
  return {a + u, norm(u)};
}

Domain Domain::unit_disk() { return disk({0, 0}, 1.0); }

Domain Domain::disk(Point2 center, double radius) {
  Domain d;
  d.kind_ = Kind::Disk;
  d.center_ = center;
  d.radius_ = radius;
  return d;
}

Domain Domain::unit_square() { return rectangle(0, 0, 1, 1); }

Domain Domain::rectangle(double x0, double y0, double x1, double y1) {
  Domain d;
  d.kind_ = Kind::Square;
  d.poly_ = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  return d;
}

Domain Domain::polygon(std::vector<Point2> vertices) {
  if (vertices.size() < 3) throw StructuralError("polygon domain needs at least 3 vertices");
  if (signed_area(vertices) < 0) std::reverse(vertices.begin(), vertices.end());
  Domain d;
  d.kind_ = Kind::Polygon;
  d.poly_ = std::move(vertices);
  return d;
}

bool Domain::contains(Point2 p) const {
  if (kind_ == Kind::Disk) return dist(p, center_) <= radius_ * (1 + 1e-14);
  return point_in_polygon(p, poly_);
}

double Domain::boundary_distance(Point2 p) const {
  if (kind_ == Kind::Disk) return std::abs(dist(p, center_) - radius_);
  double best = INFINITY;
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    best = std::min(best, point_segment_distance(p, poly_[i], poly_[(i + 1) % poly_.size()]));
  }
  return best;
}

double Domain::segment_boundary_distance(Point2 a, Point2 b) const {
  if (kind_ == Kind::Disk) {
    double near = point_segment_distance(center_, a, b);
    double far = std::max(dist(a, center_), dist(b, center_));
    if (near <= radius_ && far >= radius_) return 0.0;
    return std::min(std::abs(near - radius_), std::abs(far - radius_));
  }
  double best = INFINITY;
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    best = std::min(best, segment_segment_distance(a, b, poly_[i], poly_[(i + 1) % poly_.size()]));
  }
  return best;
}

double Domain::diameter() const {
  if (kind_ == Kind::Disk) return 2 * radius_;
  double best = 0.0;
  for (auto& p : poly_)
    for (auto& q : poly_) best = std::max(best, dist(p, q));
  return best;
}

double Domain::perimeter() const {
  if (kind_ == Kind::Disk) return 2 * std::numbers::pi * radius_;
  double s = 0.0;
  for (std::size_t i = 0; i < poly_.size(); ++i) s += dist(poly_[i], poly_[(i + 1) % poly_.size()]);
  return s;
}

std::vector<Point2> Domain::boundary_samples(int m) const {
  std::vector<Point2> out;
  out.reserve(m);
  if (kind_ == Kind::Disk) {
    for (int k = 0; k < m; ++k) {
      double t = 2 * std::numbers::pi * k / m;
      out.push_back({center_.x + radius_ * std::cos(t), center_.y + radius_ * std::sin(t)});
    }
    return out;
  }
  double total = perimeter();
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (int k = 0; k < m; ++k) {
    double s = total * k / m;
    while (seg + 1 < poly_.size() &&
           seg_start + dist(poly_[seg], poly_[seg + 1]) < s) {
      seg_start += dist(poly_[seg], poly_[seg + 1]);
      ++seg;
    }
    Point2 a = poly_[seg], b = poly_[(seg + 1) % poly_.size()];
    double len = dist(a, b);
    double t = len > 0 ? std::clamp((s - seg_start) / len, 0.0, 1.0) : 0.0;
    out.push_back(a + t * (b - a));
  }
  return out;
}

void Domain::bounding_box(double& x0, double& y0, double& x1, double& y1) const {
  if (kind_ == Kind::Disk) {
    x0 = center_.x - radius_;
    x1 = center_.x + radius_;
    y0 = center_.y - radius_;
    y1 = center_.y + radius_;
    return;
  }
  x0 = y0 = INFINITY;
  x1 = y1 = -INFINITY;
  for (auto& p : poly_) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
}

double hausdorff_distance(const std::vector<Point2>& poly, const Domain& domain, int m) {
  if (poly.size() < 2) throw GeometryError("hausdorff_distance needs a polygon");
  double worst = 0.0;
  for (Point2 s : domain.boundary_samples(m)) {
    double best = INFINITY;
    for (std::size_t i = 0; i < poly.size(); ++i)
      best = std::min(best, point_segment_distance(s, poly[i], poly[(i + 1) % poly.size()]));
    worst = std::max(worst, best);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) total += dist(poly[i], poly[(i + 1) % poly.size()]);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    int k = std::max(1, static_cast<int>(std::ceil(m * dist(a, b) / total)));
    for (int j = 0; j < k; ++j) worst = std::max(worst, domain.boundary_distance(a + (double(j) / k) * (b - a)));
  }
  return worst;
}

}  // namespace odmap
