#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fingen::geometry {

// A point in dimensionless domain coordinates: x as a fraction of the domain
// length, y as a fraction of the domain height scale.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

using ControlPoint = Point;

// Bernstein basis polynomial C(n,i) u^i (1-u)^(n-i).
// Throws std::domain_error when i is outside [0, n] or u outside [0, 1].
double bernstein_basis(int i, int n, double u);

// A single Bezier segment of degree n >= 1 (n + 1 control points).
class BezierSegment {
 public:
  explicit BezierSegment(std::vector<Point> control_points);

  int degree() const { return static_cast<int>(points_.size()) - 1; }
  std::span<const Point> control_points() const { return points_; }
  const Point& front() const { return points_.front(); }
  const Point& back() const { return points_.back(); }

  // De Casteljau evaluation; exact at both endpoints.
  Point evaluate(double u) const;

  // Same curve, one degree higher.
  BezierSegment elevated() const;

 private:
  std::vector<Point> points_;
};

Point evaluate_bezier(const BezierSegment& segment, double u);

// Default sampling density used for simplicity tests and rasterization.
inline constexpr int kDefaultSamplesPerSegment = 128;

// Ordered chain of Bezier segments with C0 junctions. Closed chains join the
// last segment back to the first and enclose a non-degenerate area.
class CompositeBezier {
 public:
  static constexpr double kJunctionTolerance = 1e-9;
  static constexpr double kMinArea = 1e-12;

  // Throws ContinuityError on junction mismatch and GeometryError on a
  // degenerate closed loop or a segment with fewer than two points.
  static CompositeBezier build(const std::vector<std::vector<Point>>& points_per_segment,
                               bool closed = true);

  std::span<const BezierSegment> segments() const { return segments_; }
  bool closed() const { return closed_; }

  // Distinct control points; junctions appear once. Closed chains list
  // segment k's points 0..p-2 in order, open chains also append the last point.
  std::vector<Point> free_points() const;
  std::size_t free_point_count() const;
  std::size_t dof() const { return 2 * free_point_count(); }

  // Rebuilds the chain from a new set of free points (same layout).
  CompositeBezier with_free_points(std::span<const Point> points) const;

  // Dense polyline: samples_per_segment points per segment, the shared
  // endpoint of consecutive segments emitted once. Closed loops do not repeat
  // the first point.
  std::vector<Point> sample(int samples_per_segment = kDefaultSamplesPerSegment) const;

  // Signed area from Green's theorem on the exact curve (Gauss-Legendre,
  // exact for polynomial integrands). Positive for counter-clockwise loops.
  double signed_area() const;
  double area() const;

  Point centroid_of_control_points() const;

 private:
  CompositeBezier(std::vector<BezierSegment> segments, bool closed)
      : segments_(std::move(segments)), closed_(closed) {}

  std::vector<BezierSegment> segments_;
  bool closed_ = true;
};

}  // namespace fingen::geometry
