#include "fingen/geometry/bezier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fingen/errors.hpp"

namespace fingen::geometry {

namespace {

double binomial(int n, int k) {
  double result = 1.0;
  for (int j = 1; j <= k; ++j) result = result * static_cast<double>(n - k + j) / j;
  return result;
}

// Nodes and weights on [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int m) {
  QuadratureRule rule;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int k = 0; k < m; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= m; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[k] = 0.5 * (1.0 - x);
    rule.weights[k] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Point derivative(const BezierSegment& s, double u) {
  const auto pts = s.control_points();
  const int n = s.degree();
  std::vector<Point> diff(n);
  for (int i = 0; i < n; ++i) diff[i] = static_cast<double>(n) * (pts[i + 1] - pts[i]);
  if (n == 1) return diff[0];
  return BezierSegment(std::move(diff)).evaluate(u);
}

}  // namespace

double bernstein_basis(int i, int n, double u) {
  if (n < 0 || i < 0 || i > n) {
    throw std::domain_error("bernstein_basis: index " + std::to_string(i) + " outside [0, " +
                            std::to_string(n) + "]");
  }
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("bernstein_basis: parameter outside [0, 1]");
  return binomial(n, i) * std::pow(u, i) * std::pow(1.0 - u, n - i);
}

BezierSegment::BezierSegment(std::vector<Point> control_points) : points_(std::move(control_points)) {
  if (points_.size() < 2) throw GeometryError("Bezier segment needs at least two control points");
  for (const auto& p : points_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw GeometryError("Bezier control point is not finite");
    }
  }
}

Point BezierSegment::evaluate(double u) const {
  if (u <= 0.0) return points_.front();
  if (u >= 1.0) return points_.back();
  std::vector<Point> work(points_);
  for (std::size_t level = work.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) work[i] = (1.0 - u) * work[i] + u * work[i + 1];
  }
  return work.front();
}

BezierSegment BezierSegment::elevated() const {
  const int n = degree();
  std::vector<Point> out(n + 2);
  out.front() = points_.front();
  out.back() = points_.back();
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / (n + 1);
    out[i] = a * points_[i - 1] + (1.0 - a) * points_[i];
  }
  return BezierSegment(std::move(out));
}

Point evaluate_bezier(const BezierSegment& segment, double u) { return segment.evaluate(u); }

CompositeBezier CompositeBezier::build(const std::vector<std::vector<Point>>& points_per_segment,
                                       bool closed) {
  if (points_per_segment.empty()) throw GeometryError("composite curve needs at least one segment");
  std::vector<BezierSegment> segments;
  segments.reserve(points_per_segment.size());
  for (const auto& pts : points_per_segment) segments.emplace_back(pts);

  auto check_junction = [](const Point& a, const Point& b, std::size_t k) {
    if (std::abs(a.x - b.x) > kJunctionTolerance || std::abs(a.y - b.y) > kJunctionTolerance) {
      throw ContinuityError("junction mismatch after segment " + std::to_string(k));
    }
  };
  for (std::size_t k = 0; k + 1 < segments.size(); ++k) {
    check_junction(segments[k].back(), segments[k + 1].front(), k);
  }
  if (closed) check_junction(segments.back().back(), segments.front().front(), segments.size() - 1);

  CompositeBezier curve(std::move(segments), closed);
  if (closed && !(curve.area() > kMinArea)) {
    throw GeometryError("closed composite curve encloses no area");
  }
  return curve;
}

std::size_t CompositeBezier::free_point_count() const {
  std::size_t count = closed_ ? 0 : 1;
  for (const auto& s : segments_) count += s.control_points().size() - 1;
  return count;
}

std::vector<Point> CompositeBezier::free_points() const {
  std::vector<Point> out;
  out.reserve(free_point_count());
  for (const auto& s : segments_) {
    const auto pts = s.control_points();
    out.insert(out.end(), pts.begin(), pts.end() - 1);
  }
  if (!closed_) out.push_back(segments_.back().back());
  return out;
}

CompositeBezier CompositeBezier::with_free_points(std::span<const Point> points) const {
  if (points.size() != free_point_count()) {
    throw InputError("expected " + std::to_string(free_point_count()) + " free points, got " +
                     std::to_string(points.size()));
  }
  std::vector<BezierSegment> segments;
  segments.reserve(segments_.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const std::size_t p = segments_[k].control_points().size();
    std::vector<Point> pts(points.begin() + cursor, points.begin() + cursor + (p - 1));
    cursor += p - 1;
    // The closing point of the last closed segment wraps to the first free point.
    pts.push_back(cursor < points.size() ? points[cursor] : points[0]);
    segments.emplace_back(std::move(pts));
  }
  return CompositeBezier(std::move(segments), closed_);
}

std::vector<Point> CompositeBezier::sample(int samples_per_segment) const {
  if (samples_per_segment < 1) throw InputError("samples per segment must be positive");
  std::vector<Point> out;
  out.reserve(segments_.size() * samples_per_segment + 1);
  for (const auto& s : segments_) {
    for (int k = 0; k < samples_per_segment; ++k) {
      out.push_back(s.evaluate(static_cast<double>(k) / samples_per_segment));
    }
  }
  if (!closed_) out.push_back(segments_.back().back());
  return out;
}

double CompositeBezier::signed_area() const {
  double total = 0.0;
  for (const auto& s : segments_) {
    const auto rule = gauss_legendre(std::max(1, s.degree()));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Point p = s.evaluate(rule.nodes[q]);
      const Point d = derivative(s, rule.nodes[q]);
      total += 0.5 * rule.weights[q] * cross(p, d);
    }
  }
  if (!closed_) {
    // Close an open chain with the straight chord for a well-defined value.
    total += 0.5 * cross(segments_.back().back(), segments_.front().front());
  }
  return total;
}

double CompositeBezier::area() const { return std::abs(signed_area()); }

Point CompositeBezier::centroid_of_control_points() const {
  const auto pts = free_points();
  Point c;
  for (const auto& p : pts) c = c + p;
  return (1.0 / static_cast<double>(pts.size())) * c;
}

}  // namespace fingen::geometry
