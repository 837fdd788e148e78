#include "fingen/geometry/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fingen/errors.hpp"

namespace fingen::geometry {

namespace {

struct Bounds {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  bool overlaps(const Bounds& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }
};

Bounds bounds_of(std::span<const Point> pts) {
  Bounds b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const auto& p : pts) {
    b.x_min = std::min(b.x_min, p.x);
    b.x_max = std::max(b.x_max, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Point a, Point b, Point p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) || std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
      std::max(p1.y, p2.y) < std::min(q1.y, q2.y) || std::max(q1.y, q2.y) < std::min(p1.y, p2.y)) {
    return false;
  }
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool loops_intersect(std::span<const Point> a, std::span<const Point> b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < na; ++i) {
    const Point a0 = a[i];
    const Point a1 = a[(i + 1) % na];
    for (std::size_t j = 0; j < nb; ++j) {
      if (segments_intersect(a0, a1, b[j], b[(j + 1) % nb])) return true;
    }
  }
  return false;
}

std::vector<Point> cubic_rounded_corner_loop(Point c, double a, double b) {
  // Side-midpoint junctions; inner control points pulled 90% toward the corner.
  constexpr double k = 0.9;
  return {
      {c.x + a, c.y},         {c.x + a, c.y + k * b}, {c.x + k * a, c.y + b}, {c.x, c.y + b},
      {c.x - k * a, c.y + b}, {c.x - a, c.y + k * b}, {c.x - a, c.y},         {c.x - a, c.y - k * b},
      {c.x - k * a, c.y - b}, {c.x, c.y - b},         {c.x + k * a, c.y - b}, {c.x + a, c.y - k * b},
  };
}

}  // namespace

Point Box::clamp(Point p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

Box shape_box(Point center, double length, double height) {
  const double hw = length / 6.0;
  const double hh = height / 8.0;
  return {center.x - hw, center.y - hh, center.x + hw, center.y + hh};
}

CompositeBezier make_shape(ShapeKind kind, const Box& box, double fraction, int degree) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("shape fraction must lie in (0, 1]");
  if (degree < 1) throw InputError("segment degree must be at least 1");
  const Point c = box.center();
  const double a = 0.5 * fraction * box.width();
  const double b = 0.5 * fraction * box.height();

  std::vector<std::vector<Point>> segments;
  if (kind == ShapeKind::rectangle) {
    const std::vector<Point> corners = {
        {c.x + a, c.y - b}, {c.x + a, c.y + b}, {c.x - a, c.y + b}, {c.x - a, c.y - b}};
    for (int s = 0; s < 4; ++s) {
      const Point p0 = corners[s];
      const Point p1 = corners[(s + 1) % 4];
      std::vector<Point> pts;
      for (int i = 0; i <= degree; ++i) {
        const double t = static_cast<double>(i) / degree;
        pts.push_back((1.0 - t) * p0 + t * p1);
      }
      segments.push_back(std::move(pts));
    }
    return CompositeBezier::build(segments, true);
  }

  if (degree < 2) throw InputError("rounded rectangle needs segment degree >= 2");
  if (degree == 2) {
    const std::vector<Point> mids = {{c.x + a, c.y}, {c.x, c.y + b}, {c.x - a, c.y}, {c.x, c.y - b}};
    const std::vector<Point> corners = {
        {c.x + a, c.y + b}, {c.x - a, c.y + b}, {c.x - a, c.y - b}, {c.x + a, c.y - b}};
    for (int s = 0; s < 4; ++s) segments.push_back({mids[s], corners[s], mids[(s + 1) % 4]});
    return CompositeBezier::build(segments, true);
  }
  const auto loop = cubic_rounded_corner_loop(c, a, b);
  for (int s = 0; s < 4; ++s) {
    BezierSegment seg({loop[3 * s], loop[3 * s + 1], loop[3 * s + 2], loop[(3 * s + 3) % 12]});
    for (int d = 3; d < degree; ++d) seg = seg.elevated();
    const auto pts = seg.control_points();
    segments.emplace_back(pts.begin(), pts.end());
  }
  return CompositeBezier::build(segments, true);
}

CompositeBezier reference_rectangle(const Box& box, int degree) {
  return make_shape(ShapeKind::rectangle, box, 0.5, degree);
}

DesignSpace single_fin_layout(double height, ShapeKind kind, int degree, double fraction) {
  DesignSpace space;
  space.length = 1.0;
  space.height = height;
  space.boxes.push_back(shape_box({0.5, 0.5 * height}, space.length, height));
  space.shapes.push_back(make_shape(kind, space.boxes.back(), fraction, degree));
  return space;
}

DesignSpace staggered_layout(double height, ShapeKind kind, int degree, double fraction) {
  DesignSpace space;
  space.length = 1.0;
  space.height = height;
  const std::vector<Point> centers = {{0.3, 0.2 * height},  {0.3, 0.5 * height}, {0.3, 0.8 * height},
                                      {0.7, 0.35 * height}, {0.7, 0.65 * height}};
  for (const auto& c : centers) {
    space.boxes.push_back(shape_box(c, space.length, height));
    space.shapes.push_back(make_shape(kind, space.boxes.back(), fraction, degree));
  }
  return space;
}

DesignSpace named_layout(const std::string& name) {
  if (name == "single") return single_fin_layout();
  if (name == "staggered") return staggered_layout();
  throw InputError("unknown layout '" + name + "' (expected single or staggered)");
}

DesignSpace reference_layout(const DesignSpace& space) {
  DesignSpace ref;
  ref.length = space.length;
  ref.height = space.height;
  ref.boxes = space.boxes;
  for (const auto& box : space.boxes) ref.shapes.push_back(reference_rectangle(box));
  return ref;
}

CompositeBezier perturb_control_points(const CompositeBezier& shape, std::span<const double> deltas,
                                       const Box& box) {
  auto points = shape.free_points();
  if (deltas.size() != 2 * points.size()) {
    throw InputError("perturbation has " + std::to_string(deltas.size()) + " components, shape has " +
                     std::to_string(2 * points.size()) + " degrees of freedom");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    points[k] = box.clamp({points[k].x + deltas[2 * k], points[k].y + deltas[2 * k + 1]});
  }
  return shape.with_free_points(points);
}

std::vector<double> normalized_control_points(const CompositeBezier& shape, const Box& box) {
  const auto points = shape.free_points();
  const Point c = box.center();
  const double hw = 0.5 * box.width();
  const double hh = 0.5 * box.height();
  std::vector<double> out;
  out.reserve(2 * points.size());
  for (const auto& p : points) {
    out.push_back(std::clamp((p.x - c.x) / hw, -1.0, 1.0));
    out.push_back(std::clamp((p.y - c.y) / hh, -1.0, 1.0));
  }
  return out;
}

bool polyline_self_intersects(std::span<const Point> loop) {
  const std::size_t m = loop.size();
  if (m < 4) return false;
  std::vector<Bounds> edge_bounds(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Point a = loop[i];
    const Point b = loop[(i + 1) % m];
    edge_bounds[i] = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;  // adjacent through the closing edge
      if (!edge_bounds[i].overlaps(edge_bounds[j])) continue;
      if (segments_intersect(loop[i], loop[(i + 1) % m], loop[j], loop[(j + 1) % m])) return true;
    }
  }
  return false;
}

bool point_in_polygon(std::span<const Point> loop, Point p) {
  bool inside = false;
  const std::size_t m = loop.size();
  for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
    const Point a = loop[i];
    const Point b = loop[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t k = 0; k < issues.size(); ++k) {
    if (k) out << "; ";
    out << issues[k].check;
    if (issues[k].shape >= 0) out << " (shape " << issues[k].shape;
    if (issues[k].other >= 0) out << " vs " << issues[k].other;
    if (issues[k].shape >= 0) out << ")";
    if (!issues[k].detail.empty()) out << ": " << issues[k].detail;
  }
  return out.str();
}

ValidationReport validate_geometry(const DesignSpace& space, const ValidationOptions& options) {
  ValidationReport report;
  auto fail = [&report](bool& flag, std::string check, int shape, int other, std::string detail) {
    flag = false;
    report.issues.push_back({std::move(check), shape, other, std::move(detail)});
  };

  if (!(space.length > 0.0) || !(space.height > 0.0)) {
    fail(report.layout_consistent, "layout", -1, -1, "domain dimensions must be positive");
    return report;
  }
  if (!space.boxes.empty() && space.boxes.size() != space.shapes.size()) {
    fail(report.layout_consistent, "layout", -1, -1, "box count does not match shape count");
  }

  const int n = static_cast<int>(space.shapes.size());
  std::vector<std::vector<Point>> loops(n);
  std::vector<Bounds> bounds(n);
  for (int s = 0; s < n; ++s) {
    const auto& shape = space.shapes[s];
    if (!shape.closed()) fail(report.layout_consistent, "layout", s, -1, "shape is not closed");
    loops[s] = shape.sample(options.samples_per_segment);
    bounds[s] = bounds_of(loops[s]);

    if (!(shape.area() > CompositeBezier::kMinArea)) {
      fail(report.positive_area, "area", s, -1, "enclosed area is not positive");
    }
    if (polyline_self_intersects(loops[s])) {
      fail(report.simple, "simplicity", s, -1, "boundary crosses itself");
    }
    const double m = options.margin;
    if (bounds[s].x_min < m || bounds[s].y_min < m || bounds[s].x_max > space.length - m ||
        bounds[s].y_max > space.height - m) {
      fail(report.within_margin, "margin", s, -1, "boundary closer than the margin to a domain edge");
    }
    if (static_cast<std::size_t>(s) < space.boxes.size()) {
      for (const auto& p : shape.free_points()) {
        if (!space.boxes[s].contains(p, 1e-12)) {
          fail(report.inside_boxes, "box", s, -1, "control point outside its box");
          break;
        }
      }
    }
  }

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (!bounds[a].overlaps(bounds[b])) continue;
      if (loops_intersect(loops[a], loops[b]) || point_in_polygon(loops[a], loops[b][0]) ||
          point_in_polygon(loops[b], loops[a][0])) {
        fail(report.disjoint, "disjointness", a, b, "shapes overlap");
      }
    }
  }
  return report;
}

}  // namespace fingen::geometry
