#pragma once

#include <span>
#include <string>
#include <vector>

#include "fingen/geometry/bezier.hpp"

namespace fingen::geometry {

// Axis-aligned rectangle in domain coordinates.
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(Point p, double tol = 0.0) const {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol;
  }
  Point clamp(Point p) const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Per-shape confinement box: width L/3, height H/4, centered on `center`.
Box shape_box(Point center, double length, double height);

// Rectangular channel [0, L] x [0, H]: inlet at x = 0, outlet at x = L,
// periodic in y. Each shape is confined to the box with the same index.
struct DesignSpace {
  double length = 1.0;
  double height = 1.0;
  std::vector<CompositeBezier> shapes;
  std::vector<Box> boxes;
};

enum class ShapeKind { rounded_rectangle, rectangle };

// Four-segment loop centered in `box`, spanning `fraction` of its width and
// height. `degree` >= 1 sets the segment degree (3 gives four control points
// per segment). Rounded rectangles join segments at side midpoints and bend
// around the corners; rectangles join at the corners with collinear control
// points along each side. Loops are counter-clockwise.
CompositeBezier make_shape(ShapeKind kind, const Box& box, double fraction = 0.5, int degree = 3);

// The reference rectangle: straight-sided, 0.5 x box dimensions.
CompositeBezier reference_rectangle(const Box& box, int degree = 1);

// One shape centered in a unit-length channel of the given height.
DesignSpace single_fin_layout(double height = 1.0, ShapeKind kind = ShapeKind::rounded_rectangle,
                              int degree = 3, double fraction = 0.5);

// Five staggered shapes: three in an upstream column, two in a downstream
// column offset by half a box pitch. Boxes are pairwise disjoint.
DesignSpace staggered_layout(double height = 1.0, ShapeKind kind = ShapeKind::rounded_rectangle,
                             int degree = 3, double fraction = 0.5);

// "single" or "staggered" with default arguments; throws InputError.
DesignSpace named_layout(const std::string& name);

// Layout with the same domain and boxes as `space`, each shape replaced by
// its box's reference rectangle.
DesignSpace reference_layout(const DesignSpace& space);

// Number of displacement components accepted by perturb_control_points.
inline std::size_t shape_dof(const CompositeBezier& shape) { return shape.dof(); }

// Moves every free control point by (deltas[2k], deltas[2k+1]) and clamps it
// to `box`. Junction points are single free points, so continuity holds.
CompositeBezier perturb_control_points(const CompositeBezier& shape, std::span<const double> deltas,
                                       const Box& box);

// Control points mapped to [-1, 1] per axis relative to the box, flattened
// as x0, y0, x1, y1, ...
std::vector<double> normalized_control_points(const CompositeBezier& shape, const Box& box);

struct ValidationOptions {
  // Required clearance between a shape and the domain edges (one grid cell at
  // the default resolution).
  double margin = 1.0 / 64.0;
  int samples_per_segment = kDefaultSamplesPerSegment;
};

struct ValidationIssue {
  std::string check;  // "simplicity", "area", "margin", "box", "disjointness", "layout"
  int shape = -1;
  int other = -1;
  std::string detail;
};

struct ValidationReport {
  bool simple = true;
  bool positive_area = true;
  bool within_margin = true;
  bool inside_boxes = true;
  bool disjoint = true;
  bool layout_consistent = true;
  std::vector<ValidationIssue> issues;

  bool ok() const {
    return simple && positive_area && within_margin && inside_boxes && disjoint && layout_consistent;
  }
  std::string summary() const;
};

ValidationReport validate_geometry(const DesignSpace& space, const ValidationOptions& options = {});

// Segment-pair test on a closed polyline; true when any two non-adjacent
// edges intersect.
bool polyline_self_intersects(std::span<const Point> loop);

// Even-odd point-in-polygon test on a closed polyline.
bool point_in_polygon(std::span<const Point> loop, Point p);

}  // namespace fingen::geometry
