#include <doctest.h>

#include <cmath>
#include <random>

#include "fingen/errors.hpp"
#include "fingen/geometry/design_space.hpp"
#include "fingen/geometry/geometry_io.hpp"

using namespace fingen::geometry;

namespace {

// Brute-force oracle: any two non-adjacent edges of the loop cross.
bool brute_force_crossing(const std::vector<Point>& loop) {
  const std::size_t m = loop.size();
  auto orient = [](Point a, Point b, Point c) { return cross(b - a, c - a); };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || (i + 1) % m == j || (j + 1) % m == i) continue;
      const Point a = loop[i], b = loop[(i + 1) % m], c = loop[j], d = loop[(j + 1) % m];
      const double d1 = orient(a, b, c), d2 = orient(a, b, d), d3 = orient(c, d, a), d4 = orient(c, d, b);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("shape box is L/3 by H/4 around its center") {
  const Box b = shape_box({0.5, 0.5}, 1.0, 1.0);
  CHECK(b.width() == doctest::Approx(1.0 / 3.0));
  CHECK(b.height() == doctest::Approx(0.25));
  CHECK(b.center().x == doctest::Approx(0.5));
}

TEST_CASE("layouts validate") {
  CHECK(validate_geometry(single_fin_layout()).ok());
  CHECK(validate_geometry(staggered_layout()).ok());
  const auto ref = reference_layout(staggered_layout());
  CHECK(ref.shapes.size() == 5);
  CHECK(validate_geometry(ref).ok());
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = a + 1; b < 5; ++b) {
      const auto& A = ref.boxes[a];
      const auto& B = ref.boxes[b];
      const bool overlap = A.x_min < B.x_max && B.x_min < A.x_max && A.y_min < B.y_max && B.y_min < A.y_max;
      CHECK_FALSE(overlap);
    }
  }
}

TEST_CASE("shape kinds and degrees") {
  const Box box = shape_box({0.5, 0.5}, 1.0, 1.0);
  const auto rect = reference_rectangle(box);
  CHECK(rect.area() == doctest::Approx(box.width() * box.height() * 0.25).epsilon(1e-12));
  const auto rect3 = make_shape(ShapeKind::rectangle, box, 0.5, 3);
  CHECK(rect3.area() == doctest::Approx(rect.area()).epsilon(1e-12));
  const auto rounded = make_shape(ShapeKind::rounded_rectangle, box, 0.5, 3);
  CHECK(rounded.dof() == 24);
  CHECK(rounded.area() < rect.area());
  const auto quartic = make_shape(ShapeKind::rounded_rectangle, box, 0.5, 4);
  CHECK(quartic.dof() == 32);
  CHECK(quartic.area() == doctest::Approx(rounded.area()).epsilon(1e-12));
  CHECK_THROWS_AS(make_shape(ShapeKind::rounded_rectangle, box, 0.5, 1), fingen::InputError);
}

TEST_CASE("perturbation: identity, clamping and junction sharing") {
  const auto space = single_fin_layout();
  const auto& shape = space.shapes[0];
  const Box& box = space.boxes[0];
  const std::vector<double> zeros(shape.dof(), 0.0);
  const auto same = perturb_control_points(shape, zeros, box);
  const auto a = shape.free_points();
  const auto b = same.free_points();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);

  std::vector<double> push(shape.dof(), 0.0);
  push[0] = 10.0 * box.width();
  const auto pushed = perturb_control_points(shape, push, box);
  CHECK(pushed.free_points()[0].x == box.x_max);
  // The moved point is a junction: last point of the last segment moves with it.
  CHECK(pushed.segments().back().back() == pushed.segments().front().front());

  CHECK_THROWS_AS(perturb_control_points(shape, std::vector<double>(3, 0.0), box), fingen::InputError);
}

TEST_CASE("perturbation property: continuity, confinement, idempotent zero step") {
  const auto space = single_fin_layout();
  const Box& box = space.boxes[0];
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dx(-box.width(), box.width());
  std::uniform_real_distribution<double> dy(-box.height(), box.height());
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> d(space.shapes[0].dof());
    for (std::size_t k = 0; k < d.size(); k += 2) {
      d[k] = dx(rng);
      d[k + 1] = dy(rng);
    }
    const auto moved = perturb_control_points(space.shapes[0], d, box);
    const auto segs = moved.segments();
    for (std::size_t s = 0; s < segs.size(); ++s) {
      CHECK(segs[s].back() == segs[(s + 1) % segs.size()].front());
    }
    for (const auto& p : moved.free_points()) CHECK(box.contains(p));
    const auto again = perturb_control_points(moved, std::vector<double>(d.size(), 0.0), box);
    const auto p1 = moved.free_points();
    const auto p2 = again.free_points();
    for (std::size_t k = 0; k < p1.size(); ++k) CHECK(p1[k] == p2[k]);
  }
}

TEST_CASE("normalized control points lie in [-1, 1]") {
  const auto space = staggered_layout();
  for (std::size_t s = 0; s < space.shapes.size(); ++s) {
    for (double v : normalized_control_points(space.shapes[s], space.boxes[s])) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
  const auto n = normalized_control_points(space.shapes[0], space.boxes[0]);
  CHECK(n[0] == doctest::Approx(0.5));  // right-mid junction at half the box half-width
  CHECK(n[1] == doctest::Approx(0.0));
}

TEST_CASE("validation: overlapping shapes fail disjointness") {
  DesignSpace space;
  const Box b1{0.2, 0.2, 0.6, 0.6};
  const Box b2{0.3, 0.3, 0.7, 0.7};
  space.shapes = {reference_rectangle(b1), reference_rectangle(Box{0.5, 0.5, 0.9, 0.9})};
  auto report = validate_geometry(space);
  CHECK(report.ok());
  space.shapes = {make_shape(ShapeKind::rectangle, b1, 0.9, 1), make_shape(ShapeKind::rectangle, b2, 0.9, 1)};
  report = validate_geometry(space);
  CHECK_FALSE(report.disjoint);
  CHECK_FALSE(report.ok());
}

TEST_CASE("validation: nested shapes fail disjointness") {
  DesignSpace space;
  const Box b{0.2, 0.2, 0.8, 0.8};
  space.shapes = {make_shape(ShapeKind::rectangle, b, 0.9, 1), make_shape(ShapeKind::rectangle, b, 0.3, 1)};
  CHECK_FALSE(validate_geometry(space).disjoint);
}

TEST_CASE("validation: bow tie fails simplicity, oracle agrees") {
  // Bow tie with unequal lobes (equal lobes would cancel to zero area).
  const auto crossing = CompositeBezier::build({{{0.3, 0.3}, {0.7, 0.7}}, {{0.7, 0.7}, {0.7, 0.2}},
                                                {{0.7, 0.2}, {0.3, 0.6}}, {{0.3, 0.6}, {0.3, 0.3}}});
  DesignSpace space;
  space.shapes = {crossing};
  CHECK_FALSE(validate_geometry(space).simple);
  CHECK(brute_force_crossing(crossing.sample(16)));

  space.shapes = {single_fin_layout().shapes[0]};
  CHECK(validate_geometry(space).simple);
  CHECK_FALSE(brute_force_crossing(space.shapes[0].sample(16)));
}

TEST_CASE("validation: margin and box checks") {
  DesignSpace space;
  space.shapes = {make_shape(ShapeKind::rectangle, Box{0.0, 0.3, 0.2, 0.5}, 1.0, 1)};
  CHECK_FALSE(validate_geometry(space).within_margin);

  auto fin = single_fin_layout();
  fin.boxes[0] = Box{0.45, 0.45, 0.55, 0.55};
  const auto report = validate_geometry(fin);
  CHECK_FALSE(report.inside_boxes);
  CHECK(report.summary().find("box") != std::string::npos);

  fin = single_fin_layout();
  fin.boxes.push_back(fin.boxes[0]);
  CHECK_FALSE(validate_geometry(fin).layout_consistent);
}

TEST_CASE("geometry JSON round trip") {
  const auto space = staggered_layout();
  const auto doc = to_json(space);
  const auto back = design_space_from_json(doc);
  CHECK(back.shapes.size() == 5);
  CHECK(back.boxes == space.boxes);
  CHECK(to_json(back) == doc);
  CHECK_THROWS_AS(design_space_from_json(nlohmann::json::parse(R"({"shapes": [{"segs": []}]})")),
                  fingen::ParseError);
}

TEST_CASE("SVG contains one closed path per shape") {
  const auto svg = render_svg(staggered_layout());
  std::size_t paths = 0;
  for (std::size_t pos = svg.find("<path"); pos != std::string::npos; pos = svg.find("<path", pos + 1)) ++paths;
  CHECK(paths == 5);
  CHECK(svg.find(" Z\"") != std::string::npos);
}
