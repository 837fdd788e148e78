#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fingen/errors.hpp"
#include "fingen/geometry/bezier.hpp"

using namespace fingen::geometry;

namespace {

// Oracle: direct Bernstein sum, independent of the de Casteljau path.
Point bernstein_sum(const BezierSegment& s, double u) {
  const auto pts = s.control_points();
  Point out;
  for (int i = 0; i <= s.degree(); ++i) out = out + bernstein_basis(i, s.degree(), u) * pts[i];
  return out;
}

double shoelace(const std::vector<Point>& loop) {
  double a = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) a += cross(loop[k], loop[(k + 1) % loop.size()]);
  return 0.5 * a;
}

}  // namespace

TEST_CASE("bernstein basis values") {
  CHECK(bernstein_basis(0, 2, 0.0) == 1.0);
  CHECK(bernstein_basis(1, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  double sum = 0.0;
  for (int i = 0; i <= 4; ++i) sum += bernstein_basis(i, 4, 0.37);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bernstein basis rejects out-of-range index") {
  CHECK_THROWS_AS(bernstein_basis(3, 2, 0.5), std::domain_error);
  CHECK_THROWS_AS(bernstein_basis(-1, 2, 0.5), std::domain_error);
  CHECK_THROWS_AS(bernstein_basis(0, 2, 1.5), std::domain_error);
}

TEST_CASE("evaluate_bezier examples") {
  const BezierSegment line({{0, 0}, {1, 1}});
  const Point p = evaluate_bezier(line, 0.25);
  CHECK(p.x == doctest::Approx(0.25));
  CHECK(p.y == doctest::Approx(0.25));

  const BezierSegment quad({{0, 0}, {1, 0}, {1, 1}});
  const Point q = evaluate_bezier(quad, 0.5);
  CHECK(q.x == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(q.y == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(evaluate_bezier(quad, 0.0) == Point{0, 0});
  CHECK(evaluate_bezier(quad, 1.0) == Point{1, 1});
}

TEST_CASE("de Casteljau matches the Bernstein sum") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_int_distribution<int> deg(1, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point> pts(deg(rng) + 1);
    for (auto& p : pts) p = {coord(rng), coord(rng)};
    const BezierSegment s(pts);
    const double u = unit(rng);
    const Point a = s.evaluate(u);
    const Point b = bernstein_sum(s, u);
    CHECK(std::abs(a.x - b.x) < 1e-12);
    CHECK(std::abs(a.y - b.y) < 1e-12);
  }
}

TEST_CASE("degree elevation keeps the curve") {
  const BezierSegment s({{0, 0}, {0.3, 0.9}, {0.7, -0.2}, {1, 0.5}});
  const auto e = s.elevated();
  CHECK(e.degree() == 4);
  for (double u : {0.0, 0.1, 0.33, 0.5, 0.8, 1.0}) {
    CHECK(std::abs(s.evaluate(u).x - e.evaluate(u).x) < 1e-14);
    CHECK(std::abs(s.evaluate(u).y - e.evaluate(u).y) < 1e-14);
  }
}

TEST_CASE("segment needs two control points") {
  CHECK_THROWS_AS(BezierSegment({{0, 0}}), fingen::GeometryError);
}

TEST_CASE("build_composite: unit square from four lines") {
  const auto sq = CompositeBezier::build({{{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {0, 0}}});
  CHECK(sq.closed());
  CHECK(sq.area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sq.signed_area() > 0.0);
  CHECK(sq.free_point_count() == 4);
  CHECK(sq.dof() == 8);
}

TEST_CASE("build_composite: junction mismatch is a continuity error") {
  CHECK_THROWS_AS(CompositeBezier::build({{{0, 0}, {1, 0}}, {{1.001, 0}, {0, 1}}, {{0, 1}, {0, 0}}}),
                  fingen::ContinuityError);
  CHECK_THROWS_AS(CompositeBezier::build({{{0, 0}, {1, 0}}, {{1, 0}, {0, 1}}, {{0, 1}, {0, 0.001}}}),
                  fingen::ContinuityError);
}

TEST_CASE("build_composite: zero-area loop is a geometry error") {
  CHECK_THROWS_AS(CompositeBezier::build({{{0, 0}, {1, 0}}, {{1, 0}, {0, 0}}}), fingen::GeometryError);
}

TEST_CASE("area from Gauss-Legendre agrees with the dense shoelace oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> jitter(-0.08, 0.08);
  for (int trial = 0; trial < 20; ++trial) {
    // Three cubic segments around a circle of radius 0.3, control points jittered.
    std::vector<Point> ring;
    for (int k = 0; k < 9; ++k) {
      const double a = 2.0 * 3.14159265358979 * k / 9.0;
      ring.push_back({0.5 + 0.3 * std::cos(a) + jitter(rng), 0.5 + 0.3 * std::sin(a) + jitter(rng)});
    }
    std::vector<std::vector<Point>> segs;
    for (int s = 0; s < 3; ++s) segs.push_back({ring[3 * s], ring[3 * s + 1], ring[3 * s + 2], ring[(3 * s + 3) % 9]});
    const auto curve = CompositeBezier::build(segs);
    const double dense = shoelace(curve.sample(2048 / 3 + 1));
    CHECK(std::abs(curve.signed_area() - dense) < 1e-6);
  }
}

TEST_CASE("free points round trip through with_free_points") {
  const auto curve = CompositeBezier::build(
      {{{0, 0}, {0.5, -0.1}, {1, 0}}, {{1, 0}, {1.1, 0.5}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {-0.1, 0.5}, {0, 0}}});
  CHECK(curve.free_point_count() == 7);
  const auto pts = curve.free_points();
  const auto rebuilt = curve.with_free_points(pts);
  CHECK(rebuilt.segments().size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto a = curve.segments()[k].control_points();
    const auto b = rebuilt.segments()[k].control_points();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }
  CHECK_THROWS_AS(curve.with_free_points(std::vector<Point>(3)), fingen::InputError);
}
