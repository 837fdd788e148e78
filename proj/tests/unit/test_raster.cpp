#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fingen/errors.hpp"
#include "fingen/geometry/raster.hpp"

using namespace fingen::geometry;

TEST_CASE("centered square covers a quarter of the raster") {
  DesignSpace space;
  space.shapes = {make_shape(ShapeKind::rectangle, Box{0.25, 0.25, 0.75, 0.75}, 1.0, 1)};
  const auto r = rasterize_mask(space, 64, 64);
  const double expected = 0.25 * 64 * 64;
  CHECK(std::abs(static_cast<double>(r.count_solid()) - expected) <= 0.02 * expected);
  CHECK(r.at(32, 32) == 1);
  CHECK(r.at(2, 2) == 0);
}

TEST_CASE("empty shape list gives an all-fluid raster") {
  DesignSpace space;
  const auto r = rasterize_mask(space, 32, 16);
  CHECK(r.width == 32);
  CHECK(r.height == 16);
  CHECK(r.count_solid() == 0);
}

TEST_CASE("paper-scale raster is 506 x 506, single channel") {
  const auto r = rasterize_mask(single_fin_layout(), 506, 506);
  CHECK(r.width == 506);
  CHECK(r.height == 506);
  CHECK(r.pixels.size() == 506u * 506u);
  // Rounded rectangle of 0.5 x box: area just under L/6 * H/8.
  const double frac = static_cast<double>(r.count_solid()) / (506.0 * 506.0);
  CHECK(frac == doctest::Approx(single_fin_layout().shapes[0].area()).epsilon(0.02));
}

TEST_CASE("raster preconditions") {
  CHECK_THROWS_AS(rasterize_mask(single_fin_layout(), 8, 64), fingen::PreconditionError);
  DesignSpace bad;
  bad.shapes = {make_shape(ShapeKind::rectangle, Box{0.0, 0.3, 0.2, 0.5}, 1.0, 1)};
  CHECK_THROWS_AS(rasterize_mask(bad, 64, 64), fingen::PreconditionError);
}

TEST_CASE("rasterization is deterministic and survives a PGM round trip") {
  const auto space = staggered_layout();
  const auto a = rasterize_mask(space, 64, 64);
  const auto b = rasterize_mask(space, 64, 64);
  CHECK(a == b);
  const auto path = std::filesystem::temp_directory_path() / "fingen_raster_test.pgm";
  write_pgm(path, a);
  CHECK(read_pgm(path) == a);
  CHECK(encode_pgm(a).rfind("P5\n64 64\n255\n", 0) == 0);
  std::filesystem::remove(path);
}
