#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fingen/geometry/design_space.hpp"

namespace fingen::geometry {

// Single-channel binary image. Row 0 is the bottom of the domain (y = 0);
// pixel (i, j) has its center at ((i + 0.5) L / width, (j + 0.5) H / height).
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 1 = solid, 0 = fluid, row-major

  std::uint8_t at(int i, int j) const { return pixels[static_cast<std::size_t>(j) * width + i]; }
  std::size_t count_solid() const;

  friend bool operator==(const Raster&, const Raster&) = default;
};

// Even-odd scanline fill of each shape's dense polyline; a pixel is solid
// when its center is inside. Throws PreconditionError when the space does not
// pass validate_geometry or either dimension is below 16.
Raster rasterize_mask(const DesignSpace& space, int width, int height,
                      const ValidationOptions& options = {});

// Same fill without the validation gate; used by callers that validated
// already and by tests.
Raster rasterize_unchecked(const DesignSpace& space, int width, int height,
                           int samples_per_segment = kDefaultSamplesPerSegment);

// Binary PGM (P5), top row first so images are upright. Solid pixels are
// written as 255.
void write_pgm(const std::filesystem::path& path, const Raster& raster);
std::string encode_pgm(const Raster& raster);
Raster read_pgm(const std::filesystem::path& path);

}  // namespace fingen::geometry
