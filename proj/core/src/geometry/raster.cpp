#include "fingen/geometry/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fingen/errors.hpp"

namespace fingen::geometry {

std::size_t Raster::count_solid() const {
  return static_cast<std::size_t>(std::count(pixels.begin(), pixels.end(), std::uint8_t{1}));
}

Raster rasterize_unchecked(const DesignSpace& space, int width, int height, int samples_per_segment) {
  Raster raster{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  const double dx = space.length / width;
  const double dy = space.height / height;
  std::vector<double> crossings;
  for (const auto& shape : space.shapes) {
    const auto loop = shape.sample(samples_per_segment);
    const std::size_t m = loop.size();
    for (int j = 0; j < height; ++j) {
      const double y = (j + 0.5) * dy;
      crossings.clear();
      for (std::size_t k = 0; k < m; ++k) {
        const Point a = loop[k];
        const Point b = loop[(k + 1) % m];
        // Half-open rule: vertices exactly on the scanline count once.
        if ((a.y > y) != (b.y > y)) crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
      std::sort(crossings.begin(), crossings.end());
      for (std::size_t c = 0; c + 1 < crossings.size(); c += 2) {
        // Pixels whose center x lies in [x0, x1).
        const int i0 = std::max(0, static_cast<int>(std::ceil(crossings[c] / dx - 0.5)));
        const int i1 = std::min(width - 1, static_cast<int>(std::ceil(crossings[c + 1] / dx - 0.5)) - 1);
        for (int i = i0; i <= i1; ++i) raster.pixels[static_cast<std::size_t>(j) * width + i] = 1;
      }
    }
  }
  return raster;
}

Raster rasterize_mask(const DesignSpace& space, int width, int height, const ValidationOptions& options) {
  if (width < 16 || height < 16) throw PreconditionError("raster dimensions must be at least 16x16");
  const auto report = validate_geometry(space, options);
  if (!report.ok()) throw PreconditionError("design space failed validation: " + report.summary());
  return rasterize_unchecked(space, width, height, options.samples_per_segment);
}

std::string encode_pgm(const Raster& raster) {
  std::ostringstream out;
  out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
  std::string body(static_cast<std::size_t>(raster.width) * raster.height, '\0');
  for (int j = 0; j < raster.height; ++j) {
    const int row = raster.height - 1 - j;
    for (int i = 0; i < raster.width; ++i) {
      body[static_cast<std::size_t>(row) * raster.width + i] = raster.at(i, j) ? char(255) : char(0);
    }
  }
  out << body;
  return out.str();
}

void write_pgm(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << encode_pgm(raster);
}

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || width <= 0 || height <= 0 || maxval != 255) {
    throw ParseError(path.string() + " is not an 8-bit binary PGM");
  }
  in.get();
  std::string body(static_cast<std::size_t>(width) * height, '\0');
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (in.gcount() != static_cast<std::streamsize>(body.size())) throw ParseError(path.string() + " is truncated");
  Raster raster{width, height, std::vector<std::uint8_t>(body.size(), 0)};
  for (int row = 0; row < height; ++row) {
    const int j = height - 1 - row;
    for (int i = 0; i < width; ++i) {
      raster.pixels[static_cast<std::size_t>(j) * width + i] =
          static_cast<unsigned char>(body[static_cast<std::size_t>(row) * width + i]) >= 128 ? 1 : 0;
    }
  }
  return raster;
}

}  // namespace fingen::geometry
