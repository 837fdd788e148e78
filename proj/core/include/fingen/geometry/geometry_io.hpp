#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fingen/geometry/design_space.hpp"

namespace fingen::geometry {

// {"domain": {"L": .., "H": ..},
//  "shapes": [{"segments": [[[x, y], ...], ...], "closed": true}, ...],
//  "boxes": [[x_min, y_min, x_max, y_max], ...]}
nlohmann::json to_json(const DesignSpace& space);
DesignSpace design_space_from_json(const nlohmann::json& doc);  // throws ParseError

void save_design(const std::filesystem::path& path, const DesignSpace& space);
// Accepts a bare design or a run artifact {"design": ..., "Q": ..., ...}.
DesignSpace load_design(const std::filesystem::path& path);

// Scalar field on an nx x ny cell grid, row 0 at the bottom, values already
// mapped to [0, 1] (0 = black).
struct ScalarImage {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
};

struct SvgOptions {
  double pixels_per_unit = 400.0;
  bool draw_boxes = true;
  int samples_per_segment = 64;
};

// Domain outline, optional box outlines, one closed path per shape and an
// optional grayscale cell underlay.
std::string render_svg(const DesignSpace& space, const std::optional<ScalarImage>& underlay = std::nullopt,
                       const SvgOptions& options = {});

}  // namespace fingen::geometry
