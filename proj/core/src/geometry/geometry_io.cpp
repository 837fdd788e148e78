#include "fingen/geometry/geometry_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fingen/errors.hpp"

namespace fingen::geometry {

using nlohmann::json;

json to_json(const DesignSpace& space) {
  json doc;
  doc["domain"] = {{"L", space.length}, {"H", space.height}};
  doc["shapes"] = json::array();
  for (const auto& shape : space.shapes) {
    json segments = json::array();
    for (const auto& seg : shape.segments()) {
      json pts = json::array();
      for (const auto& p : seg.control_points()) pts.push_back({p.x, p.y});
      segments.push_back(std::move(pts));
    }
    doc["shapes"].push_back({{"segments", std::move(segments)}, {"closed", shape.closed()}});
  }
  doc["boxes"] = json::array();
  for (const auto& b : space.boxes) doc["boxes"].push_back({b.x_min, b.y_min, b.x_max, b.y_max});
  return doc;
}

DesignSpace design_space_from_json(const json& doc) {
  try {
    DesignSpace space;
    if (doc.contains("domain")) {
      space.length = doc.at("domain").value("L", 1.0);
      space.height = doc.at("domain").value("H", 1.0);
    }
    for (const auto& shape : doc.at("shapes")) {
      std::vector<std::vector<Point>> segments;
      for (const auto& seg : shape.at("segments")) {
        std::vector<Point> pts;
        for (const auto& p : seg) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        segments.push_back(std::move(pts));
      }
      space.shapes.push_back(CompositeBezier::build(segments, shape.value("closed", true)));
    }
    if (doc.contains("boxes")) {
      for (const auto& b : doc.at("boxes")) {
        space.boxes.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                               b.at(3).get<double>()});
      }
    }
    return space;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed geometry document: ") + e.what());
  } catch (const GeometryError& e) {
    throw ParseError(std::string("invalid geometry in document: ") + e.what());
  }
}

void save_design(const std::filesystem::path& path, const DesignSpace& space) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out << to_json(space).dump(2) << "\n";
}

DesignSpace load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  // Run artifacts wrap the design together with its scores.
  if (doc.is_object() && !doc.contains("shapes") && doc.contains("design")) return design_space_from_json(doc.at("design"));
  return design_space_from_json(doc);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_svg(const DesignSpace& space, const std::optional<ScalarImage>& underlay,
                       const SvgOptions& options) {
  const double s = options.pixels_per_unit;
  const double w = space.length * s;
  const double h = space.height * s;
  auto px = [&](Point p) { return fmt(p.x * s) + "," + fmt(h - p.y * s); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
  if (underlay) {
    const double cw = w / underlay->nx;
    const double ch = h / underlay->ny;
    out << "<g id=\"field\" shape-rendering=\"crispEdges\">\n";
    for (int j = 0; j < underlay->ny; ++j) {
      for (int i = 0; i < underlay->nx; ++i) {
        const double v = std::clamp(underlay->values[static_cast<std::size_t>(j) * underlay->nx + i], 0.0, 1.0);
        const int g = static_cast<int>(std::lround(255.0 * v));
        out << "<rect x=\"" << fmt(i * cw) << "\" y=\"" << fmt(h - (j + 1) * ch) << "\" width=\"" << fmt(cw)
            << "\" height=\"" << fmt(ch) << "\" fill=\"rgb(" << g << "," << g << "," << g << ")\"/>\n";
      }
    }
    out << "</g>\n";
  }
  out << "<rect id=\"domain\" x=\"0\" y=\"0\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (options.draw_boxes) {
    for (const auto& b : space.boxes) {
      out << "<rect class=\"box\" x=\"" << fmt(b.x_min * s) << "\" y=\"" << fmt(h - b.y_max * s)
          << "\" width=\"" << fmt(b.width() * s) << "\" height=\"" << fmt(b.height() * s)
          << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 2\"/>\n";
    }
  }
  for (const auto& shape : space.shapes) {
    const auto loop = shape.sample(options.samples_per_segment);
    out << "<path class=\"shape\" d=\"M " << px(loop[0]);
    for (std::size_t k = 1; k < loop.size(); ++k) out << " L " << px(loop[k]);
    out << " Z\" fill=\"#c0392b\" fill-opacity=\"0.6\" stroke=\"black\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace fingen::geometry
