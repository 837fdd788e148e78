#include "fingen/harness/pareto.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "fingen/errors.hpp"

namespace fingen::harness {

namespace {

bool dominates(const ParetoRecord& a, const ParetoRecord& b) {
  return a.q_ratio >= b.q_ratio && a.dp_ratio <= b.dp_ratio && (a.q_ratio > b.q_ratio || a.dp_ratio < b.dp_ratio);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<std::size_t> pareto_front(const std::vector<ParetoRecord>& records) {
  if (records.empty()) throw InputError("no designs to build a Pareto front from");
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < records.size() && keep; ++j) {
      if (j == i) continue;
      if (dominates(records[j], records[i])) keep = false;
      // Duplicates: the earlier record represents the point.
      if (j < i && records[j].q_ratio == records[i].q_ratio && records[j].dp_ratio == records[i].dp_ratio) keep = false;
    }
    if (keep) front.push_back(i);
  }
  std::stable_sort(front.begin(), front.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].dp_ratio < records[b].dp_ratio; });
  return front;
}

std::string pareto_csv(const std::vector<ParetoRecord>& records, const std::vector<std::size_t>& front) {
  std::vector<bool> on(records.size(), false);
  for (auto i : front) on[i] = true;
  std::ostringstream out;
  out << "design,episode,q_ratio,dp_ratio,reward,on_front\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.design << "," << r.episode << "," << num(r.q_ratio) << "," << num(r.dp_ratio) << "," << num(r.reward)
        << "," << (on[i] ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string pareto_svg(const std::vector<ParetoRecord>& records, const std::vector<std::size_t>& front) {
  const double w = 480.0;
  const double h = 360.0;
  const double pad = 48.0;
  double x0 = records[0].dp_ratio;
  double x1 = x0;
  double y0 = records[0].q_ratio;
  double y1 = y0;
  for (const auto& r : records) {
    x0 = std::min(x0, r.dp_ratio);
    x1 = std::max(x1, r.dp_ratio);
    y0 = std::min(y0, r.q_ratio);
    y1 = std::max(y1, r.q_ratio);
  }
  // Always show the reference point (1, 1).
  x0 = std::min(x0, 1.0);
  x1 = std::max(x1, 1.0);
  y0 = std::min(y0, 1.0);
  y1 = std::max(y1, 1.0);
  const double sx = (w - 2 * pad) / std::max(x1 - x0, 1e-9);
  const double sy = (h - 2 * pad) / std::max(y1 - y0, 1e-9);
  auto px = [&](double x) { return num(pad + (x - x0) * sx); };
  auto py = [&](double y) { return num(h - pad - (y - y0) * sy); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">Dp / Dp_ref ("
      << num(x0) << " to " << num(x1) << ")</text>\n";
  out << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
      << h / 2 << ")\">Q / Q_ref (" << num(y0) << " to " << num(y1) << ")</text>\n";
  out << "<g id=\"designs\" fill=\"#7f8c8d\" fill-opacity=\"0.5\">\n";
  for (const auto& r : records) out << "<circle cx=\"" << px(r.dp_ratio) << "\" cy=\"" << py(r.q_ratio) << "\" r=\"2\"/>\n";
  out << "</g>\n";
  out << "<circle id=\"reference\" cx=\"" << px(1.0) << "\" cy=\"" << py(1.0)
      << "\" r=\"4\" fill=\"none\" stroke=\"blue\"/>\n";
  out << "<polyline id=\"front\" fill=\"none\" stroke=\"#c0392b\" points=\"";
  for (std::size_t k = 0; k < front.size(); ++k) {
    out << (k ? " " : "") << px(records[front[k]].dp_ratio) << "," << py(records[front[k]].q_ratio);
  }
  out << "\"/>\n<g id=\"front-points\" fill=\"#c0392b\">\n";
  for (auto i : front) out << "<circle cx=\"" << px(records[i].dp_ratio) << "\" cy=\"" << py(records[i].q_ratio) << "\" r=\"3.5\"/>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace fingen::harness
