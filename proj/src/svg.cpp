#include <scenegraph/svg.hpp>

#include <algorithm>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace scenegraph {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

class Canvas {
 public:
  Canvas(double min_x, double max_y, double scale) : min_x_(min_x), max_y_(max_y), scale_(scale) {}

  // SVG y grows downward.
  std::string point(const Vec2& p) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p.x() - min_x_) * scale_, (max_y_ - p.y()) * scale_);
    return buf;
  }
  std::string xy(const Vec2& p, const char* xn, const char* yn) const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s=\"%.3f\" %s=\"%.3f\"", xn, (p.x() - min_x_) * scale_, yn,
                  (max_y_ - p.y()) * scale_);
    return buf;
  }

 private:
  double min_x_, max_y_, scale_;
};

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::string render_svg(const Layout& layout, const Prediction* prediction, const SvgOptions& options) {
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& p : layout.planes) {
    for (const auto& e : p.endpoints) {
      min_x = std::min(min_x, e.x());
      max_x = std::max(max_x, e.x());
      min_y = std::min(min_y, e.y());
      max_y = std::max(max_y, e.y());
    }
  }
  if (layout.planes.empty()) min_x = min_y = max_x = max_y = 0.0;
  min_x -= options.margin;
  min_y -= options.margin;
  max_x += options.margin;
  max_y += options.margin;
  const double s = options.pixels_per_meter;
  const Canvas c(min_x, max_y, s);

  std::unordered_map<PlaneId, const PlaneFeature*> by_id;
  for (const auto& p : layout.planes) by_id[p.id] = &p;

  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.3f %.3f\">\n",
                (max_x - min_x) * s, (max_y - min_y) * s, (max_x - min_x) * s, (max_y - min_y) * s);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (prediction != nullptr) {
    out += "<g id=\"room-hulls\" fill=\"#4c9be8\" fill-opacity=\"0.15\" stroke=\"#4c9be8\" stroke-width=\"1\">\n";
    for (const auto& room : prediction->rooms) {
      std::vector<Vec2> pts;
      for (PlaneId id : room.plane_ids) {
        if (auto it = by_id.find(id); it != by_id.end()) {
          pts.push_back(it->second->endpoints[0]);
          pts.push_back(it->second->endpoints[1]);
        }
      }
      const auto hull = convex_hull(std::move(pts));
      if (hull.size() < 3) continue;
      out += "  <polygon points=\"";
      for (std::size_t i = 0; i < hull.size(); ++i) out += (i ? " " : "") + c.point(hull[i]);
      out += "\"/>\n";
    }
    out += "</g>\n";
  }

  out += "<g id=\"planes\" stroke=\"#222\" stroke-width=\"2\" stroke-linecap=\"round\">\n";
  for (const auto& p : layout.planes) {
    out += "  <line " + c.xy(p.endpoints[0], "x1", "y1") + " " + c.xy(p.endpoints[1], "x2", "y2") + "/>\n";
  }
  out += "</g>\n";

  out += "<g id=\"gt-centers\" fill=\"#999\">\n";
  for (const auto& r : layout.rooms) out += "  <circle " + c.xy(r.center, "cx", "cy") + " r=\"3\"/>\n";
  out += "</g>\n";

  if (prediction != nullptr) {
    out += "<g id=\"wall-pairs\" stroke=\"#e8884c\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\">\n";
    for (const auto& w : prediction->walls) {
      const auto a = by_id.find(w.plane_ids[0]);
      const auto b = by_id.find(w.plane_ids[1]);
      if (a == by_id.end() || b == by_id.end()) continue;
      out += "  <line " + c.xy(a->second->centroid, "x1", "y1") + " " + c.xy(b->second->centroid, "x2", "y2") + "/>\n";
    }
    out += "</g>\n";
    out += "<g id=\"detected-centers\">\n";
    for (const auto& r : prediction->rooms) {
      out += "  <circle " + c.xy(r.center, "cx", "cy") + " r=\"4\" fill=\"#1f5fa8\"/>\n";
    }
    for (const auto& w : prediction->walls) {
      out += "  <circle " + c.xy(w.center, "cx", "cy") + " r=\"3\" fill=\"#c25e1c\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace scenegraph
