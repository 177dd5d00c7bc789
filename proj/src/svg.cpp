#include "lidar_deskew/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "lidar_deskew/io.hpp"

namespace lidar_deskew {
namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_topdown_svg(const std::vector<SvgLayer>& layers, const std::string& title, const Scene* scene,
                               const SvgOptions& options) {
  double x0 = options.x_min, x1 = options.x_max, y0 = options.y_min, y1 = options.y_max;
  const bool fit = !(x1 > x0 && y1 > y0);
  if (fit) {
    x0 = y0 = std::numeric_limits<double>::infinity();
    x1 = y1 = -std::numeric_limits<double>::infinity();
    for (const auto& layer : layers) {
      if (layer.cloud == nullptr) continue;
      for (const auto& p : layer.cloud->points) {
        if (p.z <= options.min_z) continue;
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
    }
    if (!(x1 > x0) || !(y1 > y0)) {
      x0 = -1.0;
      x1 = 1.0;
      y0 = -1.0;
      y1 = 1.0;
    }
    const double pad = 0.02 * std::max(x1 - x0, y1 - y0);
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
  }
  const double scale = options.width_px / (x1 - x0);
  const double height_px = (y1 - y0) * scale;
  // World y points up, SVG y points down.
  auto sx = [&](double x) { return (x - x0) * scale; };
  auto sy = [&](double y) { return (y1 - y) * scale; };
  auto inside = [&](const Point3& p) { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(options.width_px) + "\" height=\"" +
         fixed(height_px + 30.0) + "\" viewBox=\"0 -30 " + fixed(options.width_px) + " " + fixed(height_px + 30.0) +
         "\">\n";
  svg += "<rect x=\"0\" y=\"-30\" width=\"100%\" height=\"100%\" fill=\"black\"/>\n";
  svg += "<text x=\"8\" y=\"-10\" fill=\"white\" font-family=\"monospace\" font-size=\"14\">" + escape(title) +
         " (" + fixed(x1 - x0) + " m wide)</text>\n";

  if (scene != nullptr) {
    svg += "<g id=\"ground-truth\" stroke=\"lime\" fill=\"none\" stroke-width=\"1\">\n";
    for (const auto& f : scene->fences) {
      svg += "<line x1=\"" + fixed(sx(f.x1)) + "\" y1=\"" + fixed(sy(f.y1)) + "\" x2=\"" + fixed(sx(f.x2)) +
             "\" y2=\"" + fixed(sy(f.y2)) + "\"/>\n";
    }
    for (const auto& p : scene->posts) {
      svg += "<circle cx=\"" + fixed(sx(p.x)) + "\" cy=\"" + fixed(sy(p.y)) + "\" r=\"" +
             fixed(std::max(p.radius * scale, 1.5)) + "\"/>\n";
    }
    for (const auto& b : scene->boxes) {
      svg += "<rect x=\"" + fixed(sx(b.min.x)) + "\" y=\"" + fixed(sy(b.max.y)) + "\" width=\"" +
             fixed((b.max.x - b.min.x) * scale) + "\" height=\"" + fixed((b.max.y - b.min.y) * scale) + "\"/>\n";
    }
    svg += "</g>\n";
  }

  double legend_x = options.width_px - 8.0;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    legend_x -= 8.0 * static_cast<double>(it->name.size()) + 20.0;
    svg += "<text x=\"" + fixed(legend_x) + "\" y=\"-10\" fill=\"" + escape(it->color) +
           "\" font-family=\"monospace\" font-size=\"14\">" + escape(it->name) + "</text>\n";
  }

  for (const auto& layer : layers) {
    if (layer.cloud == nullptr) continue;
    std::vector<const Point3*> kept;
    for (const auto& p : layer.cloud->points) {
      if (p.z > options.min_z && inside(p)) kept.push_back(&p);
    }
    const std::size_t stride =
        kept.size() > options.max_points_per_layer && options.max_points_per_layer > 0
            ? (kept.size() + options.max_points_per_layer - 1) / options.max_points_per_layer
            : 1;
    svg += "<g id=\"" + escape(layer.name) + "\" fill=\"" + escape(layer.color) + "\" fill-opacity=\"0.8\">\n";
    for (std::size_t i = 0; i < kept.size(); i += stride) {
      svg += "<rect x=\"" + fixed(sx(kept[i]->x)) + "\" y=\"" + fixed(sy(kept[i]->y)) +
             "\" width=\"1.2\" height=\"1.2\"/>\n";
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_topdown_svg(const std::filesystem::path& path, const std::vector<SvgLayer>& layers,
                       const std::string& title, const Scene* scene, const SvgOptions& options) {
  auto out = open_output(path);
  out << render_topdown_svg(layers, title, scene, options);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace lidar_deskew
