#include "segeval/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace segeval {

double polygon_area(const Polygon& p) {
  const auto& v = p.vertices;
  double twice = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& a = v[i];
    const auto& b = v[(i + 1) % v.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2;
}

void validate_polygon(const Polygon& p) {
  if (p.vertices.size() < 3)
    throw std::invalid_argument("polygon: fewer than 3 vertices");
  if (polygon_area(p) == 0.0)
    throw std::invalid_argument("polygon: zero enclosed area");
}

Mask polygons_to_mask(std::span<const Polygon> rings, int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("polygon_to_mask: empty frame");
  for (const auto& p : rings) validate_polygon(p);

  Mask out = Mask::Zero(h, w);
  std::vector<double> crossings;
  for (int y = 0; y < h; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (const auto& p : rings) {
      const auto& v = p.vertices;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        // Half-open span so shared vertices are counted once.
        if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
          crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
      }
    }
    if (crossings.empty()) continue;
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
      // Pixel centers x + 0.5 in [left, right).
      int x0 = static_cast<int>(std::ceil(crossings[i] - 0.5));
      int x1 = static_cast<int>(std::ceil(crossings[i + 1] - 0.5)) - 1;
      x0 = std::max(x0, 0);
      x1 = std::min(x1, w - 1);
      for (int x = x0; x <= x1; ++x) out(y, x) = 1;
    }
  }
  return out;
}

Mask polygon_to_mask(const Polygon& p, int w, int h) {
  return polygons_to_mask(std::span<const Polygon>(&p, 1), w, h);
}

}  // namespace segeval
