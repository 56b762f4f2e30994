#pragma once

#include "segeval/mask.hpp"

#include <span>
#include <vector>

namespace segeval {

struct Vertex {
  double x = 0;
  double y = 0;
};

// Closed ring of sub-pixel vertices. At least three vertices and non-zero
// enclosed area.
struct Polygon {
  std::vector<Vertex> vertices;
};

// Signed area, positive for counter-clockwise winding in (x right, y down).
double polygon_area(const Polygon& p);

void validate_polygon(const Polygon& p);

// Scanline fill, even-odd rule, pixel-center sampling. Pixel (x, y) is set
// when its center (x + 0.5, y + 0.5) lies inside the polygon. Clipped to the
// w x h frame.
Mask polygon_to_mask(const Polygon& p, int w, int h);

// Several rings rasterized jointly under the even-odd rule.
Mask polygons_to_mask(std::span<const Polygon> rings, int w, int h);

}  // namespace segeval
