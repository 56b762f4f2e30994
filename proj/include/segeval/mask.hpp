#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace segeval {

// One dense raster plane; row-major so linear memory order matches the
// row-major run-length layout used on disk.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Binary mask, 0 = background, nonzero = set. Indexed (y, x).
using Mask = Plane<std::uint8_t>;

struct BoundingBox {
  int x = 0;  // top-left corner
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const BoundingBox&) const = default;
  bool empty() const { return w <= 0 || h <= 0; }
  std::int64_t area() const { return empty() ? 0 : std::int64_t(w) * h; }
};

// Run-length encoded binary mask. Runs are row-major and alternate
// background/foreground starting with a background run, which may have
// length zero. sum(counts) == width * height always holds.
struct RleMask {
  int width = 0;
  int height = 0;
  std::vector<std::int64_t> counts;

  bool operator==(const RleMask&) const = default;
};

// Lossless, canonical encoding (no interior zero-length runs).
RleMask rle_encode(const Mask& bitmap);

// Rejects runs that are negative or do not sum to width * height.
Mask rle_decode(const RleMask& rle);

std::int64_t rle_area(const RleMask& m);
std::int64_t rle_intersection_area(const RleMask& a, const RleMask& b);
BoundingBox rle_bbox(const RleMask& m);

// Number of set pixels.
template <typename Derived>
std::int64_t mask_area(const Eigen::ArrayBase<Derived>& m) {
  return (m.derived() != 0).count();
}

// |T n D| / |T u D|; 0 when the union is empty. Dimensions must agree.
double mask_iou(const Mask& t, const Mask& d);
double mask_iou(const RleMask& t, const RleMask& d);

// Rectangle intersection over union.
double bbox_iou(const BoundingBox& a, const BoundingBox& b);

// Tight bounds of the set pixels; throws on an empty mask.
BoundingBox bbox_from_mask(const Mask& m);

}  // namespace segeval
