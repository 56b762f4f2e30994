#include "segeval/mask.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace segeval {

RleMask rle_encode(const Mask& bitmap) {
  if (bitmap.size() == 0) throw std::invalid_argument("rle_encode: empty bitmap");
  RleMask out;
  out.width = static_cast<int>(bitmap.cols());
  out.height = static_cast<int>(bitmap.rows());
  const std::uint8_t* p = bitmap.data();  // row-major, contiguous
  const std::int64_t n = bitmap.size();
  bool value = false;  // runs start with background
  std::int64_t run = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool v = p[i] != 0;
    if (v == value) {
      ++run;
    } else {
      out.counts.push_back(run);
      value = v;
      run = 1;
    }
  }
  out.counts.push_back(run);
  return out;
}

Mask rle_decode(const RleMask& rle) {
  if (rle.width <= 0 || rle.height <= 0)
    throw std::invalid_argument("rle_decode: non-positive dimensions");
  const std::int64_t total = std::int64_t(rle.width) * rle.height;
  std::int64_t sum = 0;
  for (auto c : rle.counts) {
    if (c < 0) throw std::invalid_argument("rle_decode: negative run length");
    sum += c;
  }
  if (sum != total)
    throw std::invalid_argument("rle_decode: runs sum to " + std::to_string(sum) +
                                ", expected " + std::to_string(total));
  Mask out(rle.height, rle.width);
  std::uint8_t* p = out.data();
  bool value = false;
  for (auto c : rle.counts) {
    std::fill_n(p, c, static_cast<std::uint8_t>(value ? 1 : 0));
    p += c;
    value = !value;
  }
  return out;
}

std::int64_t rle_area(const RleMask& m) {
  std::int64_t area = 0;
  for (std::size_t i = 1; i < m.counts.size(); i += 2) area += m.counts[i];
  return area;
}

std::int64_t rle_intersection_area(const RleMask& a, const RleMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("rle_intersection_area: dimension mismatch");
  std::int64_t inter = 0;
  std::size_t ia = 0, ib = 0;
  std::int64_t ra = ia < a.counts.size() ? a.counts[ia] : 0;
  std::int64_t rb = ib < b.counts.size() ? b.counts[ib] : 0;
  std::int64_t remaining = std::int64_t(a.width) * a.height;
  while (remaining > 0) {
    while (ra == 0 && ia + 1 < a.counts.size()) ra = a.counts[++ia];
    while (rb == 0 && ib + 1 < b.counts.size()) rb = b.counts[++ib];
    const std::int64_t step = std::min({ra, rb, remaining});
    if ((ia & 1) && (ib & 1)) inter += step;  // odd runs are foreground
    ra -= step;
    rb -= step;
    remaining -= step;
  }
  return inter;
}

BoundingBox rle_bbox(const RleMask& m) {
  int xmin = m.width, xmax = -1, ymin = m.height, ymax = -1;
  std::int64_t pos = 0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const std::int64_t len = m.counts[i];
    if ((i & 1) && len > 0) {
      const std::int64_t s = pos, e = pos + len - 1;
      const int y0 = static_cast<int>(s / m.width), y1 = static_cast<int>(e / m.width);
      ymin = std::min(ymin, y0);
      ymax = std::max(ymax, y1);
      if (y0 == y1) {
        xmin = std::min(xmin, static_cast<int>(s % m.width));
        xmax = std::max(xmax, static_cast<int>(e % m.width));
      } else {
        // A run spanning rows touches both side columns.
        xmin = 0;
        xmax = m.width - 1;
      }
    }
    pos += len;
  }
  if (ymax < 0) return {};  // empty mask
  return {xmin, ymin, xmax - xmin + 1, ymax - ymin + 1};
}

double mask_iou(const Mask& t, const Mask& d) {
  if (t.rows() != d.rows() || t.cols() != d.cols())
    throw std::invalid_argument("mask_iou: dimension mismatch");
  const auto ts = (t != 0), ds = (d != 0);
  const std::int64_t inter = (ts && ds).count();
  const std::int64_t uni = (ts || ds).count();
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mask_iou(const RleMask& t, const RleMask& d) {
  const std::int64_t inter = rle_intersection_area(t, d);
  const std::int64_t uni = rle_area(t) + rle_area(d) - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double bbox_iou(const BoundingBox& a, const BoundingBox& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w);
  const int y1 = std::min(a.y + a.h, b.y + b.h);
  const std::int64_t inter =
      std::int64_t(std::max(0, x1 - x0)) * std::max(0, y1 - y0);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BoundingBox bbox_from_mask(const Mask& m) {
  int xmin = static_cast<int>(m.cols()), xmax = -1;
  int ymin = static_cast<int>(m.rows()), ymax = -1;
  for (int y = 0; y < m.rows(); ++y) {
    for (int x = 0; x < m.cols(); ++x) {
      if (m(y, x)) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (ymax < 0) throw std::invalid_argument("bbox_from_mask: empty mask");
  return {xmin, ymin, xmax - xmin + 1, ymax - ymin + 1};
}

}  // namespace segeval
