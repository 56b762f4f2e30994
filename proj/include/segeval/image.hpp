#pragma once

#include "segeval/mask.hpp"

#include <array>
#include <cstdint>

namespace segeval {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB image stored as three planes, indexed (y, x).
struct Image {
  Plane<std::uint8_t> r, g, b;

  static Image filled(int width, int height, Rgb color);
  int width() const { return static_cast<int>(r.cols()); }
  int height() const { return static_cast<int>(r.rows()); }
  Rgb at(int x, int y) const { return {r(y, x), g(y, x), b(y, x)}; }
  void set(int x, int y, Rgb c) {
    r(y, x) = c[0];
    g(y, x) = c[1];
    b(y, x) = c[2];
  }
  bool operator==(const Image& o) const {
    return (r == o.r).all() && (g == o.g).all() && (b == o.b).all();
  }
};

// Per-channel arithmetic mean, rounded half-up to 8 bits.
Rgb mean_rgb(const Image& img);

// Separable Gaussian, kernel radius ceil(3 sigma), clamp-to-edge borders.
Plane<float> gaussian_blur(const Plane<float>& plane, double sigma);

// Blur all three channels; sigma must lie in [0, 3]. sigma = 0 is the identity.
Image blur_image(const Image& img, double sigma);

}  // namespace segeval
