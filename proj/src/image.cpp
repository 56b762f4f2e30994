#include "segeval/image.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace segeval {

Image Image::filled(int width, int height, Rgb color) {
  Image img;
  img.r = Plane<std::uint8_t>::Constant(height, width, color[0]);
  img.g = Plane<std::uint8_t>::Constant(height, width, color[1]);
  img.b = Plane<std::uint8_t>::Constant(height, width, color[2]);
  return img;
}

Rgb mean_rgb(const Image& img) {
  if (img.r.size() == 0) throw std::invalid_argument("mean_rgb: empty image");
  const double n = static_cast<double>(img.r.size());
  auto channel = [n](const Plane<std::uint8_t>& p) {
    const double mean = p.template cast<double>().sum() / n;
    return static_cast<std::uint8_t>(std::floor(mean + 0.5));  // round half-up
  };
  return {channel(img.r), channel(img.g), channel(img.b)};
}

Plane<float> gaussian_blur(const Plane<float>& plane, double sigma) {
  if (sigma < 0 || sigma > 3.0)
    throw std::invalid_argument("gaussian_blur: sigma outside [0,3]");
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  if (radius == 0) return plane;

  std::vector<float> kernel(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = static_cast<float>(std::exp(-(double(i) * i) / (2 * sigma * sigma)));
    sum += kernel[i + radius];
  }
  for (auto& k : kernel) k = static_cast<float>(k / sum);

  const int h = static_cast<int>(plane.rows()), w = static_cast<int>(plane.cols());
  auto clamp = [](int v, int hi) { return v < 0 ? 0 : (v >= hi ? hi - 1 : v); };

  Plane<float> horiz(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * plane(y, clamp(x + i, w));
      horiz(y, x) = acc;
    }
  Plane<float> out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float acc = 0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[i + radius] * horiz(clamp(y + i, h), x);
      out(y, x) = acc;
    }
  return out;
}

Image blur_image(const Image& img, double sigma) {
  if (sigma == 0) return img;
  auto channel = [sigma](const Plane<std::uint8_t>& p) -> Plane<std::uint8_t> {
    const Plane<float> blurred = gaussian_blur(p.cast<float>(), sigma);
    return blurred.unaryExpr([](float v) {
      return static_cast<std::uint8_t>(std::lround(std::min(std::max(v, 0.f), 255.f)));
    });
  };
  Image out;
  out.r = channel(img.r);
  out.g = channel(img.g);
  out.b = channel(img.b);
  return out;
}

}  // namespace segeval
