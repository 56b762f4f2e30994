#pragma once

#include "segeval/image.hpp"
#include "segeval/mask.hpp"

#include <string>

namespace segeval {

// 8-bit RGB; other PNG layouts are converted on read.
Image read_image_png(const std::string& path);
void write_image_png(const std::string& path, const Image& img);

// 8-bit mask; any nonzero sample counts as set. Written as 0/255 grayscale.
Mask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const Mask& mask);

}  // namespace segeval
