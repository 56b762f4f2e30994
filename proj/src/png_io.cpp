#include "segeval/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace segeval {

namespace {

[[noreturn]] void fail(const std::string& path, const char* what) {
  throw std::runtime_error("png: " + std::string(what) + ": " + path);
}

std::vector<std::uint8_t> read_rows(const std::string& path, png_uint_32 format,
                                    int channels, int& width, int& height) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(path, image.message[0] ? image.message : "cannot read");
  image.format = format;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(path, msg.empty() ? "decode failed" : msg.c_str());
  }
  width = static_cast<int>(image.width);
  height = static_cast<int>(image.height);
  if (buffer.size() != static_cast<std::size_t>(width) * height * channels)
    fail(path, "unexpected buffer size");
  return buffer;
}

void write_rows(const std::string& path, png_uint_32 format, int width, int height,
                const std::uint8_t* rows) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  // Write through a temp file so partially written images never appear.
  const std::string tmp = path + ".tmp";
  if (!png_image_write_to_file(&image, tmp.c_str(), 0, rows, 0, nullptr))
    fail(path, image.message[0] ? image.message : "cannot write");
  std::filesystem::rename(tmp, path);
}

}  // namespace

Image read_image_png(const std::string& path) {
  int w = 0, h = 0;
  const auto buf = read_rows(path, PNG_FORMAT_RGB, 3, w, h);
  Image img = Image::filled(w, h, {0, 0, 0});
  const std::uint8_t* p = buf.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.r(y, x) = *p++;
      img.g(y, x) = *p++;
      img.b(y, x) = *p++;
    }
  return img;
}

void write_image_png(const std::string& path, const Image& img) {
  const int w = img.width(), h = img.height();
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h * 3);
  std::uint8_t* p = buf.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      *p++ = img.r(y, x);
      *p++ = img.g(y, x);
      *p++ = img.b(y, x);
    }
  write_rows(path, PNG_FORMAT_RGB, w, h, buf.data());
}

Mask read_mask_png(const std::string& path) {
  int w = 0, h = 0;
  const auto buf = read_rows(path, PNG_FORMAT_RGB, 3, w, h);
  Mask mask(h, w);
  const std::uint8_t* p = buf.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x, p += 3)
      mask(y, x) = (p[0] | p[1] | p[2]) ? 1 : 0;
  return mask;
}

void write_mask_png(const std::string& path, const Mask& mask) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h);
  std::uint8_t* p = buf.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) *p++ = mask(y, x) ? 255 : 0;
  write_rows(path, PNG_FORMAT_GRAY, w, h, buf.data());
}

}  // namespace segeval
