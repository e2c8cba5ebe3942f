#include "photomesh/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace photomesh {

namespace {

struct Axis {
  int i0;      // left/top tap
  int i1;      // right/bottom tap
  double frac; // weight of i1
  bool live;   // derivative is nonzero along this axis
};

Axis locate(double x, int n) {
  if (n == 1)
    return {0, 0, 0.0, false};
  const bool live = x >= 0.5 && x < n - 0.5;
  const double u = std::clamp(x, 0.5, n - 0.5) - 0.5;
  const int i0 = std::min(static_cast<int>(std::floor(u)), n - 2);
  return {i0, i0 + 1, u - i0, live};
}

} // namespace

Vec3 sample_bilinear(const Image &image, const Vec2 &x, ImageGradient &grad) {
  const Axis ax = locate(x.x(), image.width());
  const Axis ay = locate(x.y(), image.height());
  const Vec3 p00 = image.pixel(ax.i0, ay.i0);
  const Vec3 p10 = image.pixel(ax.i1, ay.i0);
  const Vec3 p01 = image.pixel(ax.i0, ay.i1);
  const Vec3 p11 = image.pixel(ax.i1, ay.i1);
  const double fx = ax.frac, fy = ay.frac;
  const Vec3 top = (1.0 - fx) * p00 + fx * p10;
  const Vec3 bottom = (1.0 - fx) * p01 + fx * p11;
  grad.setZero();
  if (ax.live)
    grad.row(0) = ((1.0 - fy) * (p10 - p00) + fy * (p11 - p01)).transpose();
  if (ay.live)
    grad.row(1) = (bottom - top).transpose();
  return (1.0 - fy) * top + fy * bottom;
}

Vec3 sample_bilinear(const Image &image, const Vec2 &x) {
  ImageGradient unused;
  return sample_bilinear(image, x, unused);
}

ImageGradient sample_gradient(const Image &image, const Vec2 &x) {
  ImageGradient g;
  sample_bilinear(image, x, g);
  return g;
}

namespace {

struct FileCloser {
  void operator()(FILE *f) const {
    if (f)
      std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void on_png_error(png_structp, png_const_charp msg) {
  throw Error(ErrorCode::Io, std::string("libpng: ") + msg);
}
void on_png_warning(png_structp, png_const_charp) {}

} // namespace

Image read_png(const std::filesystem::path &path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "libpng init failed");
  }

  Image image;
  try {
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16)
      png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE)
      png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_expand_gray_1_2_4_to_8(png);
      png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA)
      png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    std::vector<png_byte> row(png_get_rowbytes(png, info));
    image = Image(w, h);
    for (int y = 0; y < h; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < 3; ++c)
          image.at(x, y, c) = row[3 * x + c] / 255.0f;
    }
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

void write_png(const Image &image, const std::filesystem::path &path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file)
    throw Error(ErrorCode::Io, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "libpng init failed");
  }
  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(3 * static_cast<size_t>(image.width()));
    for (int y = 0; y < image.height(); ++y) {
      for (int x = 0; x < image.width(); ++x)
        for (int c = 0; c < 3; ++c) {
          const float v = std::clamp(image.at(x, y, c), 0.0f, 1.0f);
          row[3 * x + c] = static_cast<png_byte>(std::lround(v * 255.0f));
        }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

} // namespace photomesh
