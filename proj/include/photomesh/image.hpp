#pragma once

#include "photomesh/core.hpp"

#include <filesystem>
#include <vector>

namespace photomesh {

/// Row-major RGB image with linear float intensities in [0,1].
class Image {
public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, float fill = 0.0f)
      : width_(width), height_(height),
        data_(static_cast<size_t>(width) * height * kChannels, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  float &at(int x, int y, int c) { return data_[index(x, y) + c]; }
  float at(int x, int y, int c) const { return data_[index(x, y) + c]; }

  Vec3 pixel(int x, int y) const {
    const size_t i = index(x, y);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set_pixel(int x, int y, const Vec3 &rgb) {
    const size_t i = index(x, y);
    for (int c = 0; c < kChannels; ++c)
      data_[i + c] = static_cast<float>(rgb[c]);
  }

  const std::vector<float> &data() const { return data_; }
  std::vector<float> &data() { return data_; }

private:
  size_t index(int x, int y) const {
    return (static_cast<size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// d intensity / d pixel coordinate; row 0 is x, row 1 is y.
using ImageGradient = Eigen::Matrix<double, 2, Image::kChannels>;

/// Bilinear interpolation between pixel centers. Coordinates are clamped to
/// [0.5, W-0.5] x [0.5, H-0.5].
Vec3 sample_bilinear(const Image &image, const Vec2 &x);

/// Gradient of the bilinear interpolant; zero along an axis whose
/// coordinate lies in the clamped border region.
ImageGradient sample_gradient(const Image &image, const Vec2 &x);

/// Both at once; the hot path of the photometric loss.
Vec3 sample_bilinear(const Image &image, const Vec2 &x, ImageGradient &grad);

/// 8-bit PNG I/O. Grayscale, palette, alpha and 16-bit inputs are converted
/// to RGB8 on read; values map to [0,1] by /255.
Image read_png(const std::filesystem::path &path);
void write_png(const Image &image, const std::filesystem::path &path);

} // namespace photomesh
