#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "coverscan/homography.hpp"

namespace coverscan {

/// Dense single-channel float grid, row-major. Unlike GrayImage the values are
/// unconstrained, so it also carries derivatives, DoG layers and responses.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, float fill = 0.0f);
  Raster(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float operator()(int x, int y) const { return data_[index(x, y)]; }
  float& operator()(int x, int y) { return data_[index(x, y)]; }

  /// Edge-replicated read: coordinates are clamped into the grid.
  float clamped(int x, int y) const;

  const float* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
  float* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

/// Single-channel raster with intensities in [0,1]. This is the input type of
/// every detector.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);

  /// Takes ownership of `raster`; throws InvalidArgument when any value lies
  /// outside [0,1] or the raster is empty.
  static GrayImage from_raster(Raster raster);
  /// Same, but values are clamped into [0,1] instead of rejected.
  static GrayImage clamped(Raster raster);

  int width() const { return raster_.width(); }
  int height() const { return raster_.height(); }
  bool empty() const { return raster_.empty(); }
  float operator()(int x, int y) const { return raster_(x, y); }
  const Raster& raster() const { return raster_; }
  std::span<const float> data() const { return raster_.data(); }

  bool operator==(const GrayImage&) const = default;

 private:
  explicit GrayImage(Raster raster) : raster_(std::move(raster)) {}
  Raster raster_;
};

/// Summed-area table. `sum_upto(x, y)` is the sum of all source pixels with
/// coordinates <= (x, y); sums are kept in double precision.
class IntegralImage {
 public:
  IntegralImage() = default;
  explicit IntegralImage(const Raster& source);

  int width() const { return width_; }
  int height() const { return height_; }

  double sum_upto(int x, int y) const { return at(x + 1, y + 1); }
  double total() const { return at(width_, height_); }

  /// Sum over the closed rectangle [x0,x1] x [y0,y1]; throws InvalidArgument
  /// if the rectangle is empty or leaves the image.
  double box_sum(int x0, int y0, int x1, int y1) const;

  /// Unchecked variant for inner loops; same closed-rectangle semantics.
  double box_sum_unchecked(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  // Padded (width+1) x (height+1) table with a zero first row and column.
  double at(int px, int py) const {
    return sums_[static_cast<std::size_t>(py) * (width_ + 1) + static_cast<std::size_t>(px)];
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> sums_;
};

struct Gradient {
  Raster gx;
  Raster gy;
};

// --- raster I/O -------------------------------------------------------------

/// Reads binary PGM (P5), binary PPM (P6) or PNG (8-bit gray/RGB, with or
/// without alpha). Color is converted with 0.299R + 0.587G + 0.114B.
GrayImage load_image(const std::filesystem::path& path);

/// Writes a binary PGM with maxval 255 (values rounded to nearest level).
void save_pgm(const GrayImage& image, const std::filesystem::path& path);

// --- raster operations ------------------------------------------------------

IntegralImage integral_image(const Raster& image);
inline IntegralImage integral_image(const GrayImage& image) { return integral_image(image.raster()); }

double box_sum(const IntegralImage& ii, int x0, int y0, int x1, int y1);

/// Separable Gaussian blur, kernel radius ceil(3 sigma), edge replication.
Raster gaussian_blur(const Raster& image, double sigma);
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// Takes every second pixel, starting at (0,0). The caller is responsible for
/// any anti-alias smoothing.
Raster downsample_half(const Raster& image);
GrayImage downsample_half(const GrayImage& image);

/// Bilinear resampling to the given size using pixel-centre alignment.
Raster resize_bilinear(const Raster& image, int out_width, int out_height);

/// Bilinear sample; positions outside the raster read as zero.
float sample_bilinear(const Raster& image, double x, double y);

/// Inverse-mapped warp: output pixel p takes the bilinear sample of the input
/// at h^-1 p. Out-of-image samples are 0.
GrayImage warp_homography(const GrayImage& image, const Homography& h, int out_width, int out_height);

/// 3x3 Sobel derivative estimates normalised to intensity per pixel, with
/// edge replication.
Gradient sobel_gradient(const Raster& image);
inline Gradient sobel_gradient(const GrayImage& image) { return sobel_gradient(image.raster()); }

/// Normalised 1-D Gaussian taps for radius ceil(3 sigma).
std::vector<float> gaussian_kernel(double sigma);

}  // namespace coverscan
