#include "coverscan/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coverscan/error.hpp"

namespace coverscan {

Raster::Raster(int width, int height, float fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("raster dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Raster::Raster(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("raster dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidArgument("raster data length does not match width x height");
  }
}

float Raster::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return data_[index(x, y)];
}

GrayImage::GrayImage(int width, int height, float fill) : raster_(width, height, std::clamp(fill, 0.0f, 1.0f)) {}

GrayImage GrayImage::from_raster(Raster raster) {
  if (raster.empty()) throw InvalidArgument("gray image must not be empty");
  for (float v : raster.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw InvalidArgument("gray image intensities must lie in [0,1]");
  }
  return GrayImage(std::move(raster));
}

GrayImage GrayImage::clamped(Raster raster) {
  if (raster.empty()) throw InvalidArgument("gray image must not be empty");
  for (float& v : raster.data()) {
    v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  }
  return GrayImage(std::move(raster));
}

// --- integral image ---------------------------------------------------------

IntegralImage::IntegralImage(const Raster& source) : width_(source.width()), height_(source.height()) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  sums_.assign(stride * (static_cast<std::size_t>(height_) + 1), 0.0);
  for (int y = 0; y < height_; ++y) {
    const float* src = source.row(y);
    double row_sum = 0.0;
    double* out = sums_.data() + (static_cast<std::size_t>(y) + 1) * stride;
    const double* above = out - stride;
    for (int x = 0; x < width_; ++x) {
      row_sum += src[x];
      out[x + 1] = above[x + 1] + row_sum;
    }
  }
}

double IntegralImage::box_sum(int x0, int y0, int x1, int y1) const {
  if (x0 < 0 || y0 < 0 || x1 >= width_ || y1 >= height_ || x0 > x1 || y0 > y1) {
    throw InvalidArgument("box_sum rectangle outside image");
  }
  return box_sum_unchecked(x0, y0, x1, y1);
}

IntegralImage integral_image(const Raster& image) { return IntegralImage(image); }

double box_sum(const IntegralImage& ii, int x0, int y0, int x1, int y1) { return ii.box_sum(x0, y0, x1, y1); }

// --- gaussian ---------------------------------------------------------------

std::vector<float> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += taps[i + radius];
  }
  std::vector<float> kernel(taps.size());
  for (std::size_t i = 0; i < taps.size(); ++i) kernel[i] = static_cast<float>(taps[i] / total);
  return kernel;
}

Raster gaussian_blur(const Raster& image, double sigma) {
  const std::vector<float> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width();
  const int h = image.height();

  // Horizontal pass into a padded row buffer so the inner loop has no clamps.
  Raster tmp(w, h);
  std::vector<float> padded(static_cast<std::size_t>(w) + 2 * radius);
  for (int y = 0; y < h; ++y) {
    const float* src = image.row(y);
    for (int i = 0; i < radius; ++i) {
      padded[i] = src[0];
      padded[radius + w + i] = src[w - 1];
    }
    std::copy(src, src + w, padded.begin() + radius);
    float* dst = tmp.row(y);
    std::fill(dst, dst + w, 0.0f);
    for (std::size_t k = 0; k < kernel.size(); ++k) {
      const float wk = kernel[k];
      const float* p = padded.data() + k;
      for (int x = 0; x < w; ++x) dst[x] += wk * p[x];
    }
  }

  // Vertical pass, accumulating whole rows at a time.
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    float* dst = out.row(y);
    std::fill(dst, dst + w, 0.0f);
    for (int k = -radius; k <= radius; ++k) {
      const float wk = kernel[k + radius];
      const float* src = tmp.row(std::clamp(y + k, 0, h - 1));
      for (int x = 0; x < w; ++x) dst[x] += wk * src[x];
    }
  }
  return out;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  return GrayImage::clamped(gaussian_blur(image.raster(), sigma));
}

// --- resampling -------------------------------------------------------------

Raster downsample_half(const Raster& image) {
  if (image.width() < 2 || image.height() < 2) {
    throw InvalidArgument("downsample_half needs at least a 2x2 input");
  }
  const int w = image.width() / 2;
  const int h = image.height() / 2;
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    const float* src = image.row(2 * y);
    float* dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = src[2 * x];
  }
  return out;
}

GrayImage downsample_half(const GrayImage& image) {
  return GrayImage::from_raster(downsample_half(image.raster()));
}

Raster resize_bilinear(const Raster& image, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) throw InvalidArgument("resize target must be positive");
  Raster out(out_width, out_height);
  const double sx = static_cast<double>(image.width()) / out_width;
  const double sy = static_cast<double>(image.height()) / out_height;
  std::vector<int> col0(out_width);
  std::vector<int> col1(out_width);
  std::vector<float> col_w(out_width);
  for (int x = 0; x < out_width; ++x) {
    const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
    col0[x] = static_cast<int>(fx);
    col1[x] = std::min(col0[x] + 1, image.width() - 1);
    col_w[x] = static_cast<float>(fx - col0[x]);
  }
  for (int y = 0; y < out_height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const float wy = static_cast<float>(fy - y0);
    const float* r0 = image.row(y0);
    const float* r1 = image.row(y1);
    float* dst = out.row(y);
    for (int x = 0; x < out_width; ++x) {
      const int x0 = col0[x];
      const int x1 = col1[x];
      const float wx = col_w[x];
      const float top = r0[x0] + wx * (r0[x1] - r0[x0]);
      const float bottom = r1[x0] + wx * (r1[x1] - r1[x0]);
      dst[x] = top + wy * (bottom - top);
    }
  }
  return out;
}

float sample_bilinear(const Raster& image, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  auto px = [&](int xi, int yi) -> double {
    if (xi < 0 || yi < 0 || xi >= image.width() || yi >= image.height()) return 0.0;
    return image(xi, yi);
  };
  // Skip taps with zero weight so exact integer positions never touch
  // out-of-range neighbours.
  double v = (1.0 - ax) * (1.0 - ay) * px(x0, y0);
  if (ax != 0.0) v += ax * (1.0 - ay) * px(x0 + 1, y0);
  if (ay != 0.0) v += (1.0 - ax) * ay * px(x0, y0 + 1);
  if (ax != 0.0 && ay != 0.0) v += ax * ay * px(x0 + 1, y0 + 1);
  return static_cast<float>(v);
}

GrayImage warp_homography(const GrayImage& image, const Homography& h, int out_width, int out_height) {
  const Homography inv = h.inverse();
  Raster out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    float* dst = out.row(y);
    for (int x = 0; x < out_width; ++x) {
      const Point2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      // Snap values within rounding noise of an integer so exact shifts stay exact.
      const double sx = std::abs(src.x - std::round(src.x)) < 1e-9 ? std::round(src.x) : src.x;
      const double sy = std::abs(src.y - std::round(src.y)) < 1e-9 ? std::round(src.y) : src.y;
      dst[x] = sample_bilinear(image.raster(), sx, sy);
    }
  }
  return GrayImage::clamped(std::move(out));
}

// --- derivatives ------------------------------------------------------------

Gradient sobel_gradient(const Raster& image) {
  const int w = image.width();
  const int h = image.height();
  Gradient g{Raster(w, h), Raster(w, h)};
  for (int y = 0; y < h; ++y) {
    const float* up = image.row(std::max(y - 1, 0));
    const float* mid = image.row(y);
    const float* down = image.row(std::min(y + 1, h - 1));
    float* gx = g.gx.row(y);
    float* gy = g.gy.row(y);
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      const float dx = (up[xr] - up[xl]) + 2.0f * (mid[xr] - mid[xl]) + (down[xr] - down[xl]);
      const float dy = (down[xl] - up[xl]) + 2.0f * (down[x] - up[x]) + (down[xr] - up[xr]);
      gx[x] = dx * 0.125f;
      gy[x] = dy * 0.125f;
    }
  }
  return g;
}

}  // namespace coverscan
