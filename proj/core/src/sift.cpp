#include "coverscan/sift.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <tuple>
#include <vector>

#include "coverscan/error.hpp"
#include "detail/orientation.hpp"

namespace coverscan {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInputBlur = 0.5;
constexpr int kImageBorder = 5;
constexpr int kMaxRefineSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescScaleFactor = 3.0;
constexpr float kDescClamp = 0.2f;

struct Octave {
  std::vector<Raster> gauss;
  std::vector<Raster> dog;
};

// Candidate in octave-local coordinates after refinement.
struct Extremum {
  int octave;
  int layer;
  int x;
  int y;
  double sub_layer;  // layer + offset
  double sub_x;
  double sub_y;
  double contrast;
};

std::vector<Octave> build_pyramid(const Raster& base, double input_blur, const SiftParams& p, int octaves) {
  const int levels = p.scales_per_octave + 3;
  std::vector<double> increments(levels);
  const double k = std::pow(2.0, 1.0 / p.scales_per_octave);
  increments[0] = p.base_sigma;
  for (int i = 1; i < levels; ++i) {
    const double prev = p.base_sigma * std::pow(k, i - 1);
    const double total = prev * k;
    increments[i] = std::sqrt(total * total - prev * prev);
  }

  std::vector<Octave> pyramid(octaves);
  for (int o = 0; o < octaves; ++o) {
    auto& gauss = pyramid[o].gauss;
    gauss.reserve(levels);
    if (o == 0) {
      const double initial = std::sqrt(std::max(p.base_sigma * p.base_sigma - input_blur * input_blur, 0.01));
      gauss.push_back(gaussian_blur(base, initial));
    } else {
      // Layer S of the previous octave has exactly twice the base blur.
      gauss.push_back(downsample_half(pyramid[o - 1].gauss[p.scales_per_octave]));
    }
    for (int i = 1; i < levels; ++i) gauss.push_back(gaussian_blur(gauss[i - 1], increments[i]));

    auto& dog = pyramid[o].dog;
    dog.reserve(levels - 1);
    for (int i = 0; i + 1 < levels; ++i) {
      Raster d(gauss[i].width(), gauss[i].height());
      auto a = gauss[i + 1].data();
      auto b = gauss[i].data();
      auto out = d.data();
      for (std::size_t j = 0; j < out.size(); ++j) out[j] = a[j] - b[j];
      dog.push_back(std::move(d));
    }
  }
  return pyramid;
}

bool is_extremum(const std::vector<Raster>& dog, int layer, int x, int y) {
  const float v = dog[layer](x, y);
  if (v > 0) {
    for (int l = layer - 1; l <= layer + 1; ++l) {
      for (int dy = -1; dy <= 1; ++dy) {
        const float* r = dog[l].row(y + dy);
        for (int dx = -1; dx <= 1; ++dx) {
          if ((l != layer || dx != 0 || dy != 0) && r[x + dx] >= v) return false;
        }
      }
    }
  } else {
    for (int l = layer - 1; l <= layer + 1; ++l) {
      for (int dy = -1; dy <= 1; ++dy) {
        const float* r = dog[l].row(y + dy);
        for (int dx = -1; dx <= 1; ++dx) {
          if ((l != layer || dx != 0 || dy != 0) && r[x + dx] <= v) return false;
        }
      }
    }
  }
  return true;
}

// Quadratic fit in (x, y, scale); returns false when the fit wanders off,
// fails the contrast test or lies on an edge.
bool refine(const std::vector<Raster>& dog, const SiftParams& p, Extremum& e) {
  const int layers = p.scales_per_octave;
  const int w = dog[0].width();
  const int h = dog[0].height();
  int x = e.x, y = e.y, l = e.layer;
  double off[3] = {0, 0, 0};
  double grad[3];
  bool converged = false;

  for (int step = 0; step < kMaxRefineSteps; ++step) {
    const Raster& cur = dog[l];
    const Raster& prv = dog[l - 1];
    const Raster& nxt = dog[l + 1];
    const double v2 = 2.0 * cur(x, y);
    grad[0] = 0.5 * (cur(x + 1, y) - cur(x - 1, y));
    grad[1] = 0.5 * (cur(x, y + 1) - cur(x, y - 1));
    grad[2] = 0.5 * (nxt(x, y) - prv(x, y));
    const double dxx = cur(x + 1, y) + cur(x - 1, y) - v2;
    const double dyy = cur(x, y + 1) + cur(x, y - 1) - v2;
    const double dss = nxt(x, y) + prv(x, y) - v2;
    const double dxy = 0.25 * (cur(x + 1, y + 1) - cur(x - 1, y + 1) - cur(x + 1, y - 1) + cur(x - 1, y - 1));
    const double dxs = 0.25 * (nxt(x + 1, y) - nxt(x - 1, y) - prv(x + 1, y) + prv(x - 1, y));
    const double dys = 0.25 * (nxt(x, y + 1) - nxt(x, y - 1) - prv(x, y + 1) + prv(x, y - 1));

    // Solve H * off = -grad by Cramer's rule.
    const double a = dxx, b = dxy, c = dxs, d = dyy, f = dys, g = dss;
    const double det = a * (d * g - f * f) - b * (b * g - f * c) + c * (b * f - d * c);
    if (std::abs(det) < 1e-15) return false;
    const double r0 = -grad[0], r1 = -grad[1], r2 = -grad[2];
    off[0] = (r0 * (d * g - f * f) - b * (r1 * g - f * r2) + c * (r1 * f - d * r2)) / det;
    off[1] = (a * (r1 * g - f * r2) - r0 * (b * g - f * c) + c * (b * r2 - r1 * c)) / det;
    off[2] = (a * (d * r2 - r1 * f) - b * (b * r2 - r1 * c) + r0 * (b * f - d * c)) / det;

    if (std::abs(off[0]) < 0.5 && std::abs(off[1]) < 0.5 && std::abs(off[2]) < 0.5) {
      converged = true;
      break;
    }
    if (std::abs(off[0]) > 1e6 || std::abs(off[1]) > 1e6 || std::abs(off[2]) > 1e6) return false;
    x += static_cast<int>(std::lround(off[0]));
    y += static_cast<int>(std::lround(off[1]));
    l += static_cast<int>(std::lround(off[2]));
    if (l < 1 || l > layers || x < kImageBorder || x >= w - kImageBorder || y < kImageBorder ||
        y >= h - kImageBorder) {
      return false;
    }
  }
  if (!converged) return false;

  const Raster& cur = dog[l];
  const double contrast = cur(x, y) + 0.5 * (grad[0] * off[0] + grad[1] * off[1] + grad[2] * off[2]);
  if (std::abs(contrast) < p.contrast_threshold) return false;

  const double v2 = 2.0 * cur(x, y);
  const double dxx = cur(x + 1, y) + cur(x - 1, y) - v2;
  const double dyy = cur(x, y + 1) + cur(x, y - 1) - v2;
  const double dxy = 0.25 * (cur(x + 1, y + 1) - cur(x - 1, y + 1) - cur(x + 1, y - 1) + cur(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double r = p.edge_ratio;
  if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;

  e.x = x;
  e.y = y;
  e.layer = l;
  e.sub_x = x + off[0];
  e.sub_y = y + off[1];
  e.sub_layer = l + off[2];
  e.contrast = std::abs(contrast);
  return true;
}

std::vector<double> dominant_orientations(const Raster& img, int x, int y, double sigma) {
  const int radius = static_cast<int>(std::lround(3.0 * kOrientationSigmaFactor * sigma));
  const double weight_scale = -1.0 / (2.0 * std::pow(kOrientationSigmaFactor * sigma, 2));
  std::array<double, kOrientationBins> hist{};

  for (int i = -radius; i <= radius; ++i) {
    const int yy = y + i;
    if (yy <= 0 || yy >= img.height() - 1) continue;
    for (int j = -radius; j <= radius; ++j) {
      const int xx = x + j;
      if (xx <= 0 || xx >= img.width() - 1) continue;
      const double dx = img(xx + 1, yy) - img(xx - 1, yy);
      const double dy = img(xx, yy + 1) - img(xx, yy - 1);
      const double mag = std::sqrt(dx * dx + dy * dy);
      double ang = std::atan2(dy, dx);
      if (ang < 0) ang += kTwoPi;
      int bin = static_cast<int>(std::lround(ang * kOrientationBins / kTwoPi));
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      hist[bin] += std::exp((i * i + j * j) * weight_scale) * mag;
    }
  }

  std::array<double, kOrientationBins> smooth{};
  for (int b = 0; b < kOrientationBins; ++b) {
    auto at = [&](int k) { return hist[(k + kOrientationBins) % kOrientationBins]; };
    smooth[b] = (at(b - 2) + at(b + 2)) * (1.0 / 16) + (at(b - 1) + at(b + 1)) * (4.0 / 16) + at(b) * (6.0 / 16);
  }
  const double peak = *std::max_element(smooth.begin(), smooth.end());
  std::vector<double> angles;
  if (peak <= 0) return angles;
  for (int b = 0; b < kOrientationBins; ++b) {
    const double left = smooth[(b + kOrientationBins - 1) % kOrientationBins];
    const double right = smooth[(b + 1) % kOrientationBins];
    if (smooth[b] > left && smooth[b] > right && smooth[b] >= kOrientationPeakRatio * peak) {
      double bin = b + 0.5 * (left - right) / (left - 2 * smooth[b] + right);
      if (bin < 0) bin += kOrientationBins;
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      double ang = bin * kTwoPi / kOrientationBins;
      if (ang >= kTwoPi) ang -= kTwoPi;
      angles.push_back(ang);
    }
  }
  return angles;
}

// Returns false when the descriptor window leaves the octave image.
bool describe(const Raster& img, double fx, double fy, double sigma, double angle, std::vector<float>& out) {
  const int x = static_cast<int>(std::lround(fx));
  const int y = static_cast<int>(std::lround(fy));
  const double hist_width = kDescScaleFactor * sigma;
  const int radius = static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (kDescWidth + 1) * 0.5));
  if (x - radius < 1 || y - radius < 1 || x + radius >= img.width() - 1 || y + radius >= img.height() - 1) {
    return false;
  }

  const double cos_a = std::cos(angle) / hist_width;
  const double sin_a = std::sin(angle) / hist_width;
  const double weight_scale = -1.0 / (0.5 * kDescWidth * kDescWidth);
  const double bins_per_rad = kDescBins / kTwoPi;
  constexpr int kHistSide = kDescWidth + 2;
  std::array<double, kHistSide * kHistSide * (kDescBins + 2)> hist{};
  auto hidx = [](int r, int c, int o) { return (r * kHistSide + c) * (kDescBins + 2) + o; };

  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      // Offset expressed in the keypoint frame, in histogram-cell units.
      const double c_rot = j * cos_a + i * sin_a;
      const double r_rot = -j * sin_a + i * cos_a;
      const double rbin = r_rot + kDescWidth / 2.0 - 0.5;
      const double cbin = c_rot + kDescWidth / 2.0 - 0.5;
      if (!(rbin > -1 && rbin < kDescWidth && cbin > -1 && cbin < kDescWidth)) continue;

      const int xx = x + j;
      const int yy = y + i;
      const double dx = img(xx + 1, yy) - img(xx - 1, yy);
      const double dy = img(xx, yy + 1) - img(xx, yy - 1);
      double ori = std::atan2(dy, dx) - angle;
      while (ori < 0) ori += kTwoPi;
      while (ori >= kTwoPi) ori -= kTwoPi;
      const double mag = std::sqrt(dx * dx + dy * dy) * std::exp((c_rot * c_rot + r_rot * r_rot) * weight_scale);

      const double obin = ori * bins_per_rad;
      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double rf = rbin - r0, cf = cbin - c0, of = obin - o0;
      if (o0 >= kDescBins) o0 -= kDescBins;

      // Trilinear spread into the padded histogram.
      for (int dr = 0; dr <= 1; ++dr) {
        const double vr = mag * (dr ? rf : 1 - rf);
        for (int dc = 0; dc <= 1; ++dc) {
          const double vc = vr * (dc ? cf : 1 - cf);
          for (int dob = 0; dob <= 1; ++dob) {
            const double vo = vc * (dob ? of : 1 - of);
            hist[hidx(r0 + 1 + dr, c0 + 1 + dc, o0 + dob)] += vo;
          }
        }
      }
    }
  }

  out.assign(kSiftDescriptorLength, 0.0f);
  for (int r = 0; r < kDescWidth; ++r) {
    for (int c = 0; c < kDescWidth; ++c) {
      // Fold the circular orientation overflow bins.
      hist[hidx(r + 1, c + 1, 0)] += hist[hidx(r + 1, c + 1, kDescBins)];
      hist[hidx(r + 1, c + 1, 1)] += hist[hidx(r + 1, c + 1, kDescBins + 1)];
      for (int o = 0; o < kDescBins; ++o) {
        out[(r * kDescWidth + c) * kDescBins + o] = static_cast<float>(hist[hidx(r + 1, c + 1, o)]);
      }
    }
  }

  double norm = 0;
  for (float v : out) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (norm <= 0) return false;
  // Clamp-and-renormalise taken to its fixed point: the scale s with
  // sum(min(s v, clamp)^2) = 1, found over the sorted magnitudes.
  std::array<double, kSiftDescriptorLength> mag;
  for (int i = 0; i < kSiftDescriptorLength; ++i) mag[i] = out[i] / norm;
  std::array<double, kSiftDescriptorLength> sorted = mag;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double tail = 0;
  for (double v : sorted) tail += v * v;
  double scale = 1.0;
  for (int k = 0; k < kSiftDescriptorLength && tail > 0; ++k) {
    const double room = 1.0 - k * static_cast<double>(kDescClamp) * kDescClamp;
    if (room <= 0) break;
    scale = std::sqrt(room / tail);
    if (scale * sorted[k] <= kDescClamp) break;
    tail -= sorted[k] * sorted[k];
  }
  norm = 0;
  for (int i = 0; i < kSiftDescriptorLength; ++i) {
    mag[i] = std::min(scale * mag[i], static_cast<double>(kDescClamp));
    norm += mag[i] * mag[i];
  }
  // Fewer than 1 / clamp^2 nonzero bins cannot reach unit norm under the clamp.
  const double fix = norm < 1.0 - 1e-9 ? 1.0 / std::sqrt(norm) : 1.0;
  for (int i = 0; i < kSiftDescriptorLength; ++i) out[i] = static_cast<float>(mag[i] * fix);
  return true;
}

}  // namespace

void SiftParams::validate() const {
  if (octaves < 1 || scales_per_octave < 1 || !(base_sigma > 0) || !(contrast_threshold > 0)) {
    throw InvalidArgument("SIFT parameters must be positive");
  }
  if (!(edge_ratio > 1)) throw InvalidArgument("SIFT edge_ratio must exceed 1");
}

Features sift_detect(const GrayImage& image, const SiftParams& params) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (std::min(image.width(), image.height()) < 32) throw InvalidArgument("image too small for SIFT (min side 32)");

  // Doubling (linear interpolation) doubles the assumed camera blur too.
  const double upscale = params.double_input ? 2.0 : 1.0;
  const Raster base = params.double_input
                          ? resize_bilinear(image.raster(), 2 * image.width(), 2 * image.height())
                          : image.raster();
  // Stop before the octave image would shrink below 16 pixels.
  int octaves = 0;
  for (int side = std::min(base.width(), base.height()); octaves < params.octaves && side >= 16; side /= 2) {
    ++octaves;
  }
  const std::vector<Octave> pyramid = build_pyramid(base, kInputBlur * upscale, params, octaves);
  const int layers = params.scales_per_octave;
  const float prefilter = static_cast<float>(0.5 * params.contrast_threshold);

  Features out;
  out.descriptors = DescriptorSet(DescriptorKind::Float, kSiftDescriptorLength);
  std::vector<float> desc;

  for (int o = 0; o < octaves; ++o) {
    const auto& dog = pyramid[o].dog;
    const int w = dog[0].width();
    const int h = dog[0].height();
    const double octave_scale = std::ldexp(1.0, o);
    // Refinement can move two raw extrema onto the same sample.
    std::set<std::tuple<int, int, int>> seen;
    for (int l = 1; l <= layers; ++l) {
      for (int y = kImageBorder; y < h - kImageBorder; ++y) {
        const float* row = dog[l].row(y);
        for (int x = kImageBorder; x < w - kImageBorder; ++x) {
          if (std::abs(row[x]) <= prefilter || !is_extremum(dog, l, x, y)) continue;
          Extremum e{o, l, x, y, 0, 0, 0, 0};
          if (!refine(dog, params, e)) continue;
          if (!seen.insert({e.layer, e.x, e.y}).second) continue;

          const double sigma = params.base_sigma * std::pow(2.0, e.sub_layer / layers);
          const Raster& gauss = pyramid[o].gauss[e.layer];
          for (double angle : dominant_orientations(gauss, e.x, e.y, sigma)) {
            if (!describe(gauss, e.sub_x, e.sub_y, sigma, angle, desc)) continue;
            Keypoint kp;
            // Octave pixel x sits at base pixel x * 2^o; base pixels are
            // centre-aligned with the input.
            kp.x = static_cast<float>((e.sub_x * octave_scale + 0.5) / upscale - 0.5);
            kp.y = static_cast<float>((e.sub_y * octave_scale + 0.5) / upscale - 0.5);
            kp.size = static_cast<float>(2.0 * sigma * octave_scale / upscale);
            kp.angle = detail::wrap_angle(angle);
            kp.response = static_cast<float>(e.contrast);
            kp.octave = o;
            if (kp.x < 0 || kp.y < 0 || kp.x >= image.width() || kp.y >= image.height()) continue;
            out.keypoints.push_back(kp);
            out.descriptors.push_back_floats(desc);
          }
        }
      }
    }
  }

  out.extract_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace coverscan
