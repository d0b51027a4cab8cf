#include "coverscan/orb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "coverscan/error.hpp"
#include "detail/fast.hpp"
#include "detail/orientation.hpp"

namespace coverscan {
namespace {

constexpr double kBriefSmoothing = 2.0;

struct Candidate {
  int level;
  int x;
  int y;
  double harris;
};

}  // namespace

void OrbParams::validate() const {
  if (n_features < 1) throw InvalidArgument("ORB n_features must be >= 1");
  if (!(scale_factor > 1.0)) throw InvalidArgument("ORB scale_factor must exceed 1");
  if (pyramid_levels < 1 || patch_size < 7 || !(fast_threshold > 0)) {
    throw InvalidArgument("ORB pyramid_levels, patch_size and fast_threshold must be positive");
  }
}

std::optional<float> intensity_centroid(const Raster& image, const Keypoint& kp, int radius) {
  const int cx = static_cast<int>(std::lround(kp.x));
  const int cy = static_cast<int>(std::lround(kp.y));
  if (radius < 1 || cx - radius < 0 || cy - radius < 0 || cx + radius >= image.width() ||
      cy + radius >= image.height()) {
    throw InvalidArgument("intensity centroid patch leaves the image");
  }
  double m10 = 0.0;
  double m01 = 0.0;
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    const float* row = image.row(cy + dy);
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const double v = row[cx + dx];
      m10 += dx * v;
      m01 += dy * v;
    }
  }
  if (m10 * m10 + m01 * m01 < 1e-12) return std::nullopt;
  return detail::positive_atan2(m01, m10);
}

double steering_angle(double angle) {
  constexpr double kStep = 2.0 * std::numbers::pi / kBriefOrientationSteps;
  long bin = std::lround(angle / kStep) % kBriefOrientationSteps;
  if (bin < 0) bin += kBriefOrientationSteps;
  return bin * kStep;
}

Descriptor steered_brief(const Raster& smoothed, const Keypoint& kp, const std::array<BriefPair, kBriefBits>& pattern) {
  const int cx = static_cast<int>(std::lround(kp.x));
  const int cy = static_cast<int>(std::lround(kp.y));
  const double theta = kp.angle == kUndefinedAngle ? 0.0 : steering_angle(kp.angle);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  auto rotated = [&](int px, int py, int& rx, int& ry) {
    rx = cx + static_cast<int>(std::lround(px * c - py * s));
    ry = cy + static_cast<int>(std::lround(px * s + py * c));
    if (rx < 0 || ry < 0 || rx >= smoothed.width() || ry >= smoothed.height()) {
      throw InvalidArgument("steered BRIEF test point leaves the image");
    }
  };

  Descriptor d = Descriptor::bit_string(kBriefBits);
  for (int i = 0; i < kBriefBits; ++i) {
    int ax, ay, bx, by;
    rotated(pattern[i].ax, pattern[i].ay, ax, ay);
    rotated(pattern[i].bx, pattern[i].by, bx, by);
    d.set_bit(i, smoothed(ax, ay) < smoothed(bx, by));
  }
  return d;
}

double harris_response(const Raster& image, int x, int y) {
  constexpr int kHalf = kHarrisWindow / 2;
  const bool interior = x - kHalf - 1 >= 0 && y - kHalf - 1 >= 0 && x + kHalf + 1 < image.width() &&
                        y + kHalf + 1 < image.height();
  auto at = [&](int px, int py) { return interior ? image(px, py) : image.clamped(px, py); };
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (int dy = -kHalf; dy <= kHalf; ++dy) {
    for (int dx = -kHalf; dx <= kHalf; ++dx) {
      const int px = x + dx;
      const int py = y + dy;
      const double gx = ((at(px + 1, py - 1) - at(px - 1, py - 1)) + 2.0 * (at(px + 1, py) - at(px - 1, py)) +
                         (at(px + 1, py + 1) - at(px - 1, py + 1))) *
                        0.125;
      const double gy = ((at(px - 1, py + 1) - at(px - 1, py - 1)) + 2.0 * (at(px, py + 1) - at(px, py - 1)) +
                         (at(px + 1, py + 1) - at(px + 1, py - 1))) *
                        0.125;
      sxx += gx * gx;
      syy += gy * gy;
      sxy += gx * gy;
    }
  }
  const double tr = sxx + syy;
  return sxx * syy - sxy * sxy - kHarrisK * tr * tr;
}

Features orb_detect(const GrayImage& image, const OrbParams& params) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (std::min(image.width(), image.height()) < 32) throw InvalidArgument("image too small for ORB (min side 32)");

  const int half_patch = params.patch_size / 2;
  // Rotated pattern corners reach half_patch * sqrt(2) from the centre.
  const int border = static_cast<int>(std::ceil(half_patch * std::numbers::sqrt2)) + 1;
  const float threshold = static_cast<float>(params.fast_threshold);

  std::vector<Raster> levels;
  std::vector<double> scales;
  levels.push_back(image.raster());
  scales.push_back(1.0);
  for (int l = 1; l < params.pyramid_levels; ++l) {
    const double scale = std::pow(params.scale_factor, l);
    const int w = static_cast<int>(std::lround(image.width() / scale));
    const int h = static_cast<int>(std::lround(image.height() / scale));
    if (w <= 2 * border + 1 || h <= 2 * border + 1) break;
    levels.push_back(resize_bilinear(levels.back(), w, h));
    scales.push_back(scale);
  }

  std::vector<Candidate> pool;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    for (const auto& c : detail::detect_fast(levels[l], threshold, border)) {
      const double r = harris_response(levels[l], c.x, c.y);
      if (r > 0.0) pool.push_back({static_cast<int>(l), c.x, c.y, r});
    }
  }
  // Stable sort keeps (level, raster) order among equal responses.
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.harris > b.harris; });
  if (pool.size() > static_cast<std::size_t>(params.n_features)) pool.resize(params.n_features);

  std::vector<Raster> smoothed(levels.size());
  Features out;
  out.descriptors = DescriptorSet(DescriptorKind::Binary, kBriefBits);
  out.descriptors.reserve(pool.size());
  out.keypoints.reserve(pool.size());
  for (const auto& c : pool) {
    if (smoothed[c.level].empty()) smoothed[c.level] = gaussian_blur(levels[c.level], kBriefSmoothing);
    Keypoint local;
    local.x = static_cast<float>(c.x);
    local.y = static_cast<float>(c.y);
    const auto angle = intensity_centroid(levels[c.level], local, half_patch);
    local.angle = angle.value_or(0.0f);
    const Descriptor d = steered_brief(smoothed[c.level], local);

    const double scale = scales[c.level];
    Keypoint kp;
    kp.x = static_cast<float>(std::clamp((c.x + 0.5) * scale - 0.5, 0.0, image.width() - 1.0));
    kp.y = static_cast<float>(std::clamp((c.y + 0.5) * scale - 0.5, 0.0, image.height() - 1.0));
    kp.size = static_cast<float>(params.patch_size * scale);
    kp.angle = local.angle;
    kp.response = static_cast<float>(c.harris);
    kp.octave = c.level;
    out.keypoints.push_back(kp);
    out.descriptors.push_back(d);
  }

  out.extract_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace coverscan
