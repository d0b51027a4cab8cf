#pragma once

#include <array>
#include <optional>

#include "coverscan/features.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

struct OrbParams {
  int n_features = 500;
  double fast_threshold = 0.08;  ///< on [0,1] intensities
  int pyramid_levels = 8;
  double scale_factor = 1.2;
  int patch_size = 31;

  void validate() const;
  bool operator==(const OrbParams&) const = default;
};

inline constexpr int kBriefBits = 256;
inline constexpr int kBriefOrientationSteps = 30;  // 12 degree bins
inline constexpr double kHarrisK = 0.04;
inline constexpr int kHarrisWindow = 7;

/// Test-point pair of the BRIEF pattern, offsets from the patch centre.
struct BriefPair {
  int ax, ay, bx, by;
};

/// Fixed 256-pair sampling pattern shared by every ORB descriptor.
const std::array<BriefPair, kBriefBits>& brief_pattern();

/// The 16-pixel Bresenham circle of radius 3, clockwise from 12 o'clock.
const std::array<std::array<int, 2>, 16>& fast_circle();

struct FastVerdict {
  bool corner = false;
  float score = 0.0f;  ///< best arc's minimum |circle - centre|, 0 when not a corner
};

/// FAST-9 segment test at (x, y) with threshold t. Throws InvalidArgument
/// when the circle leaves the image (closer than 3 px to a border).
FastVerdict fast_segment_test(const Raster& image, int x, int y, float t);
inline FastVerdict fast_segment_test(const GrayImage& image, int x, int y, float t) {
  return fast_segment_test(image.raster(), x, y, t);
}

/// Orientation from the intensity centroid of the disc of `radius` around
/// the (rounded) keypoint position: atan2(m01, m10) in [0, 2pi). Returns
/// nullopt when both moments vanish (m10^2 + m01^2 < 1e-12). Throws
/// InvalidArgument when the disc leaves the image.
std::optional<float> intensity_centroid(const Raster& image, const Keypoint& kp, int radius);
inline std::optional<float> intensity_centroid(const GrayImage& image, const Keypoint& kp, int radius) {
  return intensity_centroid(image.raster(), kp, radius);
}

/// Quantises an angle to the nearest of the 30 steering steps, in radians.
double steering_angle(double angle);

/// 256-bit BRIEF descriptor with the pattern rotated by the keypoint angle
/// (quantised to 12 degrees). `smoothed` must already be low-pass filtered;
/// bit i is set when smoothed(a_i) < smoothed(b_i). Throws InvalidArgument
/// when a rotated test point leaves the image.
Descriptor steered_brief(const Raster& smoothed, const Keypoint& kp,
                         const std::array<BriefPair, kBriefBits>& pattern = brief_pattern());

/// Harris corner measure det(M) - k tr(M)^2 over a 7x7 window of Sobel
/// gradients at integer position (x, y).
double harris_response(const Raster& image, int x, int y);

/// Oriented FAST corners on a scale pyramid, ranked globally by Harris
/// response (at most n_features kept), described by steered BRIEF.
/// Keypoints are returned in nonincreasing response order.
Features orb_detect(const GrayImage& image, const OrbParams& params = {});

}  // namespace coverscan
