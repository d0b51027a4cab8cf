#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "coverscan/error.hpp"
#include "coverscan/orb.hpp"
#include "detail/fast.hpp"

namespace coverscan {
namespace {

constexpr int kArc = 9;
constexpr int kCircle = 16;

// Bit k set when circle pixel k passes; true when some 9-run exists.
bool has_arc(unsigned mask) {
  unsigned m = mask | (mask << kCircle);
  for (int k = 1; k < kArc; ++k) m &= m >> 1;
  return (m & 0xFFFFu) != 0;
}

// max over the 16 arcs of the arc's minimum, via doubling windows over the
// circle unrolled twice.
float best_arc_minimum(const std::array<float, kCircle>& d) {
  std::array<float, 2 * kCircle> a;
  for (int k = 0; k < 2 * kCircle; ++k) a[k] = d[k & (kCircle - 1)];
  std::array<float, 2 * kCircle> m = a;
  for (int k = 0; k < 2 * kCircle - 1; ++k) m[k] = std::min(a[k], a[k + 1]);
  for (int k = 0; k < 2 * kCircle - 3; ++k) m[k] = std::min(m[k], m[k + 2]);
  for (int k = 0; k < 2 * kCircle - 7; ++k) m[k] = std::min(m[k], m[k + 4]);
  float best = -1e30f;
  for (int k = 0; k < kCircle; ++k) best = std::max(best, std::min(m[k], a[k + 8]));
  return best;
}

// Score of the segment test given the 16 signed differences (circle - centre).
FastVerdict score_circle(const std::array<float, kCircle>& diff, float t) {
  unsigned bright_mask = 0;
  unsigned dark_mask = 0;
  for (int k = 0; k < kCircle; ++k) {
    bright_mask |= static_cast<unsigned>(diff[k] > t) << k;
    dark_mask |= static_cast<unsigned>(diff[k] < -t) << k;
  }
  const bool bright_arc = has_arc(bright_mask);
  const bool dark_arc = has_arc(dark_mask);
  FastVerdict v;
  if (!bright_arc && !dark_arc) return v;
  v.corner = true;
  if (bright_arc) v.score = std::max(v.score, best_arc_minimum(diff));
  if (dark_arc) {
    std::array<float, kCircle> neg;
    for (int k = 0; k < kCircle; ++k) neg[k] = -diff[k];
    v.score = std::max(v.score, best_arc_minimum(neg));
  }
  return v;
}

}  // namespace

const std::array<std::array<int, 2>, 16>& fast_circle() {
  static constexpr std::array<std::array<int, 2>, 16> kOffsets{{{0, -3},
                                                                {1, -3},
                                                                {2, -2},
                                                                {3, -1},
                                                                {3, 0},
                                                                {3, 1},
                                                                {2, 2},
                                                                {1, 3},
                                                                {0, 3},
                                                                {-1, 3},
                                                                {-2, 2},
                                                                {-3, 1},
                                                                {-3, 0},
                                                                {-3, -1},
                                                                {-2, -2},
                                                                {-1, -3}}};
  return kOffsets;
}

FastVerdict fast_segment_test(const Raster& image, int x, int y, float t) {
  if (x < 3 || y < 3 || x >= image.width() - 3 || y >= image.height() - 3) {
    throw InvalidArgument("FAST test point closer than 3 px to the border");
  }
  const float centre = image(x, y);
  std::array<float, kCircle> diff{};
  const auto& circle = fast_circle();
  for (int k = 0; k < kCircle; ++k) diff[k] = image(x + circle[k][0], y + circle[k][1]) - centre;
  return score_circle(diff, t);
}

namespace detail {

std::vector<FastCorner> detect_fast(const Raster& image, float threshold, int border) {
  const int w = image.width();
  const int h = image.height();
  border = std::max(border, 3);
  std::vector<FastCorner> corners;
  if (w <= 2 * border || h <= 2 * border) return corners;

  Raster score(w, h, 0.0f);
  const auto& circle = fast_circle();
  std::array<float, kCircle> diff{};
  std::array<std::ptrdiff_t, kCircle> offset{};
  for (int k = 0; k < kCircle; ++k) offset[k] = static_cast<std::ptrdiff_t>(circle[k][1]) * w + circle[k][0];
  std::vector<std::uint32_t> bright_mask(static_cast<std::size_t>(w));
  std::vector<std::uint32_t> dark_mask(static_cast<std::size_t>(w));
  std::vector<std::uint8_t> is_corner(static_cast<std::size_t>(w));
  for (int y = border; y < h - border; ++y) {
    const float* row = image.row(y);
    const int x0 = border;
    const int n = w - 2 * border;
    // Whole-row passes over the circle so the comparisons vectorise.
    std::fill_n(bright_mask.begin(), n, 0u);
    std::fill_n(dark_mask.begin(), n, 0u);
    for (int k = 0; k < kCircle; ++k) {
      const float* ring = row + x0 + offset[k];
      const float* centre = row + x0;
      std::uint32_t* bm = bright_mask.data();
      std::uint32_t* dm = dark_mask.data();
      for (int i = 0; i < n; ++i) {
        const float d = ring[i] - centre[i];
        bm[i] |= static_cast<std::uint32_t>(d > threshold) << k;
        dm[i] |= static_cast<std::uint32_t>(d < -threshold) << k;
      }
    }
    for (int i = 0; i < n; ++i) {
      std::uint32_t b = bright_mask[i] | (bright_mask[i] << kCircle);
      std::uint32_t d = dark_mask[i] | (dark_mask[i] << kCircle);
      for (int k = 1; k < kArc; ++k) {
        b &= b >> 1;
        d &= d >> 1;
      }
      is_corner[i] = ((b | d) & 0xFFFFu) != 0;
    }
    for (int i = 0; i < n; ++i) {
      if (!is_corner[i]) continue;
      const int x = x0 + i;
      const float c = row[x];
      for (int k = 0; k < kCircle; ++k) diff[k] = row[x + offset[k]] - c;
      const FastVerdict v = score_circle(diff, threshold);
      if (v.corner) score(x, y) = v.score;
    }
  }

  // Strict 3x3 non-maximum suppression; ties resolve towards the earlier
  // pixel in raster order, i.e. a pixel must beat its four earlier
  // neighbours and at least equal its four later ones.
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(w));
  for (int y = border; y < h - border; ++y) {
    const float* up = score.row(y - 1);
    const float* mid = score.row(y);
    const float* down = score.row(y + 1);
    for (int x = border; x < w - border; ++x) {
      const float earlier = std::max(std::max(up[x - 1], up[x]), std::max(up[x + 1], mid[x - 1]));
      const float later = std::max(std::max(down[x - 1], down[x]), std::max(down[x + 1], mid[x + 1]));
      const float v = mid[x];
      keep[x] = (v > 0.0f) & (v > earlier) & (v >= later);
    }
    for (int x = border; x < w - border; ++x) {
      if (keep[x]) corners.push_back({x, y, mid[x]});
    }
  }
  return corners;
}

}  // namespace detail
}  // namespace coverscan
