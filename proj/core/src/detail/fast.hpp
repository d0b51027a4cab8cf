#pragma once

#include <vector>

#include "coverscan/image.hpp"

namespace coverscan::detail {

struct FastCorner {
  int x;
  int y;
  float score;
};

/// FAST-9 corners at least `border` pixels from every edge, 3x3 non-maximum
/// suppressed on the segment-test score, in raster order.
std::vector<FastCorner> detect_fast(const Raster& image, float threshold, int border);

}  // namespace coverscan::detail
