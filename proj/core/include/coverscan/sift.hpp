#pragma once

#include "coverscan/features.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

struct SiftParams {
  int octaves = 4;
  int scales_per_octave = 3;
  double base_sigma = 1.6;
  double contrast_threshold = 0.03;  ///< on |D(x)| after subpixel refinement, [0,1] intensities
  double edge_ratio = 10.0;          ///< principal-curvature ratio limit
  bool double_input = true;          ///< upsample 2x before the first octave

  void validate() const;
  bool operator==(const SiftParams&) const = default;
};

inline constexpr int kSiftDescriptorLength = 128;

/// Difference-of-Gaussians keypoints with 4x4x8 gradient-histogram
/// descriptors. The input is assumed to carry a camera blur of 0.5 px.
/// Throws InvalidArgument when the shorter image side is below 32 pixels.
Features sift_detect(const GrayImage& image, const SiftParams& params = {});

}  // namespace coverscan
