#pragma once

#include "coverscan/features.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

struct SurfParams {
  int octaves = 4;
  int layers_per_octave = 4;
  double hessian_threshold = 1e-4;  ///< on the area-normalised box-filter determinant

  void validate() const;
  bool operator==(const SurfParams&) const = default;
};

inline constexpr int kSurfDescriptorLength = 64;

/// Box-filter size of `layer` in `octave` (9, 15, 21, 27 for the first one,
/// doubling the increment every octave).
int surf_filter_size(int octave, int layer);

/// Fast-Hessian keypoints from the integral image, Haar-wavelet orientation
/// and the 64-d subregion descriptor. Throws InvalidArgument when the shorter
/// side is below 32 pixels.
Features surf_detect(const GrayImage& image, const SurfParams& params = {});

}  // namespace coverscan
