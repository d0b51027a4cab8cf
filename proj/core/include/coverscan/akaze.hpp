#pragma once

#include <span>
#include <vector>

#include "coverscan/features.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

struct AkazeParams {
  int octaves = 4;
  int sublevels = 4;
  double contrast_percentile = 0.7;
  double detector_threshold = 1e-3;  ///< on the scale-normalised Hessian determinant
  int descriptor_channels = 3;       ///< 1 = intensity, 2 = + dx, 3 = + dy

  void validate() const;
  bool operator==(const AkazeParams&) const = default;
};

/// M-LDB bit count for the given channel count: channels * (6 + 36 + 120).
int mldb_bits(int channels);

// --- nonlinear diffusion building blocks ------------------------------------

/// Perona-Malik g2 diffusivity 1 / (1 + |grad L|^2 / k^2), elementwise.
Raster g2_conductivity(const Raster& gx, const Raster& gy, double k);

/// One explicit step L + tau * div(g grad L) with neighbour-averaged
/// conductivities and zero-flux borders. Throws InvalidArgument when the
/// rasters differ in size or tau <= 0.
Raster fed_diffusion_step(const Raster& L, const Raster& g, double tau);

/// Step sizes of one fast-explicit-diffusion cycle reaching `total_time`
/// with stability limit `tau_max`: the smallest n whose cycle time
/// tau_max (n^2 + n) / 3 covers total_time, rescaled to hit it exactly.
std::vector<double> fed_step_sizes(double total_time, double tau_max = 0.25);

/// Applies every step of `taus` with the fixed conductivity `g`.
Raster fed_cycle(Raster L, const Raster& g, std::span<const double> taus);

/// Contrast factor k: the given percentile of the nonzero interior gradient
/// magnitudes of `smoothed`.
double contrast_factor(const Raster& smoothed, double percentile);

/// Features from the Hessian determinant of a FED-built nonlinear scale
/// space, with Haar-style orientation and the full M-LDB binary descriptor.
/// Throws InvalidArgument when the shorter side is below 32 pixels.
Features akaze_detect(const GrayImage& image, const AkazeParams& params = {});

}  // namespace coverscan
