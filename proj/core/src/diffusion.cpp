#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "coverscan/akaze.hpp"
#include "coverscan/error.hpp"

namespace coverscan {

Raster g2_conductivity(const Raster& gx, const Raster& gy, double k) {
  if (!(k > 0)) throw InvalidArgument("contrast factor must be positive");
  if (gx.width() != gy.width() || gx.height() != gy.height()) {
    throw InvalidArgument("gradient rasters differ in size");
  }
  Raster g(gx.width(), gx.height());
  const double inv_k2 = 1.0 / (k * k);
  auto ax = gx.data();
  auto ay = gy.data();
  auto out = g.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double m2 = static_cast<double>(ax[i]) * ax[i] + static_cast<double>(ay[i]) * ay[i];
    out[i] = static_cast<float>(1.0 / (1.0 + m2 * inv_k2));
  }
  return g;
}

Raster fed_diffusion_step(const Raster& L, const Raster& g, double tau) {
  if (L.width() != g.width() || L.height() != g.height()) {
    throw InvalidArgument("image and conductivity differ in size");
  }
  if (!(tau > 0)) throw InvalidArgument("diffusion step size must be positive");
  const int w = L.width();
  const int h = L.height();
  Raster out(w, h);
  const float half_tau = static_cast<float>(0.5 * tau);
  for (int y = 0; y < h; ++y) {
    const float* lc = L.row(y);
    const float* gc = g.row(y);
    const float* lu = L.row(std::max(y - 1, 0));
    const float* gu = g.row(std::max(y - 1, 0));
    const float* ld = L.row(std::min(y + 1, h - 1));
    const float* gd = g.row(std::min(y + 1, h - 1));
    float* dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      // Border neighbours replicate the centre, so flux across the edge is 0.
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      const float xpos = (gc[x] + gc[xr]) * (lc[xr] - lc[x]);
      const float xneg = (gc[xl] + gc[x]) * (lc[x] - lc[xl]);
      const float ypos = (gc[x] + gd[x]) * (ld[x] - lc[x]);
      const float yneg = (gu[x] + gc[x]) * (lc[x] - lu[x]);
      dst[x] = lc[x] + half_tau * (xpos - xneg + ypos - yneg);
    }
  }
  return out;
}

std::vector<double> fed_step_sizes(double total_time, double tau_max) {
  if (!(total_time > 0) || !(tau_max > 0)) throw InvalidArgument("FED times must be positive");
  const int n = static_cast<int>(std::ceil(std::sqrt(3.0 * total_time / tau_max + 0.25) - 0.5 - 1e-8));
  const int steps = std::max(n, 1);
  const double cycle_time = tau_max * (static_cast<double>(steps) * steps + steps) / 3.0;
  const double scale = total_time / cycle_time;
  std::vector<double> taus(steps);
  const double c = 1.0 / (4.0 * steps + 2.0);
  for (int i = 0; i < steps; ++i) {
    const double h = std::cos(std::numbers::pi * (2.0 * i + 1.0) * c);
    taus[i] = scale * tau_max / (2.0 * h * h);
  }
  return taus;
}

Raster fed_cycle(Raster L, const Raster& g, std::span<const double> taus) {
  for (double tau : taus) L = fed_diffusion_step(L, g, tau);
  return L;
}

double contrast_factor(const Raster& smoothed, double percentile) {
  if (!(percentile > 0 && percentile < 1)) throw InvalidArgument("contrast percentile must lie in (0,1)");
  const Gradient grad = sobel_gradient(smoothed);
  std::vector<float> mags;
  mags.reserve(smoothed.size());
  for (int y = 1; y < smoothed.height() - 1; ++y) {
    for (int x = 1; x < smoothed.width() - 1; ++x) {
      const float m = std::hypot(grad.gx(x, y), grad.gy(x, y));
      if (m > 0.0f) mags.push_back(m);
    }
  }
  if (mags.empty()) return 1.0;
  const std::size_t idx = std::min(mags.size() - 1, static_cast<std::size_t>(percentile * mags.size()));
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(idx), mags.end());
  return std::max(static_cast<double>(mags[idx]), 1e-6);
}

}  // namespace coverscan
