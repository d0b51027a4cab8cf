#include "detail/orientation.hpp"

#include <cmath>
#include <numbers>

namespace coverscan::detail {

float wrap_angle(double radians) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, kTwoPi);
  if (a < 0) a += kTwoPi;
  float f = static_cast<float>(a);
  if (f >= static_cast<float>(kTwoPi) || f < 0.0f) f = 0.0f;
  return f;
}

float positive_atan2(double y, double x) { return wrap_angle(std::atan2(y, x)); }

float sliding_window_orientation(std::span<const OrientationSample> samples) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  constexpr double kWindow = std::numbers::pi / 3.0;
  constexpr int kSteps = 72;

  double best = 0.0;
  double best_x = 0.0;
  double best_y = 0.0;
  for (int step = 0; step < kSteps; ++step) {
    const double lo = step * kTwoPi / kSteps;
    const double hi = lo + kWindow;
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& s : samples) {
      const double a = s.angle;
      // The window may wrap past 2pi.
      if ((a >= lo && a < hi) || (hi > kTwoPi && a < hi - kTwoPi)) {
        sx += s.dx;
        sy += s.dy;
      }
    }
    const double mag = sx * sx + sy * sy;
    if (mag > best) {
      best = mag;
      best_x = sx;
      best_y = sy;
    }
  }
  if (best <= 0.0) return 0.0f;
  return positive_atan2(best_y, best_x);
}

}  // namespace coverscan::detail
