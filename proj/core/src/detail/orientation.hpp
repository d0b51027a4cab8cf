#pragma once

#include <span>

namespace coverscan::detail {

/// One weighted derivative sample around a keypoint.
struct OrientationSample {
  float dx;
  float dy;
  float angle;  ///< atan2(dy, dx) in [0, 2pi)
};

/// Slides a pi/3 window around the circle in 5-degree steps and returns the
/// direction of the largest summed response vector, in [0, 2pi). Returns 0
/// when every window sums to zero.
float sliding_window_orientation(std::span<const OrientationSample> samples);

/// Maps any angle into [0, 2pi) as a float (guards the float rounding that
/// would otherwise produce exactly 2pi).
float wrap_angle(double radians);

/// atan2 mapped into [0, 2pi).
float positive_atan2(double y, double x);

}  // namespace coverscan::detail
