#pragma once

#include <array>
#include <span>

namespace coverscan {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Invertible 3x3 projective transform acting on pixel coordinates.
class Homography {
 public:
  /// Identity.
  Homography();
  /// Row-major matrix; throws InvalidArgument when |det| <= 1e-12.
  explicit Homography(const std::array<double, 9>& m);

  static Homography translation(double dx, double dy);
  static Homography scaling(double sx, double sy);
  /// (x, y) -> (x cos a - y sin a, x sin a + y cos a) about the origin.
  static Homography rotation(double radians);
  /// Solves the exact homography taking src[i] to dst[i] for four point
  /// pairs; throws InvalidArgument on degenerate configurations.
  static Homography from_correspondences(std::span<const Point2, 4> src, std::span<const Point2, 4> dst);

  Point2 apply(Point2 p) const;
  Homography inverse() const;
  double determinant() const;
  const std::array<double, 9>& matrix() const { return m_; }

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend Homography operator*(const Homography& a, const Homography& b);

 private:
  std::array<double, 9> m_;
};

}  // namespace coverscan
