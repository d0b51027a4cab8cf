#include "coverscan/homography.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "coverscan/error.hpp"

namespace coverscan {
namespace {
constexpr double kMinDeterminant = 1e-12;

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}
}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  const double det = det3(m_);
  if (!(std::abs(det) > kMinDeterminant)) throw InvalidArgument("singular homography");
}

Homography Homography::translation(double dx, double dy) { return Homography({1, 0, dx, 0, 1, dy, 0, 0, 1}); }

Homography Homography::scaling(double sx, double sy) { return Homography({sx, 0, 0, 0, sy, 0, 0, 0, 1}); }

Homography Homography::rotation(double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return Homography({c, -s, 0, s, c, 0, 0, 0, 1});
}

Homography Homography::from_correspondences(std::span<const Point2, 4> src, std::span<const Point2, 4> dst) {
  // h33 fixed to 1; eight unknowns, two equations per correspondence.
  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (lu.rank() < 8) throw InvalidArgument("degenerate point configuration for homography");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  return Homography({h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0});
}

Point2 Homography::apply(Point2 p) const {
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w, (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
}

double Homography::determinant() const { return det3(m_); }

Homography Homography::inverse() const {
  const auto& m = m_;
  const double det = det3(m);
  const double inv = 1.0 / det;
  return Homography({(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv,
                     (m[1] * m[5] - m[2] * m[4]) * inv, (m[5] * m[6] - m[3] * m[8]) * inv,
                     (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
                     (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv,
                     (m[0] * m[4] - m[1] * m[3]) * inv});
}

Homography operator*(const Homography& a, const Homography& b) {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.m_[3 * i + k] * b.m_[3 * k + j];
      r[3 * i + j] = s;
    }
  }
  return Homography(r);
}

}  // namespace coverscan
