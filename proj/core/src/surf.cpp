#include "coverscan/surf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "coverscan/error.hpp"
#include "detail/orientation.hpp"

namespace coverscan {
namespace {

constexpr double kScalePerFilter = 1.2 / 9.0;  // a 9x9 filter approximates sigma 1.2
constexpr float kDxyWeight = 0.81f;          // (0.9)^2 box-filter balance
constexpr int kOrientationRadius = 6;         // in units of scale
constexpr int kDescriptorHalfWindow = 10;     // 20s window
constexpr int kSubregions = 4;
constexpr int kSamplesPerSubregion = 5;

// Determinant-of-Hessian responses for one filter size on a sampling grid.
struct Layer {
  int filter = 0;
  int step = 0;
  int cols = 0;
  int rows = 0;
  std::vector<float> det;  // 0 where the filter does not fit

  float at(int c, int r) const { return det[static_cast<std::size_t>(r) * cols + c]; }
};

double box(const IntegralImage& ii, int row, int col, int rows, int cols) {
  return ii.box_sum_unchecked(col, row, col + cols - 1, row + rows - 1);
}

Layer compute_layer(const IntegralImage& ii, int filter, int step) {
  Layer layer;
  layer.filter = filter;
  layer.step = step;
  layer.cols = (ii.width() + step - 1) / step;
  layer.rows = (ii.height() + step - 1) / step;
  layer.det.assign(static_cast<std::size_t>(layer.cols) * layer.rows, 0.0f);

  const int lobe = filter / 3;
  const int half = (filter - 1) / 2;
  const double inv_area = 1.0 / (static_cast<double>(filter) * filter);
  for (int r = 0; r < layer.rows; ++r) {
    const int y = r * step;
    if (y - half < 0 || y + half >= ii.height()) continue;
    for (int c = 0; c < layer.cols; ++c) {
      const int x = c * step;
      if (x - half < 0 || x + half >= ii.width()) continue;
      const double dxx = box(ii, y - lobe + 1, x - half, 2 * lobe - 1, filter) -
                         3.0 * box(ii, y - lobe + 1, x - lobe / 2, 2 * lobe - 1, lobe);
      const double dyy = box(ii, y - half, x - lobe + 1, filter, 2 * lobe - 1) -
                         3.0 * box(ii, y - lobe / 2, x - lobe + 1, lobe, 2 * lobe - 1);
      const double dxy = box(ii, y - lobe, x + 1, lobe, lobe) + box(ii, y + 1, x - lobe, lobe, lobe) -
                         box(ii, y - lobe, x - lobe, lobe, lobe) - box(ii, y + 1, x + 1, lobe, lobe);
      const double nxx = dxx * inv_area;
      const double nyy = dyy * inv_area;
      const double nxy = dxy * inv_area;
      layer.det[static_cast<std::size_t>(r) * layer.cols + c] =
          static_cast<float>(nxx * nyy - kDxyWeight * nxy * nxy);
    }
  }
  return layer;
}

bool is_max_3x3x3(const Layer& below, const Layer& mid, const Layer& above, int c, int r) {
  const float v = mid.at(c, r);
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (below.at(c + dc, r + dr) >= v || above.at(c + dc, r + dr) >= v) return false;
      if ((dr != 0 || dc != 0) && mid.at(c + dc, r + dr) >= v) return false;
    }
  }
  return true;
}

struct Candidate {
  double x;
  double y;
  double scale;
  double response;
  int octave;
};

// Quadratic interpolation in (col, row, layer); false when the peak lies
// outside the unit cell.
bool interpolate(const Layer& below, const Layer& mid, const Layer& above, int c, int r, int octave, Candidate& out) {
  const double v = mid.at(c, r);
  const double dx = 0.5 * (mid.at(c + 1, r) - mid.at(c - 1, r));
  const double dy = 0.5 * (mid.at(c, r + 1) - mid.at(c, r - 1));
  const double ds = 0.5 * (above.at(c, r) - below.at(c, r));
  const double dxx = mid.at(c + 1, r) + mid.at(c - 1, r) - 2 * v;
  const double dyy = mid.at(c, r + 1) + mid.at(c, r - 1) - 2 * v;
  const double dss = above.at(c, r) + below.at(c, r) - 2 * v;
  const double dxy = 0.25 * (mid.at(c + 1, r + 1) - mid.at(c - 1, r + 1) - mid.at(c + 1, r - 1) + mid.at(c - 1, r - 1));
  const double dxs = 0.25 * (above.at(c + 1, r) - above.at(c - 1, r) - below.at(c + 1, r) + below.at(c - 1, r));
  const double dys = 0.25 * (above.at(c, r + 1) - above.at(c, r - 1) - below.at(c, r + 1) + below.at(c, r - 1));

  const double a = dxx, b = dxy, cc = dxs, d = dyy, f = dys, g = dss;
  const double det = a * (d * g - f * f) - b * (b * g - f * cc) + cc * (b * f - d * cc);
  if (std::abs(det) < 1e-30) return false;
  const double r0 = -dx, r1 = -dy, r2 = -ds;
  const double ox = (r0 * (d * g - f * f) - b * (r1 * g - f * r2) + cc * (r1 * f - d * r2)) / det;
  const double oy = (a * (r1 * g - f * r2) - r0 * (b * g - f * cc) + cc * (b * r2 - r1 * cc)) / det;
  const double os = (a * (d * r2 - r1 * f) - b * (b * r2 - r1 * cc) + r0 * (b * f - d * cc)) / det;
  if (std::abs(ox) >= 0.5 || std::abs(oy) >= 0.5 || std::abs(os) >= 0.5) return false;

  const double filter_step = mid.filter - below.filter;
  out.x = (c + ox) * mid.step;
  out.y = (r + oy) * mid.step;
  out.scale = kScalePerFilter * (mid.filter + os * filter_step);
  out.response = v;
  out.octave = octave;
  return true;
}

// Keypoints found in two octaves that describe the same blob collapse onto
// the stronger one.
std::vector<Candidate> suppress_cross_octave(std::vector<Candidate> cands) {
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.response > b.response; });
  constexpr double kCell = 16.0;
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  auto key = [](long long cx, long long cy) { return (cx << 32) ^ (cy & 0xffffffffLL); };
  std::vector<Candidate> kept;
  for (const auto& c : cands) {
    const long long cx = static_cast<long long>(std::floor(c.x / kCell));
    const long long cy = static_cast<long long>(std::floor(c.y / kCell));
    bool duplicate = false;
    for (long long gy = cy - 1; gy <= cy + 1 && !duplicate; ++gy) {
      for (long long gx = cx - 1; gx <= cx + 1 && !duplicate; ++gx) {
        auto it = grid.find(key(gx, gy));
        if (it == grid.end()) continue;
        for (std::size_t k : it->second) {
          const Candidate& o = kept[k];
          if (o.octave == c.octave) continue;
          const double ratio = std::max(o.scale, c.scale) / std::min(o.scale, c.scale);
          const double dist = std::hypot(o.x - c.x, o.y - c.y);
          if (ratio < 1.5 && dist < 0.5 * std::min(o.scale, c.scale)) {
            duplicate = true;
            break;
          }
        }
      }
    }
    if (duplicate) continue;
    grid[key(cx, cy)].push_back(kept.size());
    kept.push_back(c);
  }
  return kept;
}

// Haar responses of side `size` centred at (x, y); the caller guarantees the
// support lies inside the image.
inline double haar_x(const IntegralImage& ii, int y, int x, int size) {
  const int h = size / 2;
  return box(ii, y - h, x, size, h) - box(ii, y - h, x - h, size, h);
}

inline double haar_y(const IntegralImage& ii, int y, int x, int size) {
  const int h = size / 2;
  return box(ii, y, x - h, h, size) - box(ii, y - h, x - h, h, size);
}

float orientation(const IntegralImage& ii, double x, double y, double scale) {
  const int s = std::max(1, static_cast<int>(std::lround(scale)));
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  const double sigma = 2.5 * s;
  std::vector<detail::OrientationSample> samples;
  samples.reserve(113);
  for (int i = -kOrientationRadius; i <= kOrientationRadius; ++i) {
    for (int j = -kOrientationRadius; j <= kOrientationRadius; ++j) {
      if (i * i + j * j >= kOrientationRadius * kOrientationRadius) continue;
      const double w = std::exp(-((i * s) * (i * s) + (j * s) * (j * s)) / (2 * sigma * sigma));
      const double rx = w * haar_x(ii, cy + j * s, cx + i * s, 4 * s);
      const double ry = w * haar_y(ii, cy + j * s, cx + i * s, 4 * s);
      samples.push_back({static_cast<float>(rx), static_cast<float>(ry), detail::positive_atan2(ry, rx)});
    }
  }
  return detail::sliding_window_orientation(samples);
}

bool describe(const IntegralImage& ii, double x, double y, double scale, double angle, std::vector<float>& out) {
  const int s = std::max(1, static_cast<int>(std::lround(scale)));
  const double co = std::cos(angle);
  const double si = std::sin(angle);
  const double sigma = 3.3 * scale;
  out.assign(kSurfDescriptorLength, 0.0f);

  const double sub = kSamplesPerSubregion * scale;
  for (int i = 0; i < kSubregions; ++i) {
    for (int j = 0; j < kSubregions; ++j) {
      double sum_dx = 0, sum_dy = 0, abs_dx = 0, abs_dy = 0;
      for (int k = 0; k < kSamplesPerSubregion; ++k) {
        for (int l = 0; l < kSamplesPerSubregion; ++l) {
          // Sample centre in the keypoint frame: u along the orientation.
          const double u = -kDescriptorHalfWindow * scale + j * sub + (l + 0.5) * scale;
          const double v = -kDescriptorHalfWindow * scale + i * sub + (k + 0.5) * scale;
          const double px = x + u * co - v * si;
          const double py = y + u * si + v * co;
          const double w = std::exp(-(u * u + v * v) / (2 * sigma * sigma));
          const int sx = static_cast<int>(std::lround(px));
          const int sy = static_cast<int>(std::lround(py));
          const double rx = haar_x(ii, sy, sx, 2 * s);
          const double ry = haar_y(ii, sy, sx, 2 * s);
          const double du = w * (rx * co + ry * si);
          const double dv = w * (-rx * si + ry * co);
          sum_dx += du;
          sum_dy += dv;
          abs_dx += std::abs(du);
          abs_dy += std::abs(dv);
        }
      }
      float* cell = out.data() + (i * kSubregions + j) * 4;
      cell[0] = static_cast<float>(sum_dx);
      cell[1] = static_cast<float>(sum_dy);
      cell[2] = static_cast<float>(abs_dx);
      cell[3] = static_cast<float>(abs_dy);
    }
  }
  double norm = 0;
  for (float v : out) norm += static_cast<double>(v) * v;
  norm = std::sqrt(norm);
  if (!(norm > 0)) return false;
  for (float& v : out) v = static_cast<float>(v / norm);
  return true;
}

}  // namespace

void SurfParams::validate() const {
  if (octaves < 1 || layers_per_octave < 3 || !(hessian_threshold > 0)) {
    throw InvalidArgument("SURF needs octaves >= 1, layers >= 3 and a positive threshold");
  }
}

int surf_filter_size(int octave, int layer) { return 3 * ((1 << (octave + 1)) * (layer + 1) + 1); }

Features surf_detect(const GrayImage& image, const SurfParams& params) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (std::min(image.width(), image.height()) < 32) throw InvalidArgument("image too small for SURF (min side 32)");

  const IntegralImage ii(image.raster());
  std::vector<Candidate> candidates;
  const float threshold = static_cast<float>(params.hessian_threshold);

  for (int o = 0; o < params.octaves; ++o) {
    const int step = 1 << o;
    if (surf_filter_size(o, 0) >= std::min(image.width(), image.height())) break;
    std::vector<Layer> layers;
    layers.reserve(params.layers_per_octave);
    for (int l = 0; l < params.layers_per_octave; ++l) layers.push_back(compute_layer(ii, surf_filter_size(o, l), step));

    for (int l = 1; l + 1 < params.layers_per_octave; ++l) {
      const Layer& below = layers[l - 1];
      const Layer& mid = layers[l];
      const Layer& above = layers[l + 1];
      // Keep one sample of margin so the largest neighbour filter fits.
      const int margin = (above.filter / 2) / step + 1;
      for (int r = margin; r < mid.rows - margin; ++r) {
        for (int c = margin; c < mid.cols - margin; ++c) {
          if (mid.at(c, r) <= threshold || !is_max_3x3x3(below, mid, above, c, r)) continue;
          Candidate cand;
          if (interpolate(below, mid, above, c, r, o, cand)) candidates.push_back(cand);
        }
      }
    }
  }
  candidates = suppress_cross_octave(std::move(candidates));
  // Restore raster order for deterministic, location-sorted output.
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.octave != b.octave) return a.octave < b.octave;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  Features out;
  out.descriptors = DescriptorSet(DescriptorKind::Float, kSurfDescriptorLength);
  std::vector<float> desc;
  for (const auto& c : candidates) {
    const int s = std::max(1, static_cast<int>(std::lround(c.scale)));
    // Rotated 20s window plus the Haar support must stay inside the image.
    const int reach = static_cast<int>(std::ceil(kDescriptorHalfWindow * std::numbers::sqrt2 * c.scale)) + 2 * s + 2;
    const int cx = static_cast<int>(std::lround(c.x));
    const int cy = static_cast<int>(std::lround(c.y));
    if (cx - reach < 0 || cy - reach < 0 || cx + reach >= image.width() || cy + reach >= image.height()) continue;

    const float angle = orientation(ii, c.x, c.y, c.scale);
    if (!describe(ii, c.x, c.y, c.scale, angle, desc)) continue;
    Keypoint kp;
    kp.x = static_cast<float>(c.x);
    kp.y = static_cast<float>(c.y);
    kp.size = static_cast<float>(2.0 * c.scale);
    kp.angle = angle;
    kp.response = static_cast<float>(c.response);
    kp.octave = c.octave;
    out.keypoints.push_back(kp);
    out.descriptors.push_back_floats(desc);
  }

  out.extract_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace coverscan
