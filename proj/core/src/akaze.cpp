#include "coverscan/akaze.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "coverscan/error.hpp"
#include "detail/orientation.hpp"

namespace coverscan {
namespace {

constexpr double kBaseSigma = 1.6;
constexpr double kDerivativeFactor = 1.5;
constexpr double kTauMax = 0.25;
constexpr double kOctaveContrastDecay = 0.75;
constexpr int kPatternSize = 10;
constexpr int kMinLevelSide = 32;
constexpr int kOrientationRadius = 6;

struct Level {
  int octave = 0;
  int sublevel = 0;
  double sigma = 0;  // absolute, level-0 pixels
  int deriv_step = 1;
  Raster image;      // evolution image Lt
  Raster lx, ly;     // scale-normalised first derivatives
  Raster det;        // scale-normalised Hessian determinant
};

// 2x2 box average; the anti-aliased half-size image between octaves.
Raster halfsample(const Raster& in) {
  const int w = in.width() / 2;
  const int h = in.height() / 2;
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    const float* r0 = in.row(2 * y);
    const float* r1 = in.row(2 * y + 1);
    float* dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = 0.25f * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
  }
  return out;
}

// Scaled Scharr derivative: central difference at spacing `step`, smoothed
// across the other axis with weights 3/16, 10/16, 3/16 at the same spacing.
Raster derivative(const Raster& in, int step, bool along_x) {
  const int w = in.width();
  const int h = in.height();
  Raster diff(w, h);
  const float inv = 1.0f / (2.0f * step);
  for (int y = 0; y < h; ++y) {
    float* dst = diff.row(y);
    if (along_x) {
      for (int x = 0; x < w; ++x) dst[x] = (in.clamped(x + step, y) - in.clamped(x - step, y)) * inv;
    } else {
      const float* down = in.row(std::min(y + step, h - 1));
      const float* up = in.row(std::max(y - step, 0));
      for (int x = 0; x < w; ++x) dst[x] = (down[x] - up[x]) * inv;
    }
  }
  constexpr float kSide = 3.0f / 16.0f;
  constexpr float kCentre = 10.0f / 16.0f;
  Raster out(w, h);
  for (int y = 0; y < h; ++y) {
    float* dst = out.row(y);
    if (along_x) {
      const float* up = diff.row(std::max(y - step, 0));
      const float* mid = diff.row(y);
      const float* down = diff.row(std::min(y + step, h - 1));
      for (int x = 0; x < w; ++x) dst[x] = kSide * (up[x] + down[x]) + kCentre * mid[x];
    } else {
      for (int x = 0; x < w; ++x) {
        dst[x] = kSide * (diff.clamped(x - step, y) + diff.clamped(x + step, y)) + kCentre * diff(x, y);
      }
    }
  }
  return out;
}

void compute_responses(Level& level) {
  const Raster smooth = gaussian_blur(level.image, 1.0);
  const int s = level.deriv_step;
  Raster lx = derivative(smooth, s, true);
  Raster ly = derivative(smooth, s, false);
  const Raster lxx = derivative(lx, s, true);
  const Raster lxy = derivative(lx, s, false);
  const Raster lyy = derivative(ly, s, false);

  const float s2 = static_cast<float>(s) * s;
  level.det = Raster(smooth.width(), smooth.height());
  auto det = level.det.data();
  auto xx = lxx.data();
  auto yy = lyy.data();
  auto xy = lxy.data();
  for (std::size_t i = 0; i < det.size(); ++i) det[i] = (xx[i] * yy[i] - xy[i] * xy[i]) * s2 * s2;
  for (float& v : lx.data()) v *= static_cast<float>(s);
  for (float& v : ly.data()) v *= static_cast<float>(s);
  level.lx = std::move(lx);
  level.ly = std::move(ly);
}

std::vector<Level> build_scale_space(const GrayImage& image, const AkazeParams& p) {
  std::vector<Level> levels;
  const Raster base = gaussian_blur(image.raster(), kBaseSigma);
  double k = contrast_factor(gaussian_blur(image.raster(), 1.0), p.contrast_percentile);

  for (int o = 0; o < p.octaves; ++o) {
    if (o > 0) {
      const Raster& prev = levels.back().image;
      if (std::min(prev.width(), prev.height()) / 2 < kMinLevelSide) break;
      k *= kOctaveContrastDecay;
    }
    for (int s = 0; s < p.sublevels; ++s) {
      Level level;
      level.octave = o;
      level.sublevel = s;
      level.sigma = kBaseSigma * std::pow(2.0, o + static_cast<double>(s) / p.sublevels);
      level.deriv_step = std::max(1, static_cast<int>(std::lround(level.sigma * kDerivativeFactor / std::ldexp(1.0, o))));

      if (levels.empty()) {
        level.image = base;
      } else {
        const Level& prev = levels.back();
        Raster start = s == 0 ? halfsample(prev.image) : prev.image;
        const Gradient grad = sobel_gradient(gaussian_blur(start, 1.0));
        const Raster g = g2_conductivity(grad.gx, grad.gy, k);
        const double dt = 0.5 * (level.sigma * level.sigma - prev.sigma * prev.sigma);
        const std::vector<double> taus = fed_step_sizes(dt, kTauMax);
        level.image = fed_cycle(std::move(start), g, taus);
      }
      compute_responses(level);
      levels.push_back(std::move(level));
    }
  }
  return levels;
}

struct Candidate {
  int level;
  double x;  // level coordinates
  double y;
  double response;
  double x0;  // level-0 coordinates
  double y0;
};

bool spatial_max(const Raster& det, int x, int y, float v) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if ((dx || dy) && det(x + dx, y + dy) >= v) return false;
    }
  }
  return true;
}

bool neighbour_below(const Raster& det, int x, int y, float v) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (det(x + dx, y + dy) >= v) return false;
    }
  }
  return true;
}

std::vector<Candidate> find_extrema(const std::vector<Level>& levels, const AkazeParams& p) {
  std::vector<Candidate> out;
  const float threshold = static_cast<float>(p.detector_threshold);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const Level& lv = levels[i];
    const double ratio = std::ldexp(1.0, lv.octave);
    // Rotated descriptor pattern at the derivative scale must stay inside.
    const int border = static_cast<int>(std::ceil(kPatternSize * lv.deriv_step * std::numbers::sqrt2)) + 1;
    const Raster& det = lv.det;
    const bool has_below = i > 0 && levels[i - 1].octave == lv.octave;
    const bool has_above = i + 1 < levels.size() && levels[i + 1].octave == lv.octave;
    for (int y = border; y < det.height() - border; ++y) {
      for (int x = border; x < det.width() - border; ++x) {
        const float v = det(x, y);
        if (v <= threshold || !spatial_max(det, x, y, v)) continue;
        if (has_below && !neighbour_below(levels[i - 1].det, x, y, v)) continue;
        if (has_above && !neighbour_below(levels[i + 1].det, x, y, v)) continue;

        // 2-D quadratic refinement on the determinant.
        const double dx = 0.5 * (det(x + 1, y) - det(x - 1, y));
        const double dy = 0.5 * (det(x, y + 1) - det(x, y - 1));
        const double dxx = det(x + 1, y) + det(x - 1, y) - 2.0 * v;
        const double dyy = det(x, y + 1) + det(x, y - 1) - 2.0 * v;
        const double dxy = 0.25 * (det(x + 1, y + 1) + det(x - 1, y - 1) - det(x - 1, y + 1) - det(x + 1, y - 1));
        const double hd = dxx * dyy - dxy * dxy;
        if (std::abs(hd) < 1e-20) continue;
        const double ox = -(dyy * dx - dxy * dy) / hd;
        const double oy = -(dxx * dy - dxy * dx) / hd;
        if (std::abs(ox) > 1.0 || std::abs(oy) > 1.0) continue;

        Candidate c;
        c.level = static_cast<int>(i);
        c.x = x + ox;
        c.y = y + oy;
        c.response = v;
        c.x0 = (c.x + 0.5) * ratio - 0.5;
        c.y0 = (c.y + 0.5) * ratio - 0.5;
        out.push_back(c);
      }
    }
  }
  return out;
}

// Greedy suppression in response order: a candidate closer than the
// derivative radius to a stronger one in the same or an adjacent level is
// dropped. Distances are measured in level-0 pixels so the rule also holds
// across octave seams.
std::vector<Candidate> suppress_neighbours(std::vector<Candidate> cands, const std::vector<Level>& levels) {
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cands[a].response > cands[b].response; });
  constexpr double kCell = 64.0;
  auto radius = [&](const Candidate& c) {
    const Level& lv = levels[c.level];
    return lv.deriv_step * std::ldexp(1.0, lv.octave);
  };
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  auto key = [](long long cx, long long cy) { return (cx << 32) ^ (cy & 0xffffffffLL); };
  std::vector<bool> keep(cands.size(), false);
  for (std::size_t idx : order) {
    const Candidate& c = cands[idx];
    const long long cx = static_cast<long long>(std::floor(c.x0 / kCell));
    const long long cy = static_cast<long long>(std::floor(c.y0 / kCell));
    bool suppressed = false;
    for (long long gy = cy - 1; gy <= cy + 1 && !suppressed; ++gy) {
      for (long long gx = cx - 1; gx <= cx + 1 && !suppressed; ++gx) {
        auto it = grid.find(key(gx, gy));
        if (it == grid.end()) continue;
        for (std::size_t k : it->second) {
          const Candidate& o = cands[k];
          if (std::abs(o.level - c.level) > 1) continue;
          if (std::hypot(o.x0 - c.x0, o.y0 - c.y0) < std::max(radius(o), radius(c))) {
            suppressed = true;
            break;
          }
        }
      }
    }
    if (suppressed) continue;
    keep[idx] = true;
    grid[key(cx, cy)].push_back(idx);
  }
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (keep[i]) out.push_back(cands[i]);
  }
  return out;
}

float orientation(const Level& lv, double x, double y, int s) {
  const int cx = static_cast<int>(std::lround(x));
  const int cy = static_cast<int>(std::lround(y));
  const double sigma = 2.5 * s;
  std::vector<detail::OrientationSample> samples;
  samples.reserve(113);
  for (int i = -kOrientationRadius; i <= kOrientationRadius; ++i) {
    for (int j = -kOrientationRadius; j <= kOrientationRadius; ++j) {
      if (i * i + j * j >= kOrientationRadius * kOrientationRadius) continue;
      const int px = cx + i * s;
      const int py = cy + j * s;
      const double w = std::exp(-((i * s) * (i * s) + (j * s) * (j * s)) / (2 * sigma * sigma));
      const double rx = w * lv.lx(px, py);
      const double ry = w * lv.ly(px, py);
      samples.push_back({static_cast<float>(rx), static_cast<float>(ry), detail::positive_atan2(ry, rx)});
    }
  }
  return detail::sliding_window_orientation(samples);
}

void mldb_descriptor(const Level& lv, double x, double y, int scale, double angle, int channels, Descriptor& d) {
  const double co = std::cos(angle);
  const double si = std::sin(angle);
  static constexpr std::array<int, 3> kSteps = {kPatternSize, (2 * kPatternSize + 2) / 3, (kPatternSize + 1) / 2};
  std::array<float, 3 * 16> values{};
  int bit = 0;
  for (int step : kSteps) {
    int cells = 0;
    for (int i = -kPatternSize; i < kPatternSize; i += step) {
      for (int j = -kPatternSize; j < kPatternSize; j += step) {
        double di = 0, dx = 0, dy = 0;
        int n = 0;
        for (int u = i; u < std::min(i + step, kPatternSize); ++u) {
          for (int v = j; v < std::min(j + step, kPatternSize); ++v) {
            // u runs along the keypoint orientation, v across it.
            const int sx = static_cast<int>(std::lround(x + (u * co - v * si) * scale));
            const int sy = static_cast<int>(std::lround(y + (u * si + v * co) * scale));
            const double rx = lv.lx(sx, sy);
            const double ry = lv.ly(sx, sy);
            di += lv.image(sx, sy);
            dx += rx * co + ry * si;
            dy += -rx * si + ry * co;
            ++n;
          }
        }
        values[3 * cells + 0] = static_cast<float>(di / n);
        values[3 * cells + 1] = static_cast<float>(dx / n);
        values[3 * cells + 2] = static_cast<float>(dy / n);
        ++cells;
      }
    }
    for (int a = 0; a < cells; ++a) {
      for (int b = a + 1; b < cells; ++b) {
        for (int ch = 0; ch < channels; ++ch) d.set_bit(bit++, values[3 * a + ch] > values[3 * b + ch]);
      }
    }
  }
}

}  // namespace

void AkazeParams::validate() const {
  if (octaves < 1 || sublevels < 1) throw InvalidArgument("AKAZE octaves and sublevels must be positive");
  if (!(contrast_percentile > 0 && contrast_percentile < 1)) {
    throw InvalidArgument("AKAZE contrast_percentile must lie in (0,1)");
  }
  if (!(detector_threshold > 0)) throw InvalidArgument("AKAZE detector_threshold must be positive");
  if (descriptor_channels < 1 || descriptor_channels > 3) throw InvalidArgument("AKAZE descriptor_channels must be 1..3");
}

int mldb_bits(int channels) { return channels * (6 + 36 + 120); }

Features akaze_detect(const GrayImage& image, const AkazeParams& params) {
  const auto start = std::chrono::steady_clock::now();
  params.validate();
  if (std::min(image.width(), image.height()) < 32) throw InvalidArgument("image too small for AKAZE (min side 32)");

  const std::vector<Level> levels = build_scale_space(image, params);
  std::vector<Candidate> cands = suppress_neighbours(find_extrema(levels, params), levels);

  const int bits = mldb_bits(params.descriptor_channels);
  Features out;
  out.descriptors = DescriptorSet(DescriptorKind::Binary, bits);
  for (const auto& c : cands) {
    const Level& lv = levels[c.level];
    const double ratio = std::ldexp(1.0, lv.octave);
    const int s = std::max(1, static_cast<int>(std::lround(0.5 * kDerivativeFactor * lv.sigma / ratio)));
    const float angle = orientation(lv, c.x, c.y, s);
    Descriptor d = Descriptor::bit_string(bits);
    mldb_descriptor(lv, c.x, c.y, s, angle, params.descriptor_channels, d);

    Keypoint kp;
    kp.x = static_cast<float>(c.x0);
    kp.y = static_cast<float>(c.y0);
    if (kp.x < 0 || kp.y < 0 || kp.x >= image.width() || kp.y >= image.height()) continue;
    kp.size = static_cast<float>(kDerivativeFactor * lv.sigma);
    kp.angle = angle;
    kp.response = static_cast<float>(c.response);
    kp.octave = lv.octave;
    out.keypoints.push_back(kp);
    out.descriptors.push_back(d);
  }

  out.extract_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace coverscan
