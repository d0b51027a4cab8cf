#include "coverscan/cover_synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "coverscan/error.hpp"

namespace coverscan {
namespace {

constexpr int kGlyphCount = 64;
constexpr std::uint64_t kAlphabetSeed = 0x5EEDF00DULL;

struct Stroke {
  float x0, y0, x1, y1;  // glyph units, x in [0,2], y in [0,3]
};
using Glyph = std::vector<Stroke>;

const std::vector<Glyph>& alphabet() {
  static const std::vector<Glyph> glyphs = [] {
    std::vector<Glyph> out(kGlyphCount);
    std::mt19937_64 rng(kAlphabetSeed);
    std::uniform_int_distribution<int> gx(0, 2);
    std::uniform_int_distribution<int> gy(0, 3);
    std::uniform_int_distribution<int> count(2, 4);
    for (auto& g : out) {
      const int n = count(rng);
      while (static_cast<int>(g.size()) < n) {
        Stroke s{static_cast<float>(gx(rng)), static_cast<float>(gy(rng)), static_cast<float>(gx(rng)),
                 static_cast<float>(gy(rng))};
        if (s.x0 == s.x1 && s.y0 == s.y1) continue;
        g.push_back(s);
      }
    }
    return out;
  }();
  return glyphs;
}

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h, 0.0f) {}

  int width() const { return w_; }
  int height() const { return h_; }
  float& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }

  template <class Shade>
  void fill_rect(double x0, double y0, double x1, double y1, Shade shade) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(w_, static_cast<int>(std::ceil(x1)));
    const int iy1 = std::min(h_, static_cast<int>(std::ceil(y1)));
    for (int y = iy0; y < iy1; ++y) {
      for (int x = ix0; x < ix1; ++x) at(x, y) = shade(x, y);
    }
  }

  template <class Shade>
  void fill_ellipse(double cx, double cy, double rx, double ry, Shade shade) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int ix1 = std::min(w_, static_cast<int>(std::ceil(cx + rx)));
    const int iy1 = std::min(h_, static_cast<int>(std::ceil(cy + ry)));
    for (int y = iy0; y < iy1; ++y) {
      for (int x = ix0; x < ix1; ++x) {
        const double u = (x + 0.5 - cx) / rx;
        const double v = (y + 0.5 - cy) / ry;
        if (u * u + v * v <= 1.0) at(x, y) = shade(x, y);
      }
    }
  }

  void stroke(double x0, double y0, double x1, double y1, double half_width, float value) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - half_width)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - half_width)));
    const int ix1 = std::min(w_, static_cast<int>(std::ceil(std::max(x0, x1) + half_width)));
    const int iy1 = std::min(h_, static_cast<int>(std::ceil(std::max(y0, y1) + half_width)));
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    for (int y = iy0; y < iy1; ++y) {
      for (int x = ix0; x < ix1; ++x) {
        const double px = x + 0.5 - x0;
        const double py = y + 0.5 - y0;
        const double t = std::clamp((px * dx + py * dy) / len2, 0.0, 1.0);
        const double ex = px - t * dx;
        const double ey = py - t * dy;
        if (ex * ex + ey * ey <= half_width * half_width) at(x, y) = value;
      }
    }
  }

  Raster downsample2() const {
    Raster out(w_ / 2, h_ / 2);
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        const std::size_t i = static_cast<std::size_t>(2 * y) * w_ + 2 * x;
        out(x, y) = 0.25f * (px_[i] + px_[i + 1] + px_[i + w_] + px_[i + w_ + 1]);
      }
    }
    return out;
  }

 private:
  int w_;
  int h_;
  std::vector<float> px_;
};

// Smooth value noise on a coarse lattice, bilinearly interpolated.
class ValueNoise {
 public:
  ValueNoise(int w, int h, double cell, std::mt19937_64& rng) : cell_(cell) {
    gw_ = static_cast<int>(std::ceil(w / cell)) + 2;
    gh_ = static_cast<int>(std::ceil(h / cell)) + 2;
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    lattice_.resize(static_cast<std::size_t>(gw_) * gh_);
    for (auto& v : lattice_) v = u(rng);
  }

  float operator()(double x, double y) const {
    const double gx = x / cell_;
    const double gy = y / cell_;
    const int x0 = static_cast<int>(gx);
    const int y0 = static_cast<int>(gy);
    const double fx = gx - x0;
    const double fy = gy - y0;
    const double sx = fx * fx * (3 - 2 * fx);
    const double sy = fy * fy * (3 - 2 * fy);
    auto l = [&](int i, int j) { return lattice_[static_cast<std::size_t>(j) * gw_ + i]; };
    const double top = l(x0, y0) + sx * (l(x0 + 1, y0) - l(x0, y0));
    const double bot = l(x0, y0 + 1) + sx * (l(x0 + 1, y0 + 1) - l(x0, y0 + 1));
    return static_cast<float>(top + sy * (bot - top));
  }

 private:
  double cell_;
  int gw_ = 0;
  int gh_ = 0;
  std::vector<float> lattice_;
};

}  // namespace

GrayImage synth_cover(int width, int height, std::uint64_t seed, const CoverStyle& style) {
  if (width < 32 || height < 32) throw InvalidArgument("cover must be at least 32x32");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Rendered at twice the size and box-averaged for anti-aliased edges.
  const int W = 2 * width;
  const int H = 2 * height;
  Canvas canvas(W, H);

  const double bg0 = uniform(0.15, 0.85);
  const double bg1 = uniform(0.15, 0.85);
  const double bg_angle = uniform(0.0, 2 * std::numbers::pi);
  const double bc = std::cos(bg_angle);
  const double bs = std::sin(bg_angle);
  const double span = std::abs(bc) * W + std::abs(bs) * H;
  canvas.fill_rect(0, 0, W, H, [&](int x, int y) {
    const double t = std::clamp(0.5 + ((x - W / 2.0) * bc + (y - H / 2.0) * bs) / span, 0.0, 1.0);
    return static_cast<float>(bg0 + (bg1 - bg0) * t);
  });

  const int diag = std::min(W, H);
  for (int i = 0; i < style.photo_panels; ++i) {
    // Photograph-like panel: 1/f value noise over five octaves.
    const double x0 = uniform(-0.1, 0.5) * W;
    const double y0 = uniform(-0.1, 0.5) * H;
    const double pw = uniform(0.4, 0.8) * W;
    const double ph = uniform(0.3, 0.7) * H;
    const double base = uniform(0.3, 0.7);
    std::vector<ValueNoise> layers;
    std::vector<double> weights;
    double total = 0;
    for (double cell = 96; cell >= 6; cell /= 2) {
      layers.emplace_back(W, H, cell, rng);
      weights.push_back(std::pow(cell, 0.7));
      total += weights.back();
    }
    canvas.fill_rect(x0, y0, x0 + pw, y0 + ph, [&](int x, int y) {
      double v = 0;
      for (std::size_t k = 0; k < layers.size(); ++k) v += weights[k] * layers[k](x, y);
      return static_cast<float>(std::clamp(base + style.photo_contrast * v / total, 0.0, 1.0));
    });
  }
  for (int i = 0; i < style.shapes; ++i) {
    const double cx = uniform(0, W);
    const double cy = uniform(0, H);
    const double rx = uniform(0.03, 0.22) * diag;
    const double ry = uniform(0.03, 0.22) * diag;
    const double base = uniform(0.05, 0.95);
    const int kind = static_cast<int>(unit(rng) * 3);
    if (kind == 0) {
      canvas.fill_rect(cx - rx, cy - ry, cx + rx, cy + ry, [&](int, int) { return static_cast<float>(base); });
    } else if (kind == 1) {
      canvas.fill_ellipse(cx, cy, rx, ry, [&](int, int) { return static_cast<float>(base); });
    } else {
      // Textured panel: a few oriented sinusoids over the shape.
      std::array<double, 9> w{};
      for (double& v : w) v = unit(rng);
      const double amp = uniform(0.08, 0.2);
      auto shade = [&, w](int x, int y) {
        double v = 0;
        for (int k = 0; k < 3; ++k) {
          const double f = 0.02 + 0.06 * w[3 * k];
          const double a = 2 * std::numbers::pi * w[3 * k + 1];
          v += std::sin(f * (x * std::cos(a) + y * std::sin(a)) + 6.28 * w[3 * k + 2]);
        }
        return static_cast<float>(std::clamp(base + amp * v, 0.0, 1.0));
      };
      if (unit(rng) < 0.5) {
        canvas.fill_rect(cx - rx, cy - ry, cx + rx, cy + ry, shade);
      } else {
        canvas.fill_ellipse(cx, cy, rx, ry, shade);
      }
    }
  }

  const auto& glyphs = alphabet();
  auto draw_line = [&](double y, double unit_size, int count) {
    const float ink = static_cast<float>(unit(rng) < 0.5 ? uniform(0.0, 0.2) : uniform(0.8, 1.0));
    const double half_width = 0.16 * unit_size;
    double x = uniform(0.03, 0.25) * W;
    for (int c = 0; c < count && x + 2 * unit_size < W; ++c) {
      const Glyph& g = glyphs[static_cast<std::size_t>(unit(rng) * kGlyphCount) % kGlyphCount];
      for (const Stroke& s : g) {
        canvas.stroke(x + s.x0 * unit_size, y + s.y0 * unit_size, x + s.x1 * unit_size, y + s.y1 * unit_size,
                      half_width, ink);
      }
      x += 3.0 * unit_size;
      if (unit(rng) < 0.15) x += 2 * unit_size;  // word gap
    }
  };
  for (int i = 0; i < style.title_lines; ++i) {
    const double size = uniform(0.025, 0.045) * diag;
    draw_line(uniform(0.05, 0.85) * H, size, 5 + static_cast<int>(unit(rng) * 8));
  }
  for (int i = 0; i < style.body_lines; ++i) {
    const double size = uniform(0.008, 0.014) * diag;
    draw_line(uniform(0.05, 0.95) * H, size, 20 + static_cast<int>(unit(rng) * 30));
  }

  Raster out = canvas.downsample2();
  if (style.grain > 0) {
    ValueNoise fine(width, height, 3.0, rng);
    ValueNoise coarse(width, height, 11.0, rng);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        out(x, y) += static_cast<float>(style.grain * (fine(x, y) + 0.7 * coarse(x, y)));
      }
    }
  }
  if (style.blur_sigma > 0) out = gaussian_blur(out, style.blur_sigma);
  return GrayImage::clamped(std::move(out));
}

}  // namespace coverscan
