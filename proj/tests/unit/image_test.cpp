#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <vector>

#include "coverscan/error.hpp"
#include "coverscan/image.hpp"
#include "support.hpp"

namespace coverscan {
namespace {

using testing::random_image;
using testing::random_raster;
using testing::TempDir;

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> pgm_bytes(int w, int h, const std::vector<std::uint8_t>& px) {
  const std::string head = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

TEST(LoadImage, PgmScalesByMaxval) {
  TempDir dir("img");
  write_bytes(dir / "a.pgm", pgm_bytes(2, 2, {0, 255, 255, 0}));
  const GrayImage img = load_image(dir / "a.pgm");
  ASSERT_EQ(img.width(), 2);
  ASSERT_EQ(img.height(), 2);
  EXPECT_FLOAT_EQ(img(0, 0), 0.0f);
  EXPECT_FLOAT_EQ(img(1, 0), 1.0f);
  EXPECT_FLOAT_EQ(img(0, 1), 1.0f);
  EXPECT_FLOAT_EQ(img(1, 1), 0.0f);
}

TEST(LoadImage, PpmUsesLumaWeights) {
  TempDir dir("img");
  const std::string head = "P6\n1 1\n255\n";
  std::vector<std::uint8_t> bytes(head.begin(), head.end());
  bytes.insert(bytes.end(), {255, 0, 0});
  write_bytes(dir / "red.ppm", bytes);
  EXPECT_NEAR(load_image(dir / "red.ppm")(0, 0), 0.299, 1e-3);
}

TEST(LoadImage, PngGrayAndRgb) {
  TempDir dir("img");
  write_bytes(dir / "rgb.png",
              {0x89, 0x50, 0x4e, 0x47, 0xd,  0xa,  0x1a, 0xa,  0x0,  0x0,  0x0,  0xd,  0x49, 0x48, 0x44, 0x52,
               0x0,  0x0,  0x0,  0x2,  0x0,  0x0,  0x0,  0x1,  0x8,  0x2,  0x0,  0x0,  0x0,  0x7b, 0x40, 0xe8,
               0xdd, 0x0,  0x0,  0x0,  0xf,  0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
               0xc0, 0xf0, 0x1f, 0x0,  0x7,  0x0,  0x1,  0xff, 0x7e, 0x8,  0xb1, 0xd0, 0x0,  0x0,  0x0,  0x0,
               0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82});
  write_bytes(dir / "gray.png",
              {0x89, 0x50, 0x4e, 0x47, 0xd,  0xa,  0x1a, 0xa,  0x0,  0x0,  0x0,  0xd,  0x49, 0x48, 0x44, 0x52,
               0x0,  0x0,  0x0,  0x2,  0x0,  0x0,  0x0,  0x2,  0x8,  0x0,  0x0,  0x0,  0x0,  0x57, 0xdd, 0x52,
               0xf8, 0x0,  0x0,  0x0,  0xe,  0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0xf8, 0xcf, 0xf0,
               0x9f, 0x1,  0x0,  0x6,  0x0,  0x1,  0xff, 0x8f, 0xf1, 0xfc, 0x9a, 0x0,  0x0,  0x0,  0x0,  0x49,
               0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82});
  const GrayImage rgb = load_image(dir / "rgb.png");
  ASSERT_EQ(rgb.width(), 2);
  EXPECT_NEAR(rgb(0, 0), 0.299, 1e-3);
  EXPECT_NEAR(rgb(1, 0), 0.114, 1e-3);
  const GrayImage gray = load_image(dir / "gray.png");
  EXPECT_EQ(std::vector<float>(gray.data().begin(), gray.data().end()), (std::vector<float>{0, 1, 1, 0}));
}

TEST(LoadImage, RoundTripWithinOneLevel) {
  TempDir dir("img");
  const GrayImage img = random_image(16, 16, 7);
  save_pgm(img, dir / "r.pgm");
  const GrayImage back = load_image(dir / "r.pgm");
  ASSERT_EQ(back.width(), 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) EXPECT_LE(std::abs(back(x, y) - img(x, y)), 1.0f / 255.0f);
  }
}

TEST(LoadImage, Errors) {
  TempDir dir("img");
  EXPECT_THROW(load_image(dir / "missing.pgm"), IoError);
  write_bytes(dir / "junk.pgm", {'h', 'e', 'l', 'l', 'o'});
  EXPECT_THROW(load_image(dir / "junk.pgm"), FormatError);
  write_bytes(dir / "zero.pgm", pgm_bytes(0, 3, {}));
  EXPECT_THROW(load_image(dir / "zero.pgm"), FormatError);
  write_bytes(dir / "short.pgm", pgm_bytes(4, 4, {1, 2, 3}));
  EXPECT_THROW(load_image(dir / "short.pgm"), FormatError);
}

TEST(GrayImage, RejectsOutOfRange) {
  EXPECT_THROW(GrayImage::from_raster(Raster(2, 2, 1.5f)), InvalidArgument);
  EXPECT_FLOAT_EQ(GrayImage::clamped(Raster(2, 2, 1.5f))(1, 1), 1.0f);
}

TEST(IntegralImage, OnesAndTotal) {
  const IntegralImage ii = integral_image(Raster(2, 2, 1.0f));
  EXPECT_DOUBLE_EQ(ii.sum_upto(0, 0), 1);
  EXPECT_DOUBLE_EQ(ii.sum_upto(1, 0), 2);
  EXPECT_DOUBLE_EQ(ii.sum_upto(0, 1), 2);
  EXPECT_DOUBLE_EQ(ii.sum_upto(1, 1), 4);

  const Raster r = random_raster(13, 9, 3);
  double total = 0;
  for (float v : r.data()) total += v;
  EXPECT_NEAR(integral_image(r).total(), total, 1e-9);
}

TEST(IntegralImage, RectanglesMatchBruteForce) {
  std::mt19937 rng(11);
  for (int img = 0; img < 10; ++img) {
    const int w = 5 + img * 3;
    const int h = 7 + img * 2;
    const Raster r = random_raster(w, h, 100 + img);
    const IntegralImage ii = integral_image(r);
    for (int t = 0; t < 100; ++t) {
      int x0 = std::uniform_int_distribution<int>(0, w - 1)(rng);
      int x1 = std::uniform_int_distribution<int>(0, w - 1)(rng);
      int y0 = std::uniform_int_distribution<int>(0, h - 1)(rng);
      int y1 = std::uniform_int_distribution<int>(0, h - 1)(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      double brute = 0;
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) brute += r(x, y);
      }
      EXPECT_NEAR(box_sum(ii, x0, y0, x1, y1), brute, 1e-9 * std::max(1.0, brute));
    }
  }
}

TEST(IntegralImage, BoxSumEdgeCases) {
  const Raster r = random_raster(7, 5, 5);
  const IntegralImage ii = integral_image(r);
  EXPECT_NEAR(ii.box_sum(0, 0, 6, 4), ii.total(), 1e-12);
  EXPECT_NEAR(ii.box_sum(3, 2, 3, 2), r(3, 2), 1e-7);
  EXPECT_THROW(ii.box_sum(0, 0, 7, 4), InvalidArgument);
  EXPECT_THROW(ii.box_sum(-1, 0, 2, 2), InvalidArgument);
  EXPECT_THROW(ii.box_sum(3, 0, 2, 2), InvalidArgument);
}

TEST(GaussianBlur, ConstantAndImpulse) {
  const Raster flat(20, 20, 0.37f);
  const Raster blurred = gaussian_blur(flat, 2.3);
  for (float v : blurred.data()) EXPECT_NEAR(v, 0.37f, 1e-6);

  Raster impulse(41, 41, 0.0f);
  impulse(20, 20) = 1.0f;
  double sum = 0;
  const Raster spread = gaussian_blur(impulse, 1.5);
  for (float v : spread.data()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-6);

  double ksum = 0;
  const auto k = gaussian_kernel(1.4);
  EXPECT_EQ(k.size(), 2u * 5 + 1);  // radius ceil(4.2)
  for (float v : k) ksum += v;
  EXPECT_NEAR(ksum, 1.0, 1e-6);
}

TEST(GaussianBlur, Semigroup) {
  const Raster r = random_raster(64, 64, 21);
  const Raster twice = gaussian_blur(gaussian_blur(r, 1.2), 1.6);
  const Raster once = gaussian_blur(r, 2.0);
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> pos(16, 47);
  for (int i = 0; i < 200; ++i) {
    const int x = pos(rng);
    const int y = pos(rng);
    EXPECT_NEAR(twice(x, y), once(x, y), 2e-3);
  }
}

TEST(GaussianBlur, PreservesInteriorMean) {
  const Raster r = random_raster(80, 60, 8);
  const Raster b = gaussian_blur(r, 1.0);
  double in = 0;
  double out = 0;
  for (float v : r.data()) in += v;
  for (float v : b.data()) out += v;
  EXPECT_NEAR(in / r.size(), out / b.size(), 1e-3);
}

TEST(Downsample, DimensionsAndSampling) {
  const Raster r4(4, 4, 0.5f);
  const Raster d = downsample_half(r4);
  EXPECT_EQ(d.width(), 2);
  EXPECT_EQ(d.height(), 2);
  for (float v : d.data()) EXPECT_FLOAT_EQ(v, 0.5f);
  EXPECT_EQ(downsample_half(Raster(7, 5)).width(), 3);

  Raster checker(10, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 10; ++x) checker(x, y) = ((x + y) % 2 == 0) ? 1.0f : 0.0f;
  }
  const Raster sampled = downsample_half(checker);
  for (float v : sampled.data()) EXPECT_FLOAT_EQ(v, 1.0f);
  EXPECT_THROW(downsample_half(Raster(1, 4)), InvalidArgument);
}

TEST(Warp, IdentityAndTranslation) {
  const GrayImage img = random_image(30, 20, 9);
  const GrayImage same = warp_homography(img, Homography(), 30, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) EXPECT_NEAR(same(x, y), img(x, y), 1e-6);
  }
  const GrayImage shifted = warp_homography(img, Homography::translation(3, 0), 30, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 3; x < 30; ++x) EXPECT_NEAR(shifted(x, y), img(x - 3, y), 1e-6);
    EXPECT_EQ(shifted(0, y), 0.0f);
  }
}

TEST(Warp, CornersLandWhereHomographyPoints) {
  // A bright pixel at each corner must appear at the projected location.
  GrayImage src = GrayImage::from_raster([] {
    Raster r(40, 30, 0.0f);
    r(0, 0) = r(39, 0) = r(39, 29) = r(0, 29) = 1.0f;
    return r;
  }());
  const Homography h({1.1, 0.05, 12.0, -0.03, 0.95, 9.0, 0.0, 0.0, 1.0});
  const GrayImage out = warp_homography(src, h, 80, 60);
  for (Point2 c : {Point2{0, 0}, Point2{39, 0}, Point2{39, 29}, Point2{0, 29}}) {
    const Point2 p = h.apply(c);
    const int px = static_cast<int>(std::lround(p.x));
    const int py = static_cast<int>(std::lround(p.y));
    // The peak of the interpolated spot sits at the rounded projection.
    float best = 0;
    int bx = -1;
    int by = -1;
    for (int y = py - 2; y <= py + 2; ++y) {
      for (int x = px - 2; x <= px + 2; ++x) {
        if (out(x, y) > best) {
          best = out(x, y);
          bx = x;
          by = y;
        }
      }
    }
    EXPECT_GT(best, 0.3f);
    EXPECT_LE(std::abs(bx - p.x), 1.0);
    EXPECT_LE(std::abs(by - p.y), 1.0);
  }
}

TEST(Warp, InverseRestoresInterior) {
  const GrayImage img = gaussian_blur(random_image(60, 60, 12), 2.0);
  const Homography h = Homography::translation(30, 30) * Homography::rotation(0.3) *
                       Homography::scaling(1.1, 1.1) * Homography::translation(-30, -30);
  const GrayImage back = warp_homography(warp_homography(img, h, 60, 60), h.inverse(), 60, 60);
  for (int y = 20; y < 40; ++y) {
    for (int x = 20; x < 40; ++x) EXPECT_NEAR(back(x, y), img(x, y), 2.0 / 255.0);
  }
}

TEST(Sobel, ConstantStepAndRamp) {
  const Gradient flat = sobel_gradient(Raster(10, 10, 0.4f));
  for (float v : flat.gx.data()) EXPECT_EQ(v, 0.0f);
  for (float v : flat.gy.data()) EXPECT_EQ(v, 0.0f);

  Raster step(10, 10, 0.0f);
  for (int y = 0; y < 10; ++y) {
    for (int x = 5; x < 10; ++x) step(x, y) = 1.0f;
  }
  const Gradient sg = sobel_gradient(step);
  EXPECT_GT(sg.gx(4, 5), 0.0f);
  EXPECT_GT(sg.gx(5, 5), 0.0f);
  for (int y = 1; y < 9; ++y) {
    for (int x = 1; x < 9; ++x) EXPECT_EQ(sg.gy(x, y), 0.0f);
  }

  const int w = 32;
  Raster ramp(w, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < w; ++x) ramp(x, y) = static_cast<float>(x) / w;
  }
  const Gradient rg = sobel_gradient(ramp);
  for (int y = 1; y < 15; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      const double fd = (ramp(x + 1, y) - ramp(x - 1, y)) / 2.0;
      EXPECT_NEAR(rg.gx(x, y), fd, 1e-6);
      EXPECT_NEAR(rg.gy(x, y), 0.0, 1e-6);
    }
  }
}

TEST(ImageOps, Deterministic) {
  const Raster r = random_raster(50, 40, 77);
  EXPECT_EQ(gaussian_blur(r, 1.7), gaussian_blur(r, 1.7));
  EXPECT_EQ(sobel_gradient(r).gx, sobel_gradient(r).gx);
  EXPECT_EQ(resize_bilinear(r, 33, 21), resize_bilinear(r, 33, 21));
}

TEST(Homography, ComposeInvertSolve) {
  const Homography a = Homography::rotation(0.4) * Homography::translation(3, -2);
  const Point2 p{5, 7};
  const Point2 q = a.apply(p);
  const Point2 back = a.inverse().apply(q);
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);

  const std::array<Point2, 4> src{{{0, 0}, {99, 0}, {99, 79}, {0, 79}}};
  const std::array<Point2, 4> dst{{{4, 6}, {101, -3}, {95, 90}, {-2, 77}}};
  const Homography h = Homography::from_correspondences(src, dst);
  for (int i = 0; i < 4; ++i) {
    const Point2 m = h.apply(src[i]);
    EXPECT_NEAR(m.x, dst[i].x, 1e-9);
    EXPECT_NEAR(m.y, dst[i].y, 1e-9);
  }
  EXPECT_THROW(Homography({1, 2, 3, 2, 4, 6, 0, 0, 1}), InvalidArgument);
  const std::array<Point2, 4> line{{{0, 0}, {1, 1}, {2, 2}, {3, 3}}};
  EXPECT_THROW(Homography::from_correspondences(line, dst), InvalidArgument);
}

}  // namespace
}  // namespace coverscan
