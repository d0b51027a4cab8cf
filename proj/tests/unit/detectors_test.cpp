#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "coverscan/akaze.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/error.hpp"
#include "coverscan/matching.hpp"
#include "coverscan/orb.hpp"
#include "coverscan/sift.hpp"
#include "coverscan/surf.hpp"
#include "coverscan/transforms.hpp"
#include "support.hpp"

namespace coverscan {
namespace {

using testing::cover;
using testing::random_raster;

// Share of reference keypoints projecting inside the test image that have a
// test keypoint within `tol` pixels.
double repeatability(const Features& ref, const Features& test, const Homography& h, int w, int h_px,
                     double tol = 3.0) {
  int inside = 0;
  int hit = 0;
  for (const Keypoint& k : ref.keypoints) {
    const Point2 p = h.apply({k.x, k.y});
    if (p.x < 0 || p.y < 0 || p.x > w - 1 || p.y > h_px - 1) continue;
    ++inside;
    for (const Keypoint& t : test.keypoints) {
      if (std::hypot(t.x - p.x, t.y - p.y) <= tol) {
        ++hit;
        break;
      }
    }
  }
  return inside == 0 ? 0.0 : static_cast<double>(hit) / inside;
}

// Share of NNDR-retained matches whose reference keypoint maps within `tol`
// pixels of the matched test keypoint.
double correct_match_share(const Features& test, const Features& ref, const Homography& h, double tol = 3.0) {
  const MatchSet m = match_2nn_nndr(test.descriptors, ref.descriptors, 0.8);
  int good = 0;
  for (const Match& p : m.pairs) {
    const Keypoint& r = ref.keypoints[p.reference];
    const Keypoint& t = test.keypoints[p.query];
    const Point2 q = h.apply({r.x, r.y});
    if (std::hypot(q.x - t.x, q.y - t.y) <= tol) ++good;
  }
  return m.pairs.empty() ? 0.0 : static_cast<double>(good) / m.pairs.size();
}

void expect_in_bounds(const Features& f, const GrayImage& img) {
  ASSERT_EQ(f.keypoints.size(), f.descriptors.size());
  for (const Keypoint& k : f.keypoints) {
    EXPECT_GE(k.x, 0.0f);
    EXPECT_GE(k.y, 0.0f);
    EXPECT_LT(k.x, img.width());
    EXPECT_LT(k.y, img.height());
    EXPECT_GT(k.size, 0.0f);
    EXPECT_GE(k.response, 0.0f);
    EXPECT_GE(k.octave, 0);
    if (k.angle != kUndefinedAngle) {
      EXPECT_GE(k.angle, 0.0f);
      EXPECT_LT(k.angle, 2 * std::numbers::pi);
    }
  }
}

bool same_features(const Features& a, const Features& b) {
  return a.keypoints == b.keypoints && a.descriptors == b.descriptors;
}

class EveryDetector : public ::testing::TestWithParam<DetectorKind> {};

TEST_P(EveryDetector, ConstantImageHasNoKeypoints) {
  const Features f = extract_features(GrayImage(96, 96, 0.5f), DetectorConfig(GetParam()));
  EXPECT_EQ(f.size(), 0u);
  EXPECT_EQ(f.descriptors.size(), 0u);
}

TEST_P(EveryDetector, TinyImageRejected) {
  EXPECT_THROW(extract_features(GrayImage(31, 64, 0.5f), DetectorConfig(GetParam())), InvalidArgument);
}

TEST_P(EveryDetector, ContractOnCover) {
  const GrayImage img = cover(3);
  const DetectorConfig cfg(GetParam());
  const Features f = extract_features(img, cfg);
  ASSERT_GT(f.size(), 50u);
  expect_in_bounds(f, img);
  EXPECT_EQ(f.descriptors.kind(), cfg.descriptor_kind());
  EXPECT_EQ(f.descriptors.length(), cfg.descriptor_length());
  EXPECT_GE(f.extract_time, 0.0);
  EXPECT_TRUE(same_features(f, extract_features(img, cfg)));
}

INSTANTIATE_TEST_SUITE_P(All, EveryDetector, ::testing::ValuesIn(kAllDetectors),
                         [](const auto& info) { return std::string(detector_name(info.param)); });

TEST(Sift, DescriptorNormAndClamp) {
  const Features f = sift_detect(cover(4));
  ASSERT_GT(f.size(), 0u);
  EXPECT_EQ(f.descriptors.length(), kSiftDescriptorLength);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double n2 = 0;
    for (float v : f.descriptors.float_row(i)) {
      EXPECT_LE(v, 0.2f + 1e-6f);
      EXPECT_GE(v, 0.0f);
      n2 += static_cast<double>(v) * v;
    }
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-3);
  }
}

TEST(Sift, RepeatableUnderRotation90) {
  const GrayImage img = cover(5);
  const TransformResult rot = apply_transform(img, TransformKind::Rotate90);
  const Features a = sift_detect(img);
  const Features b = sift_detect(rot.image);
  EXPECT_GE(repeatability(a, b, rot.homography, rot.image.width(), rot.image.height()), 0.5);
  EXPECT_GE(correct_match_share(b, a, rot.homography), 0.5);
}

TEST(Sift, DuplicateOrientationsShareLocation) {
  const Features f = sift_detect(cover(6));
  int dup = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    const Keypoint& a = f.keypoints[i - 1];
    const Keypoint& b = f.keypoints[i];
    if (a.x == b.x && a.y == b.y && a.size == b.size) {
      EXPECT_NE(a.angle, b.angle);
      ++dup;
    }
  }
  EXPECT_GT(dup, 0);
}

TEST(Sift, ParamsValidated) {
  SiftParams p;
  p.edge_ratio = 1.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.octaves = 0;
  EXPECT_THROW(sift_detect(cover(1), p), InvalidArgument);
}

TEST(Surf, FilterSizes) {
  EXPECT_EQ(surf_filter_size(0, 0), 9);
  EXPECT_EQ(surf_filter_size(0, 1), 15);
  EXPECT_EQ(surf_filter_size(0, 2), 21);
  EXPECT_EQ(surf_filter_size(0, 3), 27);
  EXPECT_EQ(surf_filter_size(1, 0), 15);
  EXPECT_EQ(surf_filter_size(1, 1), 27);
  EXPECT_EQ(surf_filter_size(1, 3), 51);
}

TEST(Surf, DescriptorUnitNorm) {
  const Features f = surf_detect(cover(7));
  ASSERT_GT(f.size(), 0u);
  EXPECT_EQ(f.descriptors.length(), kSurfDescriptorLength);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double n2 = 0;
    for (float v : f.descriptors.float_row(i)) n2 += static_cast<double>(v) * v;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-3);
  }
}

GrayImage gaussian_blob(int side, double sigma) {
  Raster r(side, side);
  const double c = (side - 1) / 2.0;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double d2 = (x - c) * (x - c) + (y - c) * (y - c);
      r(x, y) = static_cast<float>(0.2 + 0.6 * std::exp(-d2 / (2 * sigma * sigma)));
    }
  }
  return GrayImage::from_raster(std::move(r));
}

TEST(Surf, SingleBlobDetectedAtCentre) {
  std::vector<float> sizes;
  for (double sigma : {4.0, 6.0, 9.0}) {
    const GrayImage img = gaussian_blob(241, sigma);
    const Features f = surf_detect(img);
    ASSERT_EQ(f.size(), 1u) << "sigma " << sigma;
    EXPECT_LE(std::hypot(f.keypoints[0].x - 120.0, f.keypoints[0].y - 120.0), 2.0);
    sizes.push_back(f.keypoints[0].size);
  }
  EXPECT_LT(sizes[0], sizes[1]);
  EXPECT_LT(sizes[1], sizes[2]);
}

// --- FAST ---------------------------------------------------------------

Raster fast_patch(const std::array<float, 16>& ring, float centre) {
  Raster r(7, 7, centre);
  const auto& circle = fast_circle();
  for (int k = 0; k < 16; ++k) r(3 + circle[k][0], 3 + circle[k][1]) = ring[k];
  return r;
}

// Exhaustive oracle: try every start and every length >= 9 on the circle.
FastVerdict fast_oracle(const std::array<float, 16>& ring, float centre, float t) {
  FastVerdict v;
  for (int sign : {1, -1}) {
    for (int start = 0; start < 16; ++start) {
      for (int len = 9; len <= 16; ++len) {
        bool ok = true;
        float worst = 1e9f;
        for (int i = 0; i < len && ok; ++i) {
          const float d = sign * (ring[(start + i) % 16] - centre);
          ok = d > t;
          worst = std::min(worst, d);
        }
        if (ok) {
          v.corner = true;
          v.score = std::max(v.score, worst);
        }
      }
    }
  }
  return v;
}

TEST(Fast, CircleIsRadiusThreeBresenham) {
  const auto& c = fast_circle();
  EXPECT_EQ(c[0][0], 0);
  EXPECT_EQ(c[0][1], -3);
  for (const auto& p : c) {
    const int d2 = p[0] * p[0] + p[1] * p[1];
    EXPECT_TRUE(d2 == 9 || d2 == 10 || d2 == 8) << p[0] << "," << p[1];
  }
}

TEST(Fast, UniformPatchIsNotCorner) {
  std::array<float, 16> ring;
  ring.fill(0.5f);
  EXPECT_FALSE(fast_segment_test(fast_patch(ring, 0.5f), 3, 3, 0.05f).corner);
}

TEST(Fast, TwelveContiguousBrightPixels) {
  const float t = 0.1f;
  for (int start = 0; start < 16; ++start) {
    std::array<float, 16> ring;
    ring.fill(0.3f);
    for (int i = 0; i < 12; ++i) ring[(start + i) % 16] = 0.3f + 2 * t;
    const FastVerdict v = fast_segment_test(fast_patch(ring, 0.3f), 3, 3, t);
    const FastVerdict o = fast_oracle(ring, 0.3f, t);
    EXPECT_TRUE(o.corner);
    EXPECT_TRUE(v.corner);
    EXPECT_NEAR(v.score, o.score, 1e-6);
  }
}

TEST(Fast, AlternatingRingIsNotCorner) {
  std::array<float, 16> ring;
  for (int k = 0; k < 16; ++k) ring[k] = (k % 2 == 0) ? 0.9f : 0.1f;
  EXPECT_FALSE(fast_oracle(ring, 0.5f, 0.1f).corner);
  EXPECT_FALSE(fast_segment_test(fast_patch(ring, 0.5f), 3, 3, 0.1f).corner);
}

TEST(Fast, MatchesExhaustiveOracleOnRandomRings) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::uniform_int_distribution<int> pick(0, 2);
  int corners = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    std::array<float, 16> ring;
    // Three-level rings produce long arcs often enough to exercise both verdicts.
    const float centre = 0.5f;
    const int run_start = pick(rng) * 5;
    for (int k = 0; k < 16; ++k) ring[k] = centre + (u(rng) - 0.5f) * 0.3f;
    const int len = 7 + static_cast<int>(u(rng) * 10);
    const float sign = u(rng) < 0.5f ? 1.0f : -1.0f;
    for (int i = 0; i < len; ++i) ring[(run_start + i) % 16] = centre + sign * (0.15f + 0.3f * u(rng));
    const FastVerdict o = fast_oracle(ring, centre, 0.1f);
    const FastVerdict v = fast_segment_test(fast_patch(ring, centre), 3, 3, 0.1f);
    ASSERT_EQ(v.corner, o.corner) << "trial " << trial;
    EXPECT_NEAR(v.score, o.score, 1e-6);
    corners += o.corner;
  }
  EXPECT_GT(corners, 500);
  EXPECT_LT(corners, 4500);
}

TEST(Fast, BorderRejected) {
  const Raster r(20, 20, 0.5f);
  EXPECT_THROW(fast_segment_test(r, 2, 10, 0.1f), InvalidArgument);
  EXPECT_THROW(fast_segment_test(r, 10, 17, 0.1f), InvalidArgument);
  EXPECT_NO_THROW(fast_segment_test(r, 3, 16, 0.1f));
}

// --- ORB ----------------------------------------------------------------

TEST(IntensityCentroid, AxisAndSymmetry) {
  Raster ramp(41, 41);
  for (int y = 0; y < 41; ++y) {
    for (int x = 0; x < 41; ++x) ramp(x, y) = static_cast<float>(x) / 40.0f;
  }
  const Keypoint kp{20, 20, 31, 0, 0, 0};
  const auto a = intensity_centroid(ramp, kp, 15);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR(*a, 0.0, 1e-6);

  Raster radial(41, 41);
  for (int y = 0; y < 41; ++y) {
    for (int x = 0; x < 41; ++x) radial(x, y) = static_cast<float>(std::exp(-((x - 20) * (x - 20) + (y - 20) * (y - 20)) / 50.0));
  }
  EXPECT_FALSE(intensity_centroid(radial, kp, 15).has_value());
  EXPECT_THROW(intensity_centroid(radial, Keypoint{5, 20, 31, 0, 0, 0}, 15), InvalidArgument);
}

TEST(IntensityCentroid, FollowsRotation) {
  const GrayImage img = gaussian_blur(testing::random_image(81, 81, 31), 2.5);
  const Keypoint kp{40, 40, 31, 0, 0, 0};
  const Homography rot =
      Homography::translation(40, 40) * Homography::rotation(std::numbers::pi / 2) * Homography::translation(-40, -40);
  const GrayImage turned = warp_homography(img, rot, 81, 81);
  const auto a = intensity_centroid(img, kp, 15);
  const auto b = intensity_centroid(turned, kp, 15);
  ASSERT_TRUE(a && b);
  double diff = std::fmod(*b - *a + 4 * std::numbers::pi, 2 * std::numbers::pi);
  EXPECT_NEAR(diff, std::numbers::pi / 2, 0.1);
}

TEST(SteeredBrief, ZeroAngleIsPlainBrief) {
  const Raster img = gaussian_blur(random_raster(64, 64, 2), 2.0);
  const Keypoint kp{32, 32, 31, 0.0f, 0, 0};
  const Descriptor d = steered_brief(img, kp);
  ASSERT_EQ(d.length(), kBriefBits);
  const auto& pat = brief_pattern();
  for (int i = 0; i < kBriefBits; ++i) {
    const bool expect = img(32 + pat[i].ax, 32 + pat[i].ay) < img(32 + pat[i].bx, 32 + pat[i].by);
    EXPECT_EQ(d.bit(i), expect) << i;
  }
  EXPECT_EQ(d, steered_brief(img, kp));
}

TEST(SteeredBrief, SteeringQuantisation) {
  const double step = 2 * std::numbers::pi / 30;
  EXPECT_DOUBLE_EQ(steering_angle(0.0), 0.0);
  EXPECT_NEAR(steering_angle(0.4 * step), 0.0, 1e-12);
  EXPECT_NEAR(steering_angle(0.6 * step), step, 1e-12);
  EXPECT_NEAR(steering_angle(2 * std::numbers::pi - 0.1 * step), 0.0, 1e-12);
}

TEST(SteeredBrief, StableUnderThirtyDegreeRotation) {
  std::vector<int> dists;
  for (int trial = 0; trial < 100; ++trial) {
    const GrayImage tex = gaussian_blur(testing::random_image(96, 96, 1000 + trial), 2.0);
    const Homography rot = Homography::translation(48, 48) * Homography::rotation(std::numbers::pi / 6) *
                           Homography::translation(-48, -48);
    const GrayImage turned = warp_homography(tex, rot, 96, 96);
    const Raster a = gaussian_blur(tex.raster(), 2.0);
    const Raster b = gaussian_blur(turned.raster(), 2.0);
    const Descriptor da = steered_brief(a, Keypoint{48, 48, 31, 0.0f, 0, 0});
    const Descriptor db = steered_brief(b, Keypoint{48, 48, 31, static_cast<float>(std::numbers::pi / 6), 0, 0});
    dists.push_back(static_cast<int>(descriptor_distance(da, db)));
  }
  std::sort(dists.begin(), dists.end());
  EXPECT_LE(dists[dists.size() / 2], 40);
}

TEST(Orb, CountOrderAndBits) {
  const GrayImage img = cover(8);
  const Features f = orb_detect(img);
  EXPECT_EQ(f.size(), 500u);
  EXPECT_EQ(f.descriptors.length(), kBriefBits);
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_GE(f.keypoints[i - 1].response, f.keypoints[i].response);

  OrbParams small;
  small.n_features = 37;
  EXPECT_EQ(orb_detect(img, small).size(), 37u);
}

TEST(Orb, FlatHalfStaysEmpty) {
  const GrayImage tex = cover(9);
  Raster half = tex.raster();
  for (int y = 0; y < half.height(); ++y) {
    for (int x = 0; x < half.width() / 2; ++x) half(x, y) = 0.5f;
  }
  const Features f = orb_detect(GrayImage::from_raster(std::move(half)));
  ASSERT_GT(f.size(), 0u);
  // Corners on the seam itself belong to the textured side.
  for (const Keypoint& k : f.keypoints) EXPECT_GE(k.x, tex.width() / 2 - 4.0f);
}

TEST(Orb, HarrisPrefersCorners) {
  Raster r(40, 40, 0.0f);
  for (int y = 20; y < 40; ++y) {
    for (int x = 20; x < 40; ++x) r(x, y) = 1.0f;
  }
  EXPECT_GT(harris_response(r, 20, 20), 0.0);
  EXPECT_LT(harris_response(r, 30, 20), 0.0);
  EXPECT_NEAR(harris_response(r, 8, 8), 0.0, 1e-12);
}

// --- AKAZE building blocks ---------------------------------------------

TEST(Akaze, DescriptorBitArithmetic) {
  EXPECT_EQ(mldb_bits(3), 486);
  EXPECT_EQ(mldb_bits(1), 162);
  const Features f = akaze_detect(cover(10));
  ASSERT_GT(f.size(), 0u);
  EXPECT_EQ(f.descriptors.length(), 486);
}

TEST(Akaze, Conductivity) {
  const Raster gx(4, 4, 0.0f);
  const Raster gy(4, 4, 0.0f);
  const Raster unit = g2_conductivity(gx, gy, 0.1);
  for (float v : unit.data()) EXPECT_FLOAT_EQ(v, 1.0f);
  const Raster one(4, 4, 0.3f);
  const Raster g = g2_conductivity(one, gy, 0.3);
  EXPECT_NEAR(g(1, 1), 0.5, 1e-6);
  const Gradient grad = sobel_gradient(random_raster(16, 16, 4));
  const Raster wide = g2_conductivity(grad.gx, grad.gy, 1e6);
  for (float v : wide.data()) EXPECT_NEAR(v, 1.0, 1e-6);
  EXPECT_THROW(g2_conductivity(gx, gy, 0.0), InvalidArgument);
}

TEST(Akaze, DiffusionStepConservesMass) {
  const Raster flat(20, 20, 0.6f);
  const Raster g = random_raster(20, 20, 1);
  const Raster stepped = fed_diffusion_step(flat, g, 0.2);
  for (float v : stepped.data()) EXPECT_NEAR(v, 0.6f, 1e-6);

  const Raster L = random_raster(30, 25, 2);
  const Raster cond = g2_conductivity(sobel_gradient(L).gx, sobel_gradient(L).gy, 0.05);
  double before = 0;
  for (float v : L.data()) before += v;
  const Raster next = fed_diffusion_step(L, cond, 0.24);
  double after = 0;
  for (float v : next.data()) after += v;
  EXPECT_NEAR(after, before, 1e-6 * before);
  EXPECT_THROW(fed_diffusion_step(L, Raster(3, 3, 1.0f), 0.1), InvalidArgument);
}

TEST(Akaze, FedScheduleReachesTargetTime) {
  for (double t : {0.5, 2.0, 7.3, 40.0}) {
    const auto taus = fed_step_sizes(t);
    double sum = 0;
    for (double tau : taus) sum += tau;
    EXPECT_NEAR(sum, t, 1e-9 * t);
  }
}

TEST(Akaze, LinearLimitMatchesGaussian) {
  const Raster L = gaussian_blur(random_raster(64, 64, 17), 1.0);
  const Raster ones(64, 64, 1.0f);
  const double T = 2.0;
  // Many short cycles; one long cycle is only a stable, not an accurate, solver.
  const auto taus = fed_step_sizes(T / 8);
  Raster fed = L;
  for (int c = 0; c < 8; ++c) fed = fed_cycle(fed, ones, taus);
  const Raster gauss = gaussian_blur(L, std::sqrt(2 * T));
  for (int y = 12; y < 52; ++y) {
    for (int x = 12; x < 52; ++x) EXPECT_NEAR(fed(x, y), gauss(x, y), 5e-3);
  }
}

TEST(Akaze, FlatHalfStaysEmpty) {
  const GrayImage tex = cover(9);
  Raster half = tex.raster();
  for (int y = 0; y < half.height(); ++y) {
    for (int x = 0; x < half.width() / 2; ++x) half(x, y) = 0.5f;
  }
  const Features f = akaze_detect(GrayImage::from_raster(std::move(half)));
  ASSERT_GT(f.size(), 0u);
  // Blobs straddling the seam may sit up to their radius inside the flat half.
  for (const Keypoint& k : f.keypoints) EXPECT_GE(k.x + k.size / 2, tex.width() / 2.0f) << k.x << " " << k.size;
}

TEST(Akaze, RepeatableUnderRotation45) {
  const GrayImage img = cover(11);
  const TransformResult rot = apply_transform(img, TransformKind::Rotate45);
  const Features a = akaze_detect(img);
  const Features b = akaze_detect(rot.image);
  EXPECT_GE(repeatability(a, b, rot.homography, rot.image.width(), rot.image.height()), 0.5);
}

// --- configuration -----------------------------------------------------

TEST(DetectorConfig, NamesAndJson) {
  EXPECT_EQ(parse_detector("AKAZE"), DetectorKind::Akaze);
  EXPECT_THROW(parse_detector("brisk"), InvalidArgument);
  for (DetectorKind k : kAllDetectors) {
    const DetectorConfig c(k);
    EXPECT_EQ(DetectorConfig::from_json(c.to_json()), c);
  }
  const DetectorConfig orb = DetectorConfig::from_json({{"detector", "orb"}, {"params", {{"n_features", 100}}}});
  EXPECT_EQ(orb.get<OrbParams>().n_features, 100);
  EXPECT_EQ(orb.get<OrbParams>().pyramid_levels, 8);
  EXPECT_THROW(DetectorConfig::from_json({{"detector", "orb"}, {"params", {{"bogus", 1}}}}), FormatError);
  EXPECT_THROW(DetectorConfig::from_json({{"detector", "orb"}, {"params", {{"scale_factor", 1.0}}}}), InvalidArgument);
  EXPECT_EQ(DetectorConfig(DetectorKind::Sift).descriptor_length(), 128);
  EXPECT_EQ(DetectorConfig(DetectorKind::Surf).descriptor_length(), 64);
  EXPECT_EQ(DetectorConfig(DetectorKind::Orb).descriptor_length(), 256);
  EXPECT_EQ(DetectorConfig(DetectorKind::Akaze).descriptor_length(), 486);
}

}  // namespace
}  // namespace coverscan
