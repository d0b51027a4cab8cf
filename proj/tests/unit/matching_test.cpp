#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "coverscan/ann_index.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/error.hpp"
#include "coverscan/features_io.hpp"
#include "coverscan/matching.hpp"
#include "coverscan/transforms.hpp"
#include "support.hpp"

namespace coverscan {
namespace {

DescriptorSet random_floats(std::size_t n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  DescriptorSet s(DescriptorKind::Float, dim);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (float& x : v) x = g(rng);
    s.push_back_floats(v);
  }
  return s;
}

DescriptorSet random_bits(std::size_t n, int bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DescriptorSet s(DescriptorKind::Binary, bits);
  std::vector<std::uint64_t> w(words_for_bits(bits));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : w) x = rng();
    if (bits % 64) w.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
    s.push_back_bits(w);
  }
  return s;
}

// Exhaustive double-loop oracle, distances in double precision.
std::vector<std::vector<std::pair<double, std::uint32_t>>> brute_knn(const DescriptorSet& q, const DescriptorSet& r,
                                                                     int k) {
  std::vector<std::vector<std::pair<double, std::uint32_t>>> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t j = 0; j < r.size(); ++j) {
      all.emplace_back(descriptor_distance(q.row(i), r.row(j)), static_cast<std::uint32_t>(j));
    }
    std::stable_sort(all.begin(), all.end());
    all.resize(k);
    out[i] = all;
  }
  return out;
}

TEST(Distance, BasicValues) {
  Descriptor a = Descriptor::bit_string(256);
  Descriptor b = Descriptor::bit_string(256);
  for (int j = 0; j < 256; ++j) b.set_bit(j, true);
  EXPECT_EQ(descriptor_distance(a, a), 0.0);
  EXPECT_EQ(descriptor_distance(a, b), 256.0);

  Descriptor c = Descriptor::bit_string(4);
  Descriptor d = Descriptor::bit_string(4);
  c.set_bit(0, true);  // 1010, most significant first
  c.set_bit(2, true);
  d.set_bit(1, true);  // 0110
  d.set_bit(2, true);
  EXPECT_EQ(descriptor_distance(c, d), 2.0);

  const Descriptor f = Descriptor::float_vector({3, 0, 0});
  const Descriptor g = Descriptor::float_vector({0, 4, 0});
  EXPECT_DOUBLE_EQ(descriptor_distance(f, g), 5.0);
  EXPECT_THROW(descriptor_distance(f, a), InvalidArgument);
  EXPECT_THROW(descriptor_distance(f, Descriptor::float_vector({1, 2})), InvalidArgument);
}

TEST(Distance, MetricSanity) {
  const DescriptorSet fa = random_floats(1000, 64, 1);
  const DescriptorSet fb = random_floats(1000, 64, 2);
  const DescriptorSet ba = random_bits(1000, 486, 3);
  const DescriptorSet bb = random_bits(1000, 486, 4);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(descriptor_distance(fa.row(i), fb.row(i)), descriptor_distance(fb.row(i), fa.row(i)));
    EXPECT_EQ(descriptor_distance(fa.row(i), fa.row(i)), 0.0);
    EXPECT_GT(descriptor_distance(fa.row(i), fb.row(i)), 0.0);
    const double h = descriptor_distance(ba.row(i), bb.row(i));
    EXPECT_EQ(h, descriptor_distance(bb.row(i), ba.row(i)));
    EXPECT_LE(h, 486.0);
    EXPECT_EQ(descriptor_distance(ba.row(i), ba.row(i)), 0.0);
  }
}

TEST(Match1nn, SelfAndSingleReference) {
  const DescriptorSet s = random_floats(30, 128, 5);
  const MatchSet self = match_1nn(s, s);
  ASSERT_EQ(self.pairs.size(), 30u);
  EXPECT_EQ(self.retained_count, 30u);
  EXPECT_EQ(self.total_queries, 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(self.pairs[i].query, i);
    EXPECT_EQ(self.pairs[i].reference, i);
    EXPECT_EQ(self.pairs[i].distance, 0.0);
  }
  const DescriptorSet one = random_floats(1, 128, 6);
  for (const Match& m : match_1nn(s, one).pairs) EXPECT_EQ(m.reference, 0u);
}

TEST(Match1nn, EqualsDoubleLoop) {
  for (bool binary : {false, true}) {
    const DescriptorSet q = binary ? random_bits(50, 256, 7) : random_floats(50, 128, 7);
    const DescriptorSet r = binary ? random_bits(50, 256, 8) : random_floats(50, 128, 8);
    const auto oracle = brute_knn(q, r, 1);
    const MatchSet m = match_1nn(q, r);
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_EQ(m.pairs[i].reference, oracle[i][0].second);
      // Float rows are accumulated in single precision.
      EXPECT_NEAR(m.pairs[i].distance, oracle[i][0].first, 1e-6 * oracle[i][0].first);
    }
  }
}

TEST(Match1nn, TiesGoToLowestIndex) {
  DescriptorSet r(DescriptorKind::Float, 2);
  r.push_back_floats(std::vector<float>{1, 0});
  r.push_back_floats(std::vector<float>{0, 1});
  r.push_back_floats(std::vector<float>{-1, 0});
  DescriptorSet q(DescriptorKind::Float, 2);
  q.push_back_floats(std::vector<float>{0, 0});
  EXPECT_EQ(match_1nn(q, r).pairs[0].reference, 0u);
  const MatchSet two = knn_exact(q, r, 2);
  EXPECT_EQ(two.pairs[0].reference, 0u);
  EXPECT_EQ(two.pairs[1].reference, 1u);
}

TEST(Match1nn, Errors) {
  const DescriptorSet f = random_floats(3, 8, 1);
  EXPECT_THROW(match_1nn(DescriptorSet(DescriptorKind::Float, 8), f), InvalidArgument);
  EXPECT_THROW(match_1nn(f, DescriptorSet(DescriptorKind::Float, 8)), InvalidArgument);
  EXPECT_THROW(match_1nn(f, random_bits(3, 8, 1)), InvalidArgument);
  EXPECT_THROW(match_1nn(f, random_floats(3, 9, 1)), InvalidArgument);
}

TEST(Match1nn, ReferenceOrderOnlyRelabels) {
  const DescriptorSet q = random_floats(40, 32, 9);
  const DescriptorSet r = random_floats(60, 32, 10);
  std::vector<std::size_t> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  const DescriptorSet shuffled = r.select(perm);
  const MatchSet a = match_1nn(q, r);
  const MatchSet b = match_1nn(q, shuffled);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(a.pairs[i].distance, b.pairs[i].distance);
    EXPECT_EQ(perm[b.pairs[i].reference], a.pairs[i].reference);
  }
}

TEST(KnnExact, EqualsDoubleLoop) {
  const DescriptorSet q = random_bits(40, 486, 11);
  const DescriptorSet r = random_bits(70, 486, 12);
  const auto oracle = brute_knn(q, r, 2);
  const MatchSet m = knn_exact(q, r, 2);
  ASSERT_EQ(m.pairs.size(), 80u);
  for (std::size_t i = 0; i < 40; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(m.pairs[2 * i + j].query, i);
      EXPECT_EQ(m.pairs[2 * i + j].reference, oracle[i][j].second);
      EXPECT_EQ(m.pairs[2 * i + j].distance, oracle[i][j].first);
    }
  }
  EXPECT_THROW(knn_exact(q, random_bits(1, 486, 1), 2), InvalidArgument);
  EXPECT_THROW(knn_exact(q, r, 3), InvalidArgument);
}

MatchSet two_pairs(double d1, double d2) {
  MatchSet m;
  m.pairs = {{0, 0, d1}, {0, 1, d2}};
  m.total_queries = 1;
  m.retained_count = 1;
  return m;
}

TEST(Nndr, RatioArithmetic) {
  EXPECT_EQ(apply_nndr(two_pairs(0.3, 0.6), 0.7).retained_count, 1u);
  EXPECT_EQ(apply_nndr(two_pairs(0.5, 0.5), 0.99).retained_count, 0u);
  EXPECT_EQ(apply_nndr(two_pairs(0.5, 0.5), 1.0).retained_count, 1u);
  EXPECT_EQ(apply_nndr(two_pairs(0.0, 0.0), 0.1).retained_count, 1u);
  const MatchSet kept = apply_nndr(two_pairs(0.3, 0.6), 0.7);
  ASSERT_EQ(kept.pairs.size(), 1u);
  EXPECT_EQ(kept.pairs[0].reference, 0u);
  EXPECT_EQ(kept.total_queries, 1u);
  EXPECT_THROW(apply_nndr(two_pairs(0.1, 0.2), 0.0), InvalidArgument);
  EXPECT_THROW(apply_nndr(two_pairs(0.1, 0.2), 1.01), InvalidArgument);
}

TEST(Nndr, TauOneKeepsEverythingAndIsMonotone) {
  const DescriptorSet q = random_floats(200, 64, 13);
  const DescriptorSet r = random_floats(150, 64, 14);
  EXPECT_DOUBLE_EQ(matching_rate(match_2nn_nndr(q, r, 1.0)), 100.0);
  const MatchSet knn = knn_exact(q, r, 2);
  std::size_t prev = 0;
  for (double tau = 0.05; tau <= 1.0 + 1e-12; tau += 0.05) {
    const std::size_t kept = apply_nndr(knn, std::min(tau, 1.0)).retained_count;
    EXPECT_GE(kept, prev);
    prev = kept;
  }
}

TEST(Scores, SumAndRate) {
  MatchSet m;
  m.pairs = {{0, 0, 1}, {1, 0, 2}, {2, 0, 3}};
  EXPECT_DOUBLE_EQ(score_sum_distances(m), 6.0);
  EXPECT_EQ(score_sum_distances(MatchSet{}), std::numeric_limits<double>::infinity());
  MatchSet r;
  r.retained_count = 40;
  r.total_queries = 200;
  EXPECT_DOUBLE_EQ(matching_rate(r), 20.0);
  EXPECT_DOUBLE_EQ(matching_rate(MatchSet{}), 0.0);
}

// --- ANN ----------------------------------------------------------------

double recall(const MatchSet& approx, const MatchSet& exact) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < exact.pairs.size(); i += 2) {
    for (int j = 0; j < 2; ++j) {
      const auto r = exact.pairs[i + j].reference;
      if (approx.pairs[i].reference == r || approx.pairs[i + 1].reference == r) ++hit;
    }
  }
  return static_cast<double>(hit) / exact.pairs.size();
}

TEST(Ann, SingleAndSelfQueries) {
  for (bool binary : {false, true}) {
    const DescriptorSet one = binary ? random_bits(1, 256, 1) : random_floats(1, 64, 1);
    const AnnIndex tiny = build_ann_index(one);
    const DescriptorSet q = binary ? random_bits(5, 256, 2) : random_floats(5, 64, 2);
    for (const Match& m : ann_knn(tiny, q, 1).pairs) EXPECT_EQ(m.reference, 0u);

    const DescriptorSet data = binary ? random_bits(500, 256, 3) : random_floats(500, 64, 3);
    const AnnIndex idx = build_ann_index(data);
    const MatchSet self = ann_knn(idx, data, 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      EXPECT_EQ(self.pairs[i].reference, i);
      EXPECT_EQ(self.pairs[i].distance, 0.0);
    }
  }
}

TEST(Ann, ExhaustiveWhenKCoversIndex) {
  const DescriptorSet r = random_floats(2, 16, 4);
  const DescriptorSet q = random_floats(20, 16, 5);
  EXPECT_EQ(ann_knn(build_ann_index(r), q, 2), knn_exact(q, r, 2));
  const DescriptorSet rb = random_bits(2, 128, 4);
  const DescriptorSet qb = random_bits(20, 128, 5);
  EXPECT_EQ(ann_knn(build_ann_index(rb), qb, 2), knn_exact(qb, rb, 2));
}

TEST(Ann, DeterministicBuildAndQuery) {
  const DescriptorSet r = random_bits(2000, 486, 6);
  const DescriptorSet q = random_bits(50, 486, 7);
  const AnnIndex a = build_ann_index(r);
  const AnnIndex b = build_ann_index(r);
  EXPECT_EQ(a.knn(q, 2), b.knn(q, 2));
  EXPECT_EQ(a.knn(q, 2), a.knn(q, 2));
}

TEST(Ann, Errors) {
  EXPECT_THROW(build_ann_index(DescriptorSet(DescriptorKind::Float, 8)), InvalidArgument);
  const AnnIndex idx = build_ann_index(random_floats(10, 8, 1));
  EXPECT_THROW(idx.knn(random_floats(3, 8, 2), 11), InvalidArgument);
  EXPECT_THROW(idx.knn(random_floats(3, 8, 2), 0), InvalidArgument);
  EXPECT_THROW(idx.knn(random_bits(3, 8, 2), 1), InvalidArgument);
  AnnParams p;
  p.key_bits = 30;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

// Descriptors of real covers: an index over one set of covers and queries
// from a transformed cover, the setting the index is tuned for.
class AnnOnCovers : public ::testing::TestWithParam<DetectorKind> {};

TEST_P(AnnOnCovers, RecallAtLeast95Percent) {
  const DetectorConfig cfg(GetParam());
  DescriptorSet ref(cfg.descriptor_kind(), cfg.descriptor_length());
  for (std::uint64_t s = 100; ref.size() < 1000; ++s) {
    const Features f = extract_features(testing::cover(s), cfg);
    for (std::size_t i = 0; i < f.size() && ref.size() < 1000; ++i) {
      if (f.descriptors.kind() == DescriptorKind::Float) {
        ref.push_back_floats(f.descriptors.float_row(i));
      } else {
        ref.push_back_bits(f.descriptors.bit_row(i));
      }
    }
  }
  const GrayImage view = apply_transform(testing::cover(100), TransformKind::Viewpoint).image;
  const Features qf = extract_features(view, cfg);
  std::vector<std::size_t> take(std::min<std::size_t>(100, qf.size()));
  std::iota(take.begin(), take.end(), 0);
  const DescriptorSet q = qf.descriptors.select(take);
  EXPECT_GE(recall(ann_knn(build_ann_index(ref), q, 2), knn_exact(q, ref, 2)), 0.95);
}

INSTANTIATE_TEST_SUITE_P(All, AnnOnCovers, ::testing::ValuesIn(kAllDetectors),
                         [](const auto& info) { return std::string(detector_name(info.param)); });

TEST(Ann, BinaryQueriesBeatExhaustiveAt10k) {
  const DescriptorSet r = random_bits(10000, 256, 21);
  // Queries near indexed points, as real matches are.
  DescriptorSet q(DescriptorKind::Binary, 256);
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto src = r.bit_row(static_cast<std::size_t>(rng() % r.size()));
    std::vector<std::uint64_t> w(src.begin(), src.end());
    for (int f = 0; f < 20; ++f) {
      const int bit = static_cast<int>(rng() % 256);
      w[bit / 64] ^= std::uint64_t{1} << (bit % 64);
    }
    q.push_back_bits(w);
  }
  const AnnIndex idx = build_ann_index(r);
  auto median_ms = [](auto&& fn) {
    std::vector<double> t;
    for (int rep = 0; rep < 5; ++rep) {
      const auto s = std::chrono::steady_clock::now();
      fn();
      t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - s).count());
    }
    std::sort(t.begin(), t.end());
    return t[2];
  };
  const double ann = median_ms([&] { (void)idx.knn(q, 2); });
  const double exact = median_ms([&] { (void)match_1nn(q, r); });
  EXPECT_LT(ann, exact);
}

// --- feature files -------------------------------------------------------

TEST(FeaturesIo, RoundTripEveryDetector) {
  const GrayImage img = testing::cover(12, 200, 240);
  for (DetectorKind k : kAllDetectors) {
    FeatureFile file{DetectorConfig(k), extract_features(img, DetectorConfig(k))};
    std::stringstream ss;
    write_features(ss, file);
    const FeatureFile back = read_features(ss);
    EXPECT_EQ(back.config, file.config);
    EXPECT_EQ(back.features.keypoints, file.features.keypoints);
    EXPECT_EQ(back.features.descriptors, file.features.descriptors);
  }
}

TEST(FeaturesIo, BinaryDescriptorIsMsbFirstHex) {
  Features f;
  f.descriptors = DescriptorSet(DescriptorKind::Binary, 256);
  Descriptor d = Descriptor::bit_string(256);
  d.set_bit(0, true);
  d.set_bit(9, true);
  f.descriptors.push_back(d);
  f.keypoints.push_back(Keypoint{1, 2, 3, 0.5f, 0.25f, 1});
  std::stringstream ss;
  write_features(ss, FeatureFile{DetectorConfig(DetectorKind::Orb), f});
  std::string header;
  std::string record;
  std::getline(ss, header);
  std::getline(ss, record);
  const auto j = nlohmann::json::parse(record);
  EXPECT_EQ(j["descriptor"].get<std::string>().substr(0, 4), "8040");
  EXPECT_EQ(nlohmann::json::parse(header)["count"], 1);
}

TEST(FeaturesIo, RejectsMalformed) {
  std::stringstream empty;
  EXPECT_THROW(read_features(empty), FormatError);
  std::stringstream junk("{\"format\":\"other\"}\n");
  EXPECT_THROW(read_features(junk), FormatError);
  std::stringstream ss;
  write_features(ss, FeatureFile{DetectorConfig(DetectorKind::Orb),
                                 extract_features(testing::cover(1, 200, 240), DetectorConfig(DetectorKind::Orb))});
  std::string text = ss.str();
  text.resize(text.size() / 2);
  std::stringstream cut(text);
  EXPECT_THROW(read_features(cut), FormatError);
  EXPECT_THROW(read_features(std::filesystem::path("/nonexistent/features.jsonl")), IoError);
}

}  // namespace
}  // namespace coverscan
