#include <benchmark/benchmark.h>

#include <numeric>

#include "coverscan/ann_index.hpp"
#include "coverscan/cover_synth.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/matching.hpp"
#include "coverscan/transforms.hpp"

namespace {

using namespace coverscan;

// Equal-size query and reference sets per detector, taken from one cover and
// its viewpoint-warped copy.
struct Sets {
  DescriptorSet query;
  DescriptorSet reference;
};

const Sets& sets(DetectorKind kind) {
  static Sets cache[4];
  static bool ready[4] = {};
  const int i = static_cast<int>(kind);
  if (!ready[i]) {
    const DetectorConfig cfg(kind);
    const GrayImage img = synth_cover(640, 800, 900);
    const DescriptorSet r = extract_features(img, cfg).descriptors;
    const DescriptorSet q = extract_features(apply_transform(img, TransformKind::Viewpoint).image, cfg).descriptors;
    std::vector<std::size_t> take(500);
    std::iota(take.begin(), take.end(), 0);
    cache[i] = {q.select(take), r.select(take)};
    ready[i] = true;
  }
  return cache[i];
}

void BM_Match1nn(benchmark::State& state) {
  const auto kind = static_cast<DetectorKind>(state.range(0));
  const Sets& s = sets(kind);
  for (auto _ : state) benchmark::DoNotOptimize(match_1nn(s.query, s.reference));
  state.SetLabel(std::string(detector_name(kind)));
}
BENCHMARK(BM_Match1nn)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_Match2nnNndr(benchmark::State& state) {
  const auto kind = static_cast<DetectorKind>(state.range(0));
  const Sets& s = sets(kind);
  for (auto _ : state) benchmark::DoNotOptimize(match_2nn_nndr(s.query, s.reference, 0.7));
  state.SetLabel(std::string(detector_name(kind)));
}
BENCHMARK(BM_Match2nnNndr)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_AnnQuery(benchmark::State& state) {
  const auto kind = static_cast<DetectorKind>(state.range(0));
  const Sets& s = sets(kind);
  const AnnIndex idx = build_ann_index(s.reference);
  for (auto _ : state) benchmark::DoNotOptimize(idx.knn(s.query, 2));
  state.SetLabel(std::string(detector_name(kind)));
}
BENCHMARK(BM_AnnQuery)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

void BM_AnnBuild(benchmark::State& state) {
  const auto kind = static_cast<DetectorKind>(state.range(0));
  const Sets& s = sets(kind);
  for (auto _ : state) benchmark::DoNotOptimize(build_ann_index(s.reference));
  state.SetLabel(std::string(detector_name(kind)));
}
BENCHMARK(BM_AnnBuild)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
