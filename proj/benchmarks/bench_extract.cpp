#include <benchmark/benchmark.h>

#include "coverscan/cover_synth.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/image.hpp"

namespace {

using namespace coverscan;

const GrayImage& cover_1024() {
  static const GrayImage img = synth_cover(1024, 768, 700);
  return img;
}

void BM_Extract(benchmark::State& state) {
  const DetectorConfig cfg(static_cast<DetectorKind>(state.range(0)));
  const GrayImage& img = cover_1024();
  std::size_t n = 0;
  for (auto _ : state) {
    n = extract_features(img, cfg).size();
    benchmark::DoNotOptimize(n);
  }
  state.SetLabel(std::string(cfg.name()));
  state.counters["keypoints"] = static_cast<double>(n);
}
BENCHMARK(BM_Extract)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_GaussianBlur(benchmark::State& state) {
  const GrayImage& img = cover_1024();
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(img.raster(), static_cast<double>(state.range(0)) / 10));
}
BENCHMARK(BM_GaussianBlur)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_IntegralImage(benchmark::State& state) {
  const GrayImage& img = cover_1024();
  for (auto _ : state) benchmark::DoNotOptimize(integral_image(img));
}
BENCHMARK(BM_IntegralImage)->Unit(benchmark::kMillisecond);

}  // namespace
