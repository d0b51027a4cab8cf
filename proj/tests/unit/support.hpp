#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "coverscan/cover_synth.hpp"
#include "coverscan/image.hpp"

namespace coverscan::testing {

inline Raster random_raster(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Raster r(w, h);
  for (float& v : r.data()) v = u(rng);
  return r;
}

inline GrayImage random_image(int w, int h, std::uint64_t seed) {
  return GrayImage::from_raster(random_raster(w, h, seed));
}

inline GrayImage cover(std::uint64_t seed, int w = 320, int h = 400) { return synth_cover(w, h, seed); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("coverscan_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace coverscan::testing
