// Writes deterministic synthetic covers: make_covers <out_dir> <count> [width height seed]
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "coverscan/cover_synth.hpp"

int main(int argc, char** argv) {
  if (argc != 3 && argc != 6) {
    std::fprintf(stderr, "usage: make_covers <out_dir> <count> [width height seed]\n");
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  const int count = std::atoi(argv[2]);
  const int width = argc == 6 ? std::atoi(argv[3]) : 320;
  const int height = argc == 6 ? std::atoi(argv[4]) : 400;
  const unsigned long long seed = argc == 6 ? std::strtoull(argv[5], nullptr, 10) : 42;
  try {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < count; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "cover_%03d.pgm", i);
      coverscan::save_pgm(coverscan::synth_cover(width, height, seed + i), dir / name);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "make_covers: %s\n", e.what());
    return 2;
  }
  return 0;
}
