#pragma once

#include <bit>
#include <cstdint>
#include <cstring>

namespace coverscan::detail {

inline float squared_l2(const float* a, const float* b, int n) {
  typedef float v8 __attribute__((vector_size(32)));
  v8 acc0 = {};
  v8 acc1 = {};
  int j = 0;
  for (; j + 16 <= n; j += 16) {
    v8 a0, b0, a1, b1;
    std::memcpy(&a0, a + j, sizeof(v8));
    std::memcpy(&b0, b + j, sizeof(v8));
    std::memcpy(&a1, a + j + 8, sizeof(v8));
    std::memcpy(&b1, b + j + 8, sizeof(v8));
    const v8 d0 = a0 - b0;
    const v8 d1 = a1 - b1;
    acc0 += d0 * d0;
    acc1 += d1 * d1;
  }
  acc0 += acc1;
  float tail = 0.0f;
  for (; j < n; ++j) tail += (a[j] - b[j]) * (a[j] - b[j]);
  return ((acc0[0] + acc0[4]) + (acc0[1] + acc0[5])) + ((acc0[2] + acc0[6]) + (acc0[3] + acc0[7])) + tail;
}

inline int hamming(const std::uint64_t* a, const std::uint64_t* b, int words) {
  int d = 0;
  for (int w = 0; w < words; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

template <int W>
inline int hamming_fixed(const std::uint64_t* a, const std::uint64_t* b) {
  int d = 0;
  for (int w = 0; w < W; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

}  // namespace coverscan::detail
