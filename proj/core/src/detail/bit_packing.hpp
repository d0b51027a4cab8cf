#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace coverscan::detail {

// Bit j of a descriptor goes to byte j / 8, most significant bit first.
inline void pack_bits_msb(std::span<const std::uint64_t> words, int bits, std::vector<std::uint8_t>& out) {
  const std::size_t start = out.size();
  out.resize(start + static_cast<std::size_t>((bits + 7) / 8), 0);
  for (int j = 0; j < bits; ++j) {
    if ((words[j >> 6] >> (j & 63)) & 1u) out[start + (j >> 3)] |= static_cast<std::uint8_t>(0x80u >> (j & 7));
  }
}

inline void unpack_bits_msb(const std::uint8_t* bytes, int bits, std::span<std::uint64_t> words) {
  for (auto& w : words) w = 0;
  for (int j = 0; j < bits; ++j) {
    if (bytes[j >> 3] & (0x80u >> (j & 7))) words[j >> 6] |= std::uint64_t{1} << (j & 63);
  }
}

}  // namespace coverscan::detail
