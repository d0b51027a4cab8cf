#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace coverscan {

/// Angle value meaning "orientation could not be determined".
inline constexpr float kUndefinedAngle = -1.0f;

struct Keypoint {
  float x = 0.0f;
  float y = 0.0f;
  float size = 0.0f;      ///< diameter in level-0 pixels
  float angle = 0.0f;     ///< radians in [0, 2pi), or kUndefinedAngle
  float response = 0.0f;  ///< detector saliency, >= 0
  int octave = 0;

  bool operator==(const Keypoint&) const = default;
};

enum class DescriptorKind : std::uint8_t { Float = 0, Binary = 1 };

/// Non-owning view of one descriptor row.
struct DescriptorRef {
  DescriptorKind kind = DescriptorKind::Float;
  int length = 0;  ///< dimensions (float) or bits (binary)
  std::span<const float> values;
  std::span<const std::uint64_t> bits;  ///< bit j lives at bits[j / 64] >> (j % 64)
};

/// One owned descriptor: a float vector or a bit string.
class Descriptor {
 public:
  Descriptor() = default;
  static Descriptor float_vector(std::vector<float> values);
  static Descriptor bit_string(int bit_length);

  DescriptorKind kind() const { return kind_; }
  int length() const { return length_; }
  bool bit(int j) const { return (words_[j >> 6] >> (j & 63)) & 1u; }
  void set_bit(int j, bool on);
  std::span<const float> values() const { return values_; }
  std::span<const std::uint64_t> words() const { return words_; }
  DescriptorRef ref() const { return {kind_, length_, values_, words_}; }

  bool operator==(const Descriptor&) const = default;

 private:
  DescriptorKind kind_ = DescriptorKind::Float;
  int length_ = 0;
  std::vector<float> values_;
  std::vector<std::uint64_t> words_;
};

inline int words_for_bits(int bits) { return (bits + 63) / 64; }

/// Block of equal-length descriptors stored contiguously.
class DescriptorSet {
 public:
  DescriptorSet() = default;
  DescriptorSet(DescriptorKind kind, int length);

  DescriptorKind kind() const { return kind_; }
  int length() const { return length_; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// uint64 words per binary row (0 for float sets).
  int words_per_row() const { return words_per_row_; }

  std::span<const float> float_row(std::size_t i) const {
    return {floats_.data() + i * static_cast<std::size_t>(length_), static_cast<std::size_t>(length_)};
  }
  std::span<const std::uint64_t> bit_row(std::size_t i) const {
    return {words_.data() + i * static_cast<std::size_t>(words_per_row_), static_cast<std::size_t>(words_per_row_)};
  }
  bool bit(std::size_t i, int j) const { return (bit_row(i)[j >> 6] >> (j & 63)) & 1u; }
  DescriptorRef row(std::size_t i) const;

  /// Appends a descriptor; throws InvalidArgument on kind/length mismatch.
  void push_back(const Descriptor& d);
  void push_back_floats(std::span<const float> values);
  void push_back_bits(std::span<const std::uint64_t> words);

  /// Keeps the rows listed in `order`, in that order.
  DescriptorSet select(std::span<const std::size_t> order) const;
  void reserve(std::size_t n);

  std::span<const float> float_data() const { return floats_; }
  std::span<const std::uint64_t> word_data() const { return words_; }

  bool operator==(const DescriptorSet&) const = default;

 private:
  DescriptorKind kind_ = DescriptorKind::Float;
  int length_ = 0;
  int words_per_row_ = 0;
  std::size_t count_ = 0;
  std::vector<float> floats_;
  std::vector<std::uint64_t> words_;
};

/// Detector output: keypoints aligned index-for-index with descriptors.
struct Features {
  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
  double extract_time = 0.0;  ///< seconds

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
};

/// Throws InvalidArgument when keypoint and descriptor counts differ.
void check_aligned(const Features& features);

}  // namespace coverscan
