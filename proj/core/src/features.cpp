#include "coverscan/features.hpp"

#include <string>

#include "coverscan/error.hpp"

namespace coverscan {

Descriptor Descriptor::float_vector(std::vector<float> values) {
  Descriptor d;
  d.kind_ = DescriptorKind::Float;
  d.length_ = static_cast<int>(values.size());
  d.values_ = std::move(values);
  return d;
}

Descriptor Descriptor::bit_string(int bit_length) {
  if (bit_length < 1) throw InvalidArgument("bit string length must be positive");
  Descriptor d;
  d.kind_ = DescriptorKind::Binary;
  d.length_ = bit_length;
  d.words_.assign(static_cast<std::size_t>(words_for_bits(bit_length)), 0);
  return d;
}

void Descriptor::set_bit(int j, bool on) {
  const std::uint64_t mask = std::uint64_t{1} << (j & 63);
  if (on) {
    words_[j >> 6] |= mask;
  } else {
    words_[j >> 6] &= ~mask;
  }
}

DescriptorSet::DescriptorSet(DescriptorKind kind, int length)
    : kind_(kind), length_(length), words_per_row_(kind == DescriptorKind::Binary ? words_for_bits(length) : 0) {
  if (length < 1) throw InvalidArgument("descriptor length must be positive");
}

DescriptorRef DescriptorSet::row(std::size_t i) const {
  DescriptorRef r{kind_, length_, {}, {}};
  if (kind_ == DescriptorKind::Float) {
    r.values = float_row(i);
  } else {
    r.bits = bit_row(i);
  }
  return r;
}

void DescriptorSet::push_back(const Descriptor& d) {
  if (d.kind() != kind_ || d.length() != length_) {
    throw InvalidArgument("descriptor kind/length does not match set (expected length " + std::to_string(length_) +
                          ", got " + std::to_string(d.length()) + ")");
  }
  if (kind_ == DescriptorKind::Float) {
    push_back_floats(d.values());
  } else {
    push_back_bits(d.words());
  }
}

void DescriptorSet::push_back_floats(std::span<const float> values) {
  if (kind_ != DescriptorKind::Float || values.size() != static_cast<std::size_t>(length_)) {
    throw InvalidArgument("float descriptor does not match set");
  }
  floats_.insert(floats_.end(), values.begin(), values.end());
  ++count_;
}

void DescriptorSet::push_back_bits(std::span<const std::uint64_t> words) {
  if (kind_ != DescriptorKind::Binary || words.size() != static_cast<std::size_t>(words_per_row_)) {
    throw InvalidArgument("binary descriptor does not match set");
  }
  words_.insert(words_.end(), words.begin(), words.end());
  // Bits past the declared length must stay zero for Hamming distances.
  const int tail = length_ & 63;
  if (tail != 0) words_.back() &= (std::uint64_t{1} << tail) - 1;
  ++count_;
}

DescriptorSet DescriptorSet::select(std::span<const std::size_t> order) const {
  DescriptorSet out(kind_, length_);
  out.reserve(order.size());
  for (std::size_t i : order) {
    if (i >= count_) throw InvalidArgument("descriptor index out of range");
    if (kind_ == DescriptorKind::Float) {
      out.push_back_floats(float_row(i));
    } else {
      out.push_back_bits(bit_row(i));
    }
  }
  return out;
}

void DescriptorSet::reserve(std::size_t n) {
  if (kind_ == DescriptorKind::Float) {
    floats_.reserve(n * static_cast<std::size_t>(length_));
  } else {
    words_.reserve(n * static_cast<std::size_t>(words_per_row_));
  }
}

void check_aligned(const Features& features) {
  if (features.keypoints.size() != features.descriptors.size()) {
    throw InvalidArgument("keypoint and descriptor counts differ");
  }
}

}  // namespace coverscan
