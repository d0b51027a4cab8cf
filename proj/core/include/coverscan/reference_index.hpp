#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "coverscan/ann_index.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/features.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct ReferenceEntry {
  std::uint32_t id = 0;
  std::string name;
  Features features;
};

/// Reference covers described with one detector configuration.
class ReferenceIndex {
 public:
  explicit ReferenceIndex(DetectorConfig config = DetectorConfig(), std::uint64_t seed = kDefaultSeed);

  const DetectorConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  /// ANN parameters used by build_ann; their seed follows seed().
  const AnnParams& ann_params() const { return ann_params_; }
  void set_ann_params(const AnnParams& params);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ReferenceEntry>& entries() const { return entries_; }
  const ReferenceEntry& entry(std::size_t i) const { return entries_.at(i); }

  /// Appends precomputed features under the next id. Throws NoFeaturesError
  /// when empty and ConfigMismatchError when the descriptors do not fit the
  /// configured detector.
  std::uint32_t add(std::string name, Features features);

  /// Builds one ANN index per entry (replacing any previous ones).
  void build_ann();
  bool has_ann() const { return !ann_.empty() && ann_.size() == entries_.size(); }
  const AnnIndex& ann(std::size_t i) const { return ann_.at(i); }

  /// Compares config, seed, ANN params and every entry field except timing.
  bool same_content(const ReferenceIndex& other) const;

 private:
  DetectorConfig config_;
  std::uint64_t seed_;
  AnnParams ann_params_;
  std::vector<ReferenceEntry> entries_;
  std::vector<AnnIndex> ann_;
};

/// Extracts with the index's detector and appends; returns the new id.
/// Throws NoFeaturesError when the image yields no keypoints.
std::uint32_t db_add_reference(ReferenceIndex& index, std::string name, const GrayImage& image);

/// Binary index file: "CVRIDX", version byte 0x01, u32 header length, JSON
/// header (detector, params, entry_count, descriptor_kind,
/// descriptor_length, seed, ann), the entries, then a CRC-32 of everything
/// between the version byte and the checksum. All integers and floats are
/// little-endian.
void db_save(const ReferenceIndex& index, const std::filesystem::path& path);
std::vector<std::uint8_t> db_serialize(const ReferenceIndex& index);

/// Throws IoError, FormatError (bad magic or header), VersionError (unknown
/// version byte) or CorruptFileError (checksum failure, truncation).
ReferenceIndex db_load(const std::filesystem::path& path);
ReferenceIndex db_deserialize(std::span<const std::uint8_t> bytes);

}  // namespace coverscan
