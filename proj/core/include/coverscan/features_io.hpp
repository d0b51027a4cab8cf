#pragma once

#include <filesystem>
#include <iosfwd>

#include "coverscan/detector.hpp"
#include "coverscan/features.hpp"

namespace coverscan {

/// Features plus the configuration that produced them.
struct FeatureFile {
  DetectorConfig config;
  Features features;
};

/// JSON Lines: a header object ({"format": "coverscan-features", "version",
/// "detector", "params", "descriptor_kind", "descriptor_length", "count"})
/// followed by one object per keypoint with x, y, size, angle, response,
/// octave and "descriptor": a float list, or for binary descriptors a hex
/// string of the packed bytes (most significant bit first).
void write_features(std::ostream& out, const FeatureFile& file);
void write_features(const std::filesystem::path& path, const FeatureFile& file);

/// Throws FormatError on malformed input, IoError when unreadable.
FeatureFile read_features(std::istream& in);
FeatureFile read_features(const std::filesystem::path& path);

}  // namespace coverscan
