#pragma once

#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "coverscan/akaze.hpp"
#include "coverscan/features.hpp"
#include "coverscan/image.hpp"
#include "coverscan/orb.hpp"
#include "coverscan/sift.hpp"
#include "coverscan/surf.hpp"

namespace coverscan {

enum class DetectorKind : std::uint8_t { Sift = 0, Surf = 1, Orb = 2, Akaze = 3 };

inline constexpr DetectorKind kAllDetectors[] = {DetectorKind::Sift, DetectorKind::Surf, DetectorKind::Orb,
                                                 DetectorKind::Akaze};

/// Lower-case name: "sift", "surf", "orb", "akaze".
std::string_view detector_name(DetectorKind kind);
/// Inverse of detector_name (case-insensitive); throws InvalidArgument.
DetectorKind parse_detector(std::string_view name);

/// A detector together with its full parameter set.
class DetectorConfig {
 public:
  using Params = std::variant<SiftParams, SurfParams, OrbParams, AkazeParams>;

  DetectorConfig() : DetectorConfig(DetectorKind::Akaze) {}
  explicit DetectorConfig(DetectorKind kind);
  /// Validates the parameters.
  DetectorConfig(Params params);

  DetectorKind kind() const { return static_cast<DetectorKind>(params_.index()); }
  std::string_view name() const { return detector_name(kind()); }
  const Params& params() const { return params_; }

  template <class P>
  const P& get() const {
    return std::get<P>(params_);
  }

  DescriptorKind descriptor_kind() const;
  /// Dimensions (float) or bits (binary) of every descriptor this config emits.
  int descriptor_length() const;

  /// {"detector": name, "params": {...}} with every field spelled out.
  nlohmann::json to_json() const;
  /// Accepts partial "params" objects; missing fields keep their defaults.
  /// Throws FormatError on unknown detectors or fields, InvalidArgument on
  /// out-of-range values.
  static DetectorConfig from_json(const nlohmann::json& j);

  bool operator==(const DetectorConfig&) const = default;

 private:
  Params params_;
};

/// Runs the configured detector.
Features extract_features(const GrayImage& image, const DetectorConfig& config);

}  // namespace coverscan
