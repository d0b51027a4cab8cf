#include "coverscan/detector.hpp"

#include <algorithm>
#include <cctype>

#include "coverscan/error.hpp"

namespace coverscan {
namespace {

template <class P>
void read_field(const nlohmann::json& j, const char* key, P& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<P>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw FormatError("unknown detector parameter '" + key + "'");
    }
  }
}

nlohmann::json params_json(const SiftParams& p) {
  return {{"octaves", p.octaves},
          {"scales_per_octave", p.scales_per_octave},
          {"base_sigma", p.base_sigma},
          {"contrast_threshold", p.contrast_threshold},
          {"edge_ratio", p.edge_ratio},
          {"double_input", p.double_input}};
}

nlohmann::json params_json(const SurfParams& p) {
  return {{"octaves", p.octaves},
          {"layers_per_octave", p.layers_per_octave},
          {"hessian_threshold", p.hessian_threshold}};
}

nlohmann::json params_json(const OrbParams& p) {
  return {{"n_features", p.n_features},
          {"fast_threshold", p.fast_threshold},
          {"pyramid_levels", p.pyramid_levels},
          {"scale_factor", p.scale_factor},
          {"patch_size", p.patch_size}};
}

nlohmann::json params_json(const AkazeParams& p) {
  return {{"octaves", p.octaves},
          {"sublevels", p.sublevels},
          {"contrast_percentile", p.contrast_percentile},
          {"detector_threshold", p.detector_threshold},
          {"descriptor_channels", p.descriptor_channels}};
}

SiftParams sift_from(const nlohmann::json& j) {
  reject_unknown(j, {"octaves", "scales_per_octave", "base_sigma", "contrast_threshold", "edge_ratio",
                     "double_input"});
  SiftParams p;
  read_field(j, "octaves", p.octaves);
  read_field(j, "scales_per_octave", p.scales_per_octave);
  read_field(j, "base_sigma", p.base_sigma);
  read_field(j, "contrast_threshold", p.contrast_threshold);
  read_field(j, "edge_ratio", p.edge_ratio);
  read_field(j, "double_input", p.double_input);
  return p;
}

SurfParams surf_from(const nlohmann::json& j) {
  reject_unknown(j, {"octaves", "layers_per_octave", "hessian_threshold"});
  SurfParams p;
  read_field(j, "octaves", p.octaves);
  read_field(j, "layers_per_octave", p.layers_per_octave);
  read_field(j, "hessian_threshold", p.hessian_threshold);
  return p;
}

OrbParams orb_from(const nlohmann::json& j) {
  reject_unknown(j, {"n_features", "fast_threshold", "pyramid_levels", "scale_factor", "patch_size"});
  OrbParams p;
  read_field(j, "n_features", p.n_features);
  read_field(j, "fast_threshold", p.fast_threshold);
  read_field(j, "pyramid_levels", p.pyramid_levels);
  read_field(j, "scale_factor", p.scale_factor);
  read_field(j, "patch_size", p.patch_size);
  return p;
}

AkazeParams akaze_from(const nlohmann::json& j) {
  reject_unknown(j, {"octaves", "sublevels", "contrast_percentile", "detector_threshold", "descriptor_channels"});
  AkazeParams p;
  read_field(j, "octaves", p.octaves);
  read_field(j, "sublevels", p.sublevels);
  read_field(j, "contrast_percentile", p.contrast_percentile);
  read_field(j, "detector_threshold", p.detector_threshold);
  read_field(j, "descriptor_channels", p.descriptor_channels);
  return p;
}

}  // namespace

std::string_view detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Sift:
      return "sift";
    case DetectorKind::Surf:
      return "surf";
    case DetectorKind::Orb:
      return "orb";
    case DetectorKind::Akaze:
      return "akaze";
  }
  throw InvalidArgument("unknown detector kind");
}

DetectorKind parse_detector(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (DetectorKind k : kAllDetectors) {
    if (detector_name(k) == lower) return k;
  }
  throw InvalidArgument("unknown detector '" + std::string(name) + "' (expected sift, surf, orb or akaze)");
}

DetectorConfig::DetectorConfig(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Sift:
      params_ = SiftParams{};
      break;
    case DetectorKind::Surf:
      params_ = SurfParams{};
      break;
    case DetectorKind::Orb:
      params_ = OrbParams{};
      break;
    case DetectorKind::Akaze:
      params_ = AkazeParams{};
      break;
  }
}

DetectorConfig::DetectorConfig(Params params) : params_(std::move(params)) {
  std::visit([](const auto& p) { p.validate(); }, params_);
}

DescriptorKind DetectorConfig::descriptor_kind() const {
  const DetectorKind k = kind();
  return k == DetectorKind::Sift || k == DetectorKind::Surf ? DescriptorKind::Float : DescriptorKind::Binary;
}

int DetectorConfig::descriptor_length() const {
  switch (kind()) {
    case DetectorKind::Sift:
      return kSiftDescriptorLength;
    case DetectorKind::Surf:
      return kSurfDescriptorLength;
    case DetectorKind::Orb:
      return kBriefBits;
    case DetectorKind::Akaze:
      return mldb_bits(get<AkazeParams>().descriptor_channels);
  }
  return 0;
}

nlohmann::json DetectorConfig::to_json() const {
  return {{"detector", std::string(name())}, {"params", std::visit([](const auto& p) { return params_json(p); }, params_)}};
}

DetectorConfig DetectorConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("detector") || !j.at("detector").is_string()) {
    throw FormatError("detector config needs a string 'detector' field");
  }
  DetectorKind kind;
  try {
    kind = parse_detector(j.at("detector").get<std::string>());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  const nlohmann::json params = j.value("params", nlohmann::json::object());
  if (!params.is_object()) throw FormatError("detector 'params' must be an object");
  switch (kind) {
    case DetectorKind::Sift:
      return DetectorConfig(sift_from(params));
    case DetectorKind::Surf:
      return DetectorConfig(surf_from(params));
    case DetectorKind::Orb:
      return DetectorConfig(orb_from(params));
    case DetectorKind::Akaze:
      return DetectorConfig(akaze_from(params));
  }
  throw FormatError("unknown detector");
}

Features extract_features(const GrayImage& image, const DetectorConfig& config) {
  return std::visit(
      [&](const auto& p) -> Features {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SiftParams>) {
          return sift_detect(image, p);
        } else if constexpr (std::is_same_v<P, SurfParams>) {
          return surf_detect(image, p);
        } else if constexpr (std::is_same_v<P, OrbParams>) {
          return orb_detect(image, p);
        } else {
          return akaze_detect(image, p);
        }
      },
      config.params());
}

}  // namespace coverscan
