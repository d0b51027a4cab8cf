#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "coverscan/homography.hpp"
#include "coverscan/image.hpp"

namespace coverscan {

enum class TransformKind : std::uint8_t { Rotate45, Rotate90, Crop, Illumination, Scale, Viewpoint };

inline constexpr TransformKind kAllTransforms[] = {TransformKind::Rotate45,     TransformKind::Rotate90,
                                                   TransformKind::Crop,         TransformKind::Illumination,
                                                   TransformKind::Scale,        TransformKind::Viewpoint};

/// "rotate45", "rotate90", "crop", "illumination", "scale", "viewpoint".
std::string_view transform_name(TransformKind kind);
/// File-name suffix: "rot45", "rot90", "crop", "illum", "scale", "view".
std::string_view transform_suffix(TransformKind kind);
/// Accepts either the name or the suffix; throws InvalidArgument.
TransformKind parse_transform(std::string_view name);

struct TransformParams {
  double rotate_degrees = 45.0;
  double crop_fraction = 0.6;    ///< kept share of each side, in (0, 1]
  double gain = 1.3;
  double gamma = 0.8;
  double scale = 0.5;            ///< > 0
  double viewpoint_shift = 0.15; ///< max corner displacement as a share of the side, in [0, 0.45]

  void validate() const;
  nlohmann::json to_json() const;
  bool operator==(const TransformParams&) const = default;
};

struct CropBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool operator==(const CropBox&) const = default;
};

/// Transformed image plus ground truth. `homography` maps reference pixel
/// coordinates to test pixel coordinates for every kind (identity for
/// illumination, a translation for crop); `crop` is set for crops only.
struct TransformResult {
  GrayImage image;
  Homography homography;
  std::optional<CropBox> crop;
};

/// Exact pixel permutation (x, y) -> (h - 1 - y, x).
GrayImage rotate90(const GrayImage& image);

/// Perturbed corner targets of the viewpoint warp, in output-canvas
/// coordinates, for the corners (0,0), (w-1,0), (w-1,h-1), (0,h-1).
std::array<Point2, 4> viewpoint_corners(int width, int height, double shift, std::uint64_t seed);

/// Applies one of the six transforms. `seed` only affects the viewpoint
/// perturbation. Throws InvalidArgument on invalid params.
TransformResult apply_transform(const GrayImage& image, TransformKind kind, const TransformParams& params = {},
                                std::uint64_t seed = 42);

}  // namespace coverscan
