#include "coverscan/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "coverscan/error.hpp"

namespace coverscan {
namespace {

struct Canvas {
  Homography shift;
  int width;
  int height;
};

// Smallest canvas holding the image of the source corners, and the
// translation that moves its top-left corner to the origin.
Canvas bounding_canvas(const std::array<Point2, 4>& corners) {
  double x0 = corners[0].x, x1 = corners[0].x, y0 = corners[0].y, y1 = corners[0].y;
  for (const Point2& p : corners) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double ox = std::floor(x0);
  const double oy = std::floor(y0);
  return {Homography::translation(-ox, -oy), static_cast<int>(std::ceil(x1 - ox)) + 1,
          static_cast<int>(std::ceil(y1 - oy)) + 1};
}

std::array<Point2, 4> image_corners(int w, int h) {
  return {Point2{0, 0}, Point2{w - 1.0, 0}, Point2{w - 1.0, h - 1.0}, Point2{0, h - 1.0}};
}

std::array<Point2, 4> raw_viewpoint_targets(int w, int h, double shift, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto corners = image_corners(w, h);
  for (Point2& p : corners) {
    p.x += u(rng) * shift * w;
    p.y += u(rng) * shift * h;
  }
  return corners;
}

}  // namespace

std::string_view transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::Rotate45:
      return "rotate45";
    case TransformKind::Rotate90:
      return "rotate90";
    case TransformKind::Crop:
      return "crop";
    case TransformKind::Illumination:
      return "illumination";
    case TransformKind::Scale:
      return "scale";
    case TransformKind::Viewpoint:
      return "viewpoint";
  }
  throw InvalidArgument("unknown transform kind");
}

std::string_view transform_suffix(TransformKind kind) {
  switch (kind) {
    case TransformKind::Rotate45:
      return "rot45";
    case TransformKind::Rotate90:
      return "rot90";
    case TransformKind::Crop:
      return "crop";
    case TransformKind::Illumination:
      return "illum";
    case TransformKind::Scale:
      return "scale";
    case TransformKind::Viewpoint:
      return "view";
  }
  throw InvalidArgument("unknown transform kind");
}

TransformKind parse_transform(std::string_view name) {
  for (TransformKind k : kAllTransforms) {
    if (name == transform_name(k) || name == transform_suffix(k)) return k;
  }
  throw InvalidArgument("unknown transform '" + std::string(name) + "'");
}

void TransformParams::validate() const {
  if (!(crop_fraction > 0.0 && crop_fraction <= 1.0)) throw InvalidArgument("crop fraction must lie in (0, 1]");
  if (!(scale > 0.0)) throw InvalidArgument("scale factor must be positive");
  if (!(gain > 0.0) || !(gamma > 0.0)) throw InvalidArgument("gain and gamma must be positive");
  if (!(viewpoint_shift >= 0.0 && viewpoint_shift <= 0.45)) {
    throw InvalidArgument("viewpoint shift must lie in [0, 0.45]");
  }
  if (!std::isfinite(rotate_degrees)) throw InvalidArgument("rotation angle must be finite");
}

nlohmann::json TransformParams::to_json() const {
  return {{"rotate_degrees", rotate_degrees}, {"crop_fraction", crop_fraction}, {"gain", gain},
          {"gamma", gamma},                   {"scale", scale},                 {"viewpoint_shift", viewpoint_shift}};
}

GrayImage rotate90(const GrayImage& image) {
  const int w = image.width();
  const int h = image.height();
  Raster out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(h - 1 - y, x) = image(x, y);
  }
  return GrayImage::from_raster(std::move(out));
}

std::array<Point2, 4> viewpoint_corners(int width, int height, double shift, std::uint64_t seed) {
  auto targets = raw_viewpoint_targets(width, height, shift, seed);
  const Canvas canvas = bounding_canvas(targets);
  for (Point2& p : targets) p = canvas.shift.apply(p);
  return targets;
}

TransformResult apply_transform(const GrayImage& image, TransformKind kind, const TransformParams& params,
                                std::uint64_t seed) {
  params.validate();
  if (image.empty()) throw InvalidArgument("cannot transform an empty image");
  const int w = image.width();
  const int h = image.height();
  switch (kind) {
    case TransformKind::Rotate90:
      return {rotate90(image), Homography({0, -1, h - 1.0, 1, 0, 0, 0, 0, 1}), std::nullopt};

    case TransformKind::Rotate45: {
      const double a = params.rotate_degrees * std::numbers::pi / 180.0;
      const Homography about_origin =
          Homography::rotation(a) * Homography::translation(-(w - 1) / 2.0, -(h - 1) / 2.0);
      std::array<Point2, 4> corners = image_corners(w, h);
      for (Point2& p : corners) p = about_origin.apply(p);
      const Canvas canvas = bounding_canvas(corners);
      const Homography H = canvas.shift * about_origin;
      return {warp_homography(image, H, canvas.width, canvas.height), H, std::nullopt};
    }

    case TransformKind::Crop: {
      const int cw = std::max(1, static_cast<int>(std::lround(params.crop_fraction * w)));
      const int ch = std::max(1, static_cast<int>(std::lround(params.crop_fraction * h)));
      const CropBox box{(w - cw) / 2, (h - ch) / 2, cw, ch};
      Raster out(cw, ch);
      for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) out(x, y) = image(box.x + x, box.y + y);
      }
      return {GrayImage::from_raster(std::move(out)), Homography::translation(-box.x, -box.y), box};
    }

    case TransformKind::Illumination: {
      Raster out(w, h);
      auto src = image.data();
      auto dst = out.data();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = std::min(1.0, params.gain * src[i]);
        dst[i] = static_cast<float>(std::clamp(std::pow(v, params.gamma), 0.0, 1.0));
      }
      return {GrayImage::from_raster(std::move(out)), Homography(), std::nullopt};
    }

    case TransformKind::Scale: {
      const double s = params.scale;
      const int ow = std::max(1, static_cast<int>(std::lround(s * w)));
      const int oh = std::max(1, static_cast<int>(std::lround(s * h)));
      // Pixel-centre alignment: x' = s (x + 0.5) - 0.5.
      const Homography H({s, 0, 0.5 * s - 0.5, 0, s, 0.5 * s - 0.5, 0, 0, 1});
      const GrayImage source = s < 1.0 ? gaussian_blur(image, 0.5 * std::sqrt(1.0 / (s * s) - 1.0)) : image;
      return {warp_homography(source, H, ow, oh), H, std::nullopt};
    }

    case TransformKind::Viewpoint: {
      const auto targets = raw_viewpoint_targets(w, h, params.viewpoint_shift, seed);
      const Canvas canvas = bounding_canvas(targets);
      const auto src = image_corners(w, h);
      const Homography H = canvas.shift * Homography::from_correspondences(src, targets);
      return {warp_homography(image, H, canvas.width, canvas.height), H, std::nullopt};
    }
  }
  throw InvalidArgument("unknown transform kind");
}

}  // namespace coverscan
