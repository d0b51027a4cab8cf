#pragma once

#include <cstdint>

#include "coverscan/image.hpp"

namespace coverscan {

struct CoverStyle {
  int photo_panels = 1;   ///< rectangles of multi-octave value noise
  double photo_contrast = 0.9;
  int shapes = 14;        ///< filled rectangles and ellipses
  int title_lines = 3;    ///< large glyph rows
  int body_lines = 10;    ///< small glyph rows
  double grain = 0.08;    ///< amplitude of the smooth paper texture
  double blur_sigma = 0.7;
};

/// Deterministic synthetic book cover: a gradient background, photograph-like
/// noise panels, flat and shaded shapes, and rows of stroked glyphs drawn
/// from one shared 64-glyph alphabet, so different covers reuse the same
/// letter shapes as real printed covers do. Same seed, same image, bit for bit.
GrayImage synth_cover(int width, int height, std::uint64_t seed, const CoverStyle& style = {});

}  // namespace coverscan
