#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "coverscan/error.hpp"
#include "coverscan/image.hpp"

namespace coverscan {
namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading image '" + path.string() + "'");
  return bytes;
}

// Reads one whitespace-delimited decimal token from a PNM header, skipping
// '#' comments.
long pnm_header_int(const std::vector<unsigned char>& bytes, std::size_t& pos, const std::string& what) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  long value = 0;
  std::size_t digits = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000'000L) throw FormatError("PNM header value too large");
    ++pos;
    ++digits;
  }
  if (digits == 0) throw FormatError("malformed PNM header: missing " + what);
  return value;
}

GrayImage decode_pnm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  const bool color = bytes[1] == '6';
  std::size_t pos = 2;
  const long width = pnm_header_int(bytes, pos, "width");
  const long height = pnm_header_int(bytes, pos, "height");
  const long maxval = pnm_header_int(bytes, pos, "maxval");
  if (width < 1 || height < 1) throw FormatError("zero-dimension image '" + path.string() + "'");
  if (maxval < 1 || maxval > 65535) throw FormatError("unsupported PNM maxval in '" + path.string() + "'");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("malformed PNM header");
  ++pos;  // exactly one whitespace byte before the raster

  const std::size_t channels = color ? 3 : 1;
  const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() - pos < count * channels * sample_bytes) {
    throw FormatError("truncated PNM raster in '" + path.string() + "'");
  }

  auto sample = [&](std::size_t i) -> double {
    if (sample_bytes == 1) return bytes[pos + i];
    return (bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1];
  };
  Raster raster(static_cast<int>(width), static_cast<int>(height));
  auto out = raster.data();
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    double v;
    if (color) {
      v = kLumaR * sample(3 * i) + kLumaG * sample(3 * i + 1) + kLumaB * sample(3 * i + 2);
    } else {
      v = sample(i);
    }
    out[i] = static_cast<float>(v * scale);
  }
  return GrayImage::clamped(std::move(raster));
}

GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw FormatError("zero-dimension image '" + path.string() + "'");
  }
  // Gray sources expand to R=G=B, so the luma weights (summing to 1) return
  // the original gray level.
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message);
  }

  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  Raster raster(width, height);
  for (int y = 0; y < height; ++y) {
    const unsigned char* src = pixels.data() + static_cast<std::size_t>(y) * width * 3;
    float* dst = raster.row(y);
    for (int x = 0; x < width; ++x) {
      const double v = kLumaR * src[3 * x] + kLumaG * src[3 * x + 1] + kLumaB * src[3 * x + 2];
      dst[x] = static_cast<float>(v / 255.0);
    }
  }
  return GrayImage::clamped(std::move(raster));
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_all(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return decode_pnm(bytes, path);
  }
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return decode_png(bytes, path);
  }
  throw FormatError("unsupported image format '" + path.string() + "' (expected binary PGM/PPM or PNG)");
}

void save_pgm(const GrayImage& image, const std::filesystem::path& path) {
  if (image.empty()) throw InvalidArgument("cannot save an empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> bytes(image.data().size());
  std::size_t i = 0;
  for (float v : image.data()) bytes[i++] = static_cast<unsigned char>(std::lround(v * 255.0f));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace coverscan
