#include "coverscan/features_io.hpp"

#include <fstream>
#include <string>

#include "coverscan/error.hpp"
#include "detail/bit_packing.hpp"

namespace coverscan {
namespace {

constexpr const char* kFormat = "coverscan-features";
constexpr int kVersion = 1;
constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

nlohmann::json parse_line(const std::string& line, std::size_t number) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("features line " + std::to_string(number) + ": " + e.what());
  }
}

}  // namespace

void write_features(std::ostream& out, const FeatureFile& file) {
  const Features& f = file.features;
  check_aligned(f);
  const DescriptorSet& d = f.descriptors;
  if (!f.empty() && (d.kind() != file.config.descriptor_kind() || d.length() != file.config.descriptor_length())) {
    throw ConfigMismatchError("descriptors do not match the detector configuration");
  }
  nlohmann::json header = file.config.to_json();
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["descriptor_kind"] = file.config.descriptor_kind() == DescriptorKind::Float ? "float" : "binary";
  header["descriptor_length"] = file.config.descriptor_length();
  header["count"] = f.size();
  out << header.dump() << '\n';

  std::vector<std::uint8_t> packed;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Keypoint& kp = f.keypoints[i];
    nlohmann::json rec = {{"x", kp.x},         {"y", kp.y},
                          {"size", kp.size},   {"angle", kp.angle},
                          {"response", kp.response}, {"octave", kp.octave}};
    if (d.kind() == DescriptorKind::Float) {
      const auto row = d.float_row(i);
      rec["descriptor"] = std::vector<float>(row.begin(), row.end());
    } else {
      packed.clear();
      detail::pack_bits_msb(d.bit_row(i), d.length(), packed);
      std::string hex;
      hex.reserve(packed.size() * 2);
      for (std::uint8_t b : packed) {
        hex.push_back(kHex[b >> 4]);
        hex.push_back(kHex[b & 15]);
      }
      rec["descriptor"] = hex;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("failed writing features");
}

void write_features(const std::filesystem::path& path, const FeatureFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_features(out, file);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FeatureFile read_features(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("features file is empty");
  const nlohmann::json header = parse_line(line, 1);
  if (!header.is_object() || header.value("format", "") != kFormat) throw FormatError("not a coverscan features file");
  if (header.value("version", -1) != kVersion) throw FormatError("unsupported features file version");

  FeatureFile file{DetectorConfig::from_json(header), {}};
  const DescriptorKind kind = file.config.descriptor_kind();
  const int length = file.config.descriptor_length();
  std::size_t count = 0;
  try {
    count = header.at("count").get<std::size_t>();
    if (header.at("descriptor_length").get<int>() != length) throw FormatError("descriptor length disagrees with params");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("features header: ") + e.what());
  }

  Features& f = file.features;
  f.descriptors = DescriptorSet(kind, length);
  f.keypoints.reserve(count);
  f.descriptors.reserve(count);
  std::vector<std::uint64_t> words(static_cast<std::size_t>(words_for_bits(length)));
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>((length + 7) / 8));
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw FormatError("features file ends after " + std::to_string(i) + " records");
    const nlohmann::json rec = parse_line(line, i + 2);
    try {
      Keypoint kp;
      kp.x = rec.at("x").get<float>();
      kp.y = rec.at("y").get<float>();
      kp.size = rec.at("size").get<float>();
      kp.angle = rec.at("angle").get<float>();
      kp.response = rec.at("response").get<float>();
      kp.octave = rec.at("octave").get<int>();
      f.keypoints.push_back(kp);
      if (kind == DescriptorKind::Float) {
        const auto values = rec.at("descriptor").get<std::vector<float>>();
        if (static_cast<int>(values.size()) != length) throw FormatError("wrong descriptor length");
        f.descriptors.push_back_floats(values);
      } else {
        const auto hex = rec.at("descriptor").get<std::string>();
        if (hex.size() != bytes.size() * 2) throw FormatError("wrong descriptor length");
        for (std::size_t b = 0; b < bytes.size(); ++b) {
          const int hi = hex_value(hex[2 * b]);
          const int lo = hex_value(hex[2 * b + 1]);
          if (hi < 0 || lo < 0) throw FormatError("bad hex digit in descriptor");
          bytes[b] = static_cast<std::uint8_t>(hi << 4 | lo);
        }
        detail::unpack_bits_msb(bytes.data(), length, words);
        f.descriptors.push_back_bits(words);
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("features record " + std::to_string(i) + ": " + e.what());
    }
  }
  return file;
}

FeatureFile read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_features(in);
}

}  // namespace coverscan
