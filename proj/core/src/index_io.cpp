#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "coverscan/error.hpp"
#include "coverscan/reference_index.hpp"
#include "detail/bit_packing.hpp"

namespace coverscan {
namespace {

constexpr char kMagic[6] = {'C', 'V', 'R', 'I', 'D', 'X'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::size_t kPrefix = sizeof(kMagic) + 1;

class Writer {
 public:
  std::vector<std::uint8_t>& bytes() { return out_; }

  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::uint8_t* take(std::size_t n) {
    if (n > remaining()) throw CorruptFileError("index file ends inside a record");
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

nlohmann::json ann_json(const AnnParams& p) {
  return {{"trees", p.trees},   {"checks", p.checks},     {"leaf_size", p.leaf_size},
          {"tables", p.tables}, {"key_bits", p.key_bits}, {"probe_radius", p.probe_radius}};
}

AnnParams ann_from(const nlohmann::json& j, std::uint64_t seed) {
  AnnParams p;
  p.trees = j.at("trees").get<int>();
  p.checks = j.at("checks").get<int>();
  p.leaf_size = j.at("leaf_size").get<int>();
  p.tables = j.at("tables").get<int>();
  p.key_bits = j.at("key_bits").get<int>();
  p.probe_radius = j.at("probe_radius").get<int>();
  p.seed = seed;
  return p;
}

}  // namespace

std::vector<std::uint8_t> db_serialize(const ReferenceIndex& index) {
  const DetectorConfig& config = index.config();
  nlohmann::json header = config.to_json();
  header["entry_count"] = index.size();
  header["descriptor_kind"] = config.descriptor_kind() == DescriptorKind::Float ? "float" : "binary";
  header["descriptor_length"] = config.descriptor_length();
  header["seed"] = index.seed();
  header["ann"] = ann_json(index.ann_params());
  const std::string text = header.dump();

  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.bytes().push_back(kVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text.data(), text.size());
  for (const ReferenceEntry& e : index.entries()) {
    w.u32(e.id);
    w.u32(static_cast<std::uint32_t>(e.name.size()));
    w.raw(e.name.data(), e.name.size());
    const Features& f = e.features;
    w.u32(static_cast<std::uint32_t>(f.size()));
    for (const Keypoint& kp : f.keypoints) {
      w.f32(kp.x);
      w.f32(kp.y);
      w.f32(kp.size);
      w.f32(kp.angle);
      w.f32(kp.response);
      w.i32(kp.octave);
    }
    const DescriptorSet& d = f.descriptors;
    if (d.kind() == DescriptorKind::Float) {
      for (float v : d.float_data()) w.f32(v);
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) detail::pack_bits_msb(d.bit_row(i), d.length(), w.bytes());
    }
  }
  const auto& bytes = w.bytes();
  w.u32(crc32_of(bytes.data() + kPrefix, bytes.size() - kPrefix));
  return std::move(w.bytes());
}

void db_save(const ReferenceIndex& index, const std::filesystem::path& path) {
  const auto bytes = db_serialize(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ReferenceIndex db_deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a coverscan index (bad magic)");
  }
  if (bytes.size() < kPrefix) throw CorruptFileError("index file ends before the version byte");
  if (bytes[sizeof(kMagic)] != kVersion) {
    throw VersionError("unsupported index format version " + std::to_string(bytes[sizeof(kMagic)]));
  }
  if (bytes.size() < kPrefix + 8) throw CorruptFileError("index file is truncated");
  const std::size_t body_end = bytes.size() - 4;
  Reader tail(bytes.subspan(body_end));
  if (tail.u32() != crc32_of(bytes.data() + kPrefix, body_end - kPrefix)) {
    throw CorruptFileError("index checksum mismatch (corrupt or truncated file)");
  }

  Reader r(bytes.subspan(kPrefix, body_end - kPrefix));
  const std::uint32_t header_len = r.u32();
  const auto* header_bytes = r.take(header_len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_bytes, header_bytes + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("index header: ") + e.what());
  }
  const DetectorConfig config = DetectorConfig::from_json(header);
  std::size_t count = 0;
  std::uint64_t seed = kDefaultSeed;
  AnnParams ann;
  try {
    count = header.at("entry_count").get<std::size_t>();
    seed = header.at("seed").get<std::uint64_t>();
    ann = ann_from(header.at("ann"), seed);
    const bool is_float = header.at("descriptor_kind").get<std::string>() == "float";
    if (is_float != (config.descriptor_kind() == DescriptorKind::Float) ||
        header.at("descriptor_length").get<int>() != config.descriptor_length()) {
      throw FormatError("index header descriptor layout disagrees with the detector params");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("index header: ") + e.what());
  }

  ReferenceIndex index(config, seed);
  index.set_ann_params(ann);
  const DescriptorKind kind = config.descriptor_kind();
  const int length = config.descriptor_length();
  const std::size_t packed_row = static_cast<std::size_t>((length + 7) / 8);
  std::vector<std::uint64_t> words(static_cast<std::size_t>(words_for_bits(length)));
  std::vector<float> values(static_cast<std::size_t>(length));
  for (std::size_t e = 0; e < count; ++e) {
    const std::uint32_t id = r.u32();
    if (id != e) throw CorruptFileError("index entry ids are not sequential");
    const std::uint32_t name_len = r.u32();
    const auto* name = r.take(name_len);
    const std::uint32_t n = r.u32();
    const std::size_t row_bytes = kind == DescriptorKind::Float ? 4 * static_cast<std::size_t>(length) : packed_row;
    if (static_cast<std::size_t>(n) * (24 + row_bytes) > r.remaining()) {
      throw CorruptFileError("index entry is longer than the file");
    }
    Features f;
    f.keypoints.resize(n);
    for (Keypoint& kp : f.keypoints) {
      kp.x = r.f32();
      kp.y = r.f32();
      kp.size = r.f32();
      kp.angle = r.f32();
      kp.response = r.f32();
      kp.octave = r.i32();
    }
    f.descriptors = DescriptorSet(kind, length);
    f.descriptors.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      if (kind == DescriptorKind::Float) {
        for (float& v : values) v = r.f32();
        f.descriptors.push_back_floats(values);
      } else {
        detail::unpack_bits_msb(r.take(packed_row), length, words);
        f.descriptors.push_back_bits(words);
      }
    }
    try {
      index.add(std::string(reinterpret_cast<const char*>(name), name_len), std::move(f));
    } catch (const Error& err) {
      throw CorruptFileError(std::string("index entry rejected: ") + err.what());
    }
  }
  if (r.remaining() != 0) throw CorruptFileError("trailing bytes after the last index entry");
  return index;
}

ReferenceIndex db_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return db_deserialize(bytes);
}

}  // namespace coverscan
