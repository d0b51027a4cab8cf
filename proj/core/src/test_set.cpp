#include "coverscan/test_set.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "coverscan/error.hpp"

namespace coverscan {
namespace {

bool is_cover_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".png";
}

}  // namespace

std::vector<std::filesystem::path> list_reference_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_cover_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
  return out;
}

Manifest make_test_set(const std::filesystem::path& ref_dir, const std::filesystem::path& out_dir,
                       const TransformParams& params, std::uint64_t seed) {
  params.validate();
  const auto refs = list_reference_images(ref_dir);
  if (refs.empty()) throw InvalidArgument("no reference covers in '" + ref_dir.string() + "'");
  std::set<std::string> stems;
  for (const auto& r : refs) {
    if (!stems.insert(r.stem().string()).second) {
      throw InvalidArgument("two reference covers share the stem '" + r.stem().string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  Manifest manifest;
  for (std::size_t id = 0; id < refs.size(); ++id) {
    const GrayImage cover = load_image(refs[id]);
    for (TransformKind kind : kAllTransforms) {
      const TransformResult t = apply_transform(cover, kind, params, seed + id);
      TestCase c;
      c.image = refs[id].stem().string() + "__" + std::string(transform_suffix(kind)) + ".pgm";
      c.reference_id = static_cast<std::uint32_t>(id);
      c.reference = refs[id].filename().string();
      c.transform = std::string(transform_name(kind));
      c.params = params.to_json();
      if (kind == TransformKind::Viewpoint) c.params["seed"] = seed + id;
      c.homography = t.homography.matrix();
      c.crop = t.crop;
      save_pgm(t.image, out_dir / c.image);
      manifest.cases.push_back(std::move(c));
    }
  }
  write_manifest(out_dir / kManifestName, manifest);
  return manifest;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const TestCase& c : manifest.cases) {
    nlohmann::json j = {{"test", c.image},           {"reference_id", c.reference_id},
                        {"reference", c.reference}, {"transform", c.transform},
                        {"params", c.params}};
    if (c.crop) {
      j["crop_box"] = {{"x", c.crop->x}, {"y", c.crop->y}, {"width", c.crop->width}, {"height", c.crop->height}};
    } else {
      j["homography"] = c.homography;
    }
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing manifest");
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_manifest(out, manifest);
}

Manifest read_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      TestCase c;
      c.image = j.at("test").get<std::string>();
      c.reference_id = j.at("reference_id").get<std::uint32_t>();
      c.reference = j.at("reference").get<std::string>();
      c.transform = j.at("transform").get<std::string>();
      c.params = j.value("params", nlohmann::json::object());
      if (j.contains("crop_box")) {
        const auto& b = j.at("crop_box");
        c.crop = CropBox{b.at("x").get<int>(), b.at("y").get<int>(), b.at("width").get<int>(), b.at("height").get<int>()};
        c.homography = Homography::translation(-c.crop->x, -c.crop->y).matrix();
      } else {
        c.homography = j.at("homography").get<std::array<double, 9>>();
      }
      m.cases.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest line " + std::to_string(number) + ": " + e.what());
    }
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  return read_manifest(in);
}

}  // namespace coverscan
