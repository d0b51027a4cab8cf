#include "coverscan/reference_index.hpp"

#include "coverscan/error.hpp"

namespace coverscan {

ReferenceIndex::ReferenceIndex(DetectorConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  ann_params_.seed = seed;
}

void ReferenceIndex::set_ann_params(const AnnParams& params) {
  params.validate();
  ann_params_ = params;
  ann_params_.seed = seed_;
  ann_.clear();
}

std::uint32_t ReferenceIndex::add(std::string name, Features features) {
  check_aligned(features);
  if (features.empty()) throw NoFeaturesError("reference '" + name + "' has no keypoints");
  if (features.descriptors.kind() != config_.descriptor_kind() ||
      features.descriptors.length() != config_.descriptor_length()) {
    throw ConfigMismatchError("reference '" + name + "' descriptors do not match the " +
                              std::string(config_.name()) + " configuration");
  }
  const auto id = static_cast<std::uint32_t>(entries_.size());
  entries_.push_back({id, std::move(name), std::move(features)});
  ann_.clear();
  return id;
}

void ReferenceIndex::build_ann() {
  std::vector<AnnIndex> built;
  built.reserve(entries_.size());
  for (const auto& e : entries_) built.push_back(AnnIndex::build(e.features.descriptors, ann_params_));
  ann_ = std::move(built);
}

bool ReferenceIndex::same_content(const ReferenceIndex& other) const {
  if (!(config_ == other.config_) || seed_ != other.seed_ || !(ann_params_ == other.ann_params_) ||
      entries_.size() != other.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.id != b.id || a.name != b.name || a.features.keypoints != b.features.keypoints ||
        !(a.features.descriptors == b.features.descriptors)) {
      return false;
    }
  }
  return true;
}

std::uint32_t db_add_reference(ReferenceIndex& index, std::string name, const GrayImage& image) {
  return index.add(std::move(name), extract_features(image, index.config()));
}

}  // namespace coverscan
