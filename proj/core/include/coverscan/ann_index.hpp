#pragma once

#include <cstdint>
#include <vector>

#include "coverscan/features.hpp"
#include "coverscan/matching.hpp"

namespace coverscan {

struct AnnParams {
  // Float descriptors: forest of randomized k-d trees.
  int trees = 4;
  int checks = 64;     ///< leaves visited per query across the forest
  int leaf_size = 8;   ///< maximum points per leaf
  // Binary descriptors: bit-sampling LSH.
  int tables = 8;
  int key_bits = 16;   ///< sampled bits per table key, at most 24; capped at bit_width(n) - 1 for n entries
  int probe_radius = 2;      ///< largest Hamming distance of a probed bucket from the key
  int min_candidates = 256;  ///< probing stops once this many distinct candidates are found
  std::uint64_t seed = 42;

  void validate() const;
  bool operator==(const AnnParams&) const = default;
};

/// Approximate nearest-neighbour index over one descriptor set. Immutable
/// after build, so concurrent queries are safe.
class AnnIndex {
 public:
  /// Throws InvalidArgument on an empty set or invalid params. Building is
  /// deterministic for a fixed seed.
  static AnnIndex build(const DescriptorSet& reference, const AnnParams& params = {});

  std::size_t size() const { return data_.size(); }
  DescriptorKind kind() const { return data_.kind(); }
  int length() const { return data_.length(); }
  const AnnParams& params() const { return params_; }
  const DescriptorSet& descriptors() const { return data_; }

  /// k approximate nearest neighbours per query, in the MatchSet layout of
  /// knn_exact. Binary queries probe buckets in order of increasing radius,
  /// table by table, until min_candidates distinct entries have been seen. Falls back to an exhaustive scan when k reaches the index
  /// size or a query's candidate pool holds fewer than k entries. Throws
  /// InvalidArgument when k is out of range or the kinds differ.
  MatchSet knn(const DescriptorSet& query, int k) const;

 private:
  struct Node {
    int dim = -1;  // -1 marks a leaf
    float split = 0.0f;
    int child[2] = {-1, -1};
    int begin = 0;
    int end = 0;
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> order;
  };
  struct Table {
    std::vector<int> bits;
    std::vector<std::uint32_t> offsets;  // 2^key_bits + 1 bucket starts
    std::vector<std::uint32_t> items;
  };

  void build_forest();
  void build_tables();
  std::uint32_t table_key(const Table& t, std::span<const std::uint64_t> words) const;

  AnnParams params_;
  DescriptorSet data_;
  std::vector<Tree> trees_;
  std::vector<Table> tables_;
};

inline AnnIndex build_ann_index(const DescriptorSet& reference, const AnnParams& params = {}) {
  return AnnIndex::build(reference, params);
}

inline MatchSet ann_knn(const AnnIndex& index, const DescriptorSet& query, int k) { return index.knn(query, k); }

}  // namespace coverscan
