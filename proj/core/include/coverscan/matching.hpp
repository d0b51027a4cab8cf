#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "coverscan/features.hpp"

namespace coverscan {

struct MatcherParams {
  int k = 2;                     ///< 1 or 2
  double nndr_threshold = 0.7;   ///< tau in (0, 1]

  void validate() const;
  bool operator==(const MatcherParams&) const = default;
};

struct Match {
  std::uint32_t query = 0;
  std::uint32_t reference = 0;
  double distance = 0.0;

  bool operator==(const Match&) const = default;
};

/// Output of every matcher. Exact and approximate k-NN searches list k pairs
/// per query (queries ascending, each group nearest first); NNDR-filtered
/// sets keep only the retained nearest pairs.
struct MatchSet {
  std::vector<Match> pairs;
  std::size_t retained_count = 0;
  std::size_t total_queries = 0;

  bool operator==(const MatchSet&) const = default;
};

inline constexpr double kEmptyScore = std::numeric_limits<double>::infinity();

/// Euclidean distance for float descriptors, popcount of XOR for binary
/// ones. Throws InvalidArgument on kind or length mismatch.
double descriptor_distance(const DescriptorRef& a, const DescriptorRef& b);
inline double descriptor_distance(const Descriptor& a, const Descriptor& b) {
  return descriptor_distance(a.ref(), b.ref());
}

/// Nearest reference for every query; ties go to the lowest reference index.
/// Throws InvalidArgument on empty sets or mismatched kinds.
MatchSet match_1nn(const DescriptorSet& query, const DescriptorSet& reference);

/// Exhaustive k nearest references per query (k <= |reference|).
MatchSet knn_exact(const DescriptorSet& query, const DescriptorSet& reference, int k);

/// Keeps each query's nearest pair iff d1 / d2 <= tau (d2 = 0 counts as a
/// ratio of 0). `knn` must hold at least two pairs per query.
MatchSet apply_nndr(const MatchSet& knn, double tau);

/// knn_exact with k = 2 followed by apply_nndr. Needs >= 2 references.
MatchSet match_2nn_nndr(const DescriptorSet& query, const DescriptorSet& reference, double tau);

/// Sum of pair distances, kEmptyScore for an empty set. Lower is better.
double score_sum_distances(const MatchSet& m);

/// 100 * retained / total, 0 when there are no queries. Higher is better.
double matching_rate(const MatchSet& m);

}  // namespace coverscan
