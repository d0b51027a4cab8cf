#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coverscan/matching.hpp"
#include "coverscan/reference_index.hpp"

namespace coverscan {

enum class MatchMethod : std::uint8_t {
  Simple,  ///< 1-NN, sum of distances, lowest wins
  Knn,     ///< 2-NN + NNDR, matching rate, highest wins
};

std::string_view method_name(MatchMethod m);
/// "simple" or "knn"; throws InvalidArgument otherwise.
MatchMethod parse_method(std::string_view name);
inline bool lower_is_better(MatchMethod m) { return m == MatchMethod::Simple; }

struct IdentifyOptions {
  MatchMethod method = MatchMethod::Simple;
  MatcherParams matcher;
  bool use_ann = false;  ///< per-reference ANN instead of exhaustive search
  /// Simple method only: divide the sum of distances by the match count.
  bool mean_distance = false;
  int jobs = 0;          ///< worker threads, 0 = hardware concurrency
  /// Reject the best guess when its score is worse than this (above it for
  /// simple, below it for knn). Off by default.
  std::optional<double> reject_threshold;
};

struct RankedReference {
  std::uint32_t id = 0;
  std::string name;
  double score = 0.0;
};

struct Identification {
  MatchMethod method = MatchMethod::Simple;
  std::vector<RankedReference> ranking;  ///< best first, ties by lower id
  bool rejected = false;
  std::size_t query_keypoints = 0;
  double extract_seconds = 0.0;
  double match_seconds = 0.0;

  const RankedReference& best() const { return ranking.front(); }
};

/// Score of every reference in id order. Query descriptors must match the
/// index configuration. With use_ann the index must have ANN built, or a
/// temporary one is built per call.
std::vector<double> score_references(const ReferenceIndex& index, const DescriptorSet& query,
                                     const IdentifyOptions& options);

/// Both scores from a single 2-NN pass per reference: simple uses the
/// nearest neighbour, knn the ratio test. Identical to the two separate
/// exhaustive calls; references with one descriptor get a knn rate of 0.
struct MethodScores {
  std::vector<double> simple;
  std::vector<double> knn;
};
MethodScores score_references_both(const ReferenceIndex& index, const DescriptorSet& query, double nndr_threshold,
                                   bool use_ann, int jobs);

/// Orders references by score (direction from the method), ties by id.
std::vector<RankedReference> rank_scores(const ReferenceIndex& index, const std::vector<double>& scores,
                                         MatchMethod method);

/// Identification from precomputed query features. Throws InvalidArgument on
/// an empty index, NoFeaturesError on an empty query and
/// ConfigMismatchError when the descriptors do not fit the index.
Identification identify_features(const ReferenceIndex& index, const Features& query, const IdentifyOptions& options);

/// Extracts the query once with the index's detector, then identifies.
Identification identify_query(const ReferenceIndex& index, const GrayImage& image, const IdentifyOptions& options);

struct CurvePoint {
  std::uint32_t id = 0;
  std::string name;
  double score = 0.0;
};

/// Score of every reference in id order.
std::vector<CurvePoint> export_score_curve(const ReferenceIndex& index, const GrayImage& image,
                                           const IdentifyOptions& options);
std::vector<CurvePoint> score_curve_from_features(const ReferenceIndex& index, const Features& query,
                                                  const IdentifyOptions& options);

/// Tab-separated "id\tname\tscore" with a header row; scores use 17
/// significant digits, infinity is written as "inf".
void write_score_curve(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace coverscan
