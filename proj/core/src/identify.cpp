#include "coverscan/identify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "coverscan/error.hpp"
#include "detail/parallel.hpp"

namespace coverscan {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_query(const ReferenceIndex& index, const DescriptorSet& query) {
  if (index.empty()) throw InvalidArgument("reference index is empty");
  if (query.empty()) throw NoFeaturesError("query image has no features");
  if (query.kind() != index.config().descriptor_kind() || query.length() != index.config().descriptor_length()) {
    throw ConfigMismatchError("query descriptors do not match the index detector configuration");
  }
}

// Either the index's prebuilt ANN or a temporary one for this call.
class AnnSource {
 public:
  AnnSource(const ReferenceIndex& index, bool use_ann) : index_(index) {
    if (use_ann && !index.has_ann()) {
      owned_.resize(index.size());
      temporary_ = true;
    }
  }
  const AnnIndex& get(std::size_t i) {
    if (!temporary_) return index_.ann(i);
    owned_[i] = AnnIndex::build(index_.entry(i).features.descriptors, index_.ann_params());
    return *owned_[i];
  }

 private:
  const ReferenceIndex& index_;
  bool temporary_ = false;
  std::vector<std::optional<AnnIndex>> owned_;
};

MatchSet neighbours(const DescriptorSet& query, const DescriptorSet& ref, int k, AnnSource* ann, std::size_t i) {
  if (ann != nullptr) return ann->get(i).knn(query, k);
  return k == 1 ? match_1nn(query, ref) : knn_exact(query, ref, k);
}

}  // namespace

std::string_view method_name(MatchMethod m) { return m == MatchMethod::Simple ? "simple" : "knn"; }

MatchMethod parse_method(std::string_view name) {
  if (name == "simple") return MatchMethod::Simple;
  if (name == "knn") return MatchMethod::Knn;
  throw InvalidArgument("unknown matcher '" + std::string(name) + "' (expected simple or knn)");
}

std::vector<double> score_references(const ReferenceIndex& index, const DescriptorSet& query,
                                     const IdentifyOptions& options) {
  options.matcher.validate();
  check_query(index, query);
  std::vector<double> scores(index.size());
  AnnSource source(index, options.use_ann);
  AnnSource* ann = options.use_ann ? &source : nullptr;
  detail::parallel_for(index.size(), options.jobs, [&](std::size_t i) {
    const DescriptorSet& ref = index.entry(i).features.descriptors;
    if (options.method == MatchMethod::Simple) {
      const MatchSet m = neighbours(query, ref, 1, ann, i);
      scores[i] = score_sum_distances(m);
      if (options.mean_distance && !m.pairs.empty()) scores[i] /= static_cast<double>(m.pairs.size());
    } else if (ref.size() < 2) {
      scores[i] = 0.0;
    } else {
      scores[i] = matching_rate(apply_nndr(neighbours(query, ref, 2, ann, i), options.matcher.nndr_threshold));
    }
  });
  return scores;
}

MethodScores score_references_both(const ReferenceIndex& index, const DescriptorSet& query, double nndr_threshold,
                                   bool use_ann, int jobs) {
  MatcherParams{2, nndr_threshold}.validate();
  check_query(index, query);
  MethodScores out{std::vector<double>(index.size()), std::vector<double>(index.size())};
  AnnSource source(index, use_ann);
  AnnSource* ann = use_ann ? &source : nullptr;
  detail::parallel_for(index.size(), jobs, [&](std::size_t i) {
    const DescriptorSet& ref = index.entry(i).features.descriptors;
    if (ref.size() < 2) {
      out.simple[i] = score_sum_distances(neighbours(query, ref, 1, ann, i));
      out.knn[i] = 0.0;
      return;
    }
    const MatchSet knn = neighbours(query, ref, 2, ann, i);
    double sum = 0.0;
    for (std::size_t p = 0; p < knn.pairs.size(); p += 2) sum += knn.pairs[p].distance;
    out.simple[i] = sum;
    out.knn[i] = matching_rate(apply_nndr(knn, nndr_threshold));
  });
  return out;
}

std::vector<RankedReference> rank_scores(const ReferenceIndex& index, const std::vector<double>& scores,
                                         MatchMethod method) {
  if (scores.size() != index.size()) throw InvalidArgument("one score per reference is required");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const bool lower = lower_is_better(method);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return lower ? scores[a] < scores[b] : scores[a] > scores[b];
  });
  std::vector<RankedReference> ranking;
  ranking.reserve(order.size());
  for (std::size_t i : order) ranking.push_back({index.entry(i).id, index.entry(i).name, scores[i]});
  return ranking;
}

Identification identify_features(const ReferenceIndex& index, const Features& query, const IdentifyOptions& options) {
  const auto start = Clock::now();
  Identification result;
  result.method = options.method;
  result.query_keypoints = query.size();
  result.extract_seconds = query.extract_time;
  result.ranking = rank_scores(index, score_references(index, query.descriptors, options), options.method);
  result.match_seconds = seconds_since(start);
  if (options.reject_threshold) {
    const double best = result.best().score;
    result.rejected = lower_is_better(options.method) ? best > *options.reject_threshold
                                                      : best < *options.reject_threshold;
  }
  return result;
}

Identification identify_query(const ReferenceIndex& index, const GrayImage& image, const IdentifyOptions& options) {
  if (index.empty()) throw InvalidArgument("reference index is empty");
  return identify_features(index, extract_features(image, index.config()), options);
}

std::vector<CurvePoint> score_curve_from_features(const ReferenceIndex& index, const Features& query,
                                                  const IdentifyOptions& options) {
  const auto scores = score_references(index, query.descriptors, options);
  std::vector<CurvePoint> curve;
  curve.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) curve.push_back({index.entry(i).id, index.entry(i).name, scores[i]});
  return curve;
}

std::vector<CurvePoint> export_score_curve(const ReferenceIndex& index, const GrayImage& image,
                                           const IdentifyOptions& options) {
  if (index.empty()) throw InvalidArgument("reference index is empty");
  return score_curve_from_features(index, extract_features(image, index.config()), options);
}

void write_score_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "id\tname\tscore\n";
  for (const CurvePoint& p : curve) {
    std::string name = p.name;
    std::replace_if(name.begin(), name.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    std::ostringstream score;
    if (std::isinf(p.score)) {
      score << (p.score > 0 ? "inf" : "-inf");
    } else {
      score << std::setprecision(17) << p.score;
    }
    out << p.id << '\t' << name << '\t' << score.str() << '\n';
  }
}

}  // namespace coverscan
