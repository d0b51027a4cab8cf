#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coverscan/detector.hpp"
#include "coverscan/identify.hpp"
#include "coverscan/image.hpp"
#include "coverscan/test_set.hpp"

namespace coverscan {

struct BenchmarkConfig {
  std::vector<DetectorConfig> detectors;
  std::vector<MatchMethod> matchers;
  double nndr_threshold = 0.7;
  bool use_ann = false;
  int jobs = 0;
  int timing_repetitions = 3;  ///< repetitions of every timed stage, >= 3
  int timing_samples = 1;      ///< timed queries per transform
  std::uint64_t seed = 42;

  void validate() const;
};

struct NamedImage {
  std::string name;
  GrayImage image;
};

struct BenchmarkQuery {
  GrayImage image;
  std::uint32_t reference_id = 0;
  std::string transform;
};

/// One row per (detector, matcher, transform), plus transform "all".
struct BenchmarkRow {
  std::string detector;
  std::string matcher;
  std::string transform;
  std::size_t n_queries = 0;
  double accuracy_pct = 0.0;
  double mean_keypoints = 0.0;
  double median_extract_ms = 0.0;  ///< per query image
  double median_match_ms = 0.0;    ///< per reference

  bool operator==(const BenchmarkRow&) const = default;
};

/// Outcome of one query under one detector and matcher.
struct QueryOutcome {
  std::string detector;
  std::string matcher;
  std::size_t query = 0;
  std::string transform;
  std::uint32_t truth = 0;
  std::uint32_t predicted = 0;
  double true_score = 0.0;
  /// True reference scores strictly better than every other reference.
  bool strict_best = false;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;  ///< sorted by detector, matcher, transform
  std::vector<QueryOutcome> outcomes;
  nlohmann::json metadata;
  double total_seconds = 0.0;

  const BenchmarkRow* find(std::string_view detector, std::string_view matcher, std::string_view transform) const;
};

/// Builds one reference index per detector, identifies every query with
/// every matcher and aggregates accuracy per transform. Accuracy is computed
/// from one 2-NN pass per (query, reference) when both matchers are
/// selected; the timed stages run each matcher on its own.
BenchmarkReport run_benchmark(const std::vector<NamedImage>& references, const std::vector<BenchmarkQuery>& queries,
                              const BenchmarkConfig& config);

/// Loads the covers of `ref_dir` and the test images named in the manifest
/// of `testset_dir`. Throws InvalidArgument when the manifest names a
/// reference that is not at the recorded id.
BenchmarkReport run_benchmark(const std::filesystem::path& ref_dir, const std::filesystem::path& testset_dir,
                              const BenchmarkConfig& config);

enum class ReportFormat { Csv, Json };

/// CSV header: detector,matcher,transform,n_queries,accuracy_pct,
/// mean_keypoints,median_extract_ms,median_match_ms. Reals carry 17
/// significant digits so parse_report_csv reproduces the rows exactly.
void write_report(std::ostream& out, const BenchmarkReport& report, ReportFormat format = ReportFormat::Csv);
void write_report(const std::filesystem::path& path, const BenchmarkReport& report,
                  ReportFormat format = ReportFormat::Csv);
std::vector<BenchmarkRow> parse_report_csv(std::istream& in);

}  // namespace coverscan
