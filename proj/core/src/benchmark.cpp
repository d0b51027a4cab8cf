#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "coverscan/benchmark.hpp"
#include "coverscan/error.hpp"
#include "detail/parallel.hpp"

namespace coverscan {
namespace {

using Clock = std::chrono::steady_clock;
constexpr std::uint32_t kNoPrediction = std::numeric_limits<std::uint32_t>::max();
constexpr const char* kAllLabel = "all";
constexpr const char* kCsvHeader =
    "detector,matcher,transform,n_queries,accuracy_pct,mean_keypoints,median_extract_ms,median_match_ms";

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Scored {
  std::vector<double> simple;
  std::vector<double> knn;
};

QueryOutcome outcome_for(const ReferenceIndex& index, const std::vector<double>& scores, MatchMethod method,
                         const BenchmarkQuery& q) {
  QueryOutcome o;
  o.truth = q.reference_id;
  o.transform = q.transform;
  if (scores.empty()) {
    o.predicted = kNoPrediction;
    return o;
  }
  o.predicted = rank_scores(index, scores, method).front().id;
  o.true_score = scores[q.reference_id];
  const bool lower = lower_is_better(method);
  o.strict_best = true;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == q.reference_id) continue;
    if (lower ? !(o.true_score < scores[i]) : !(o.true_score > scores[i])) {
      o.strict_best = false;
      break;
    }
  }
  return o;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (detectors.empty()) throw InvalidArgument("select at least one detector");
  if (matchers.empty()) throw InvalidArgument("select at least one matcher");
  MatcherParams{2, nndr_threshold}.validate();
  if (timing_repetitions < 3) throw InvalidArgument("timing needs at least 3 repetitions");
  if (timing_samples < 1) throw InvalidArgument("timing needs at least one sample per transform");
}

const BenchmarkRow* BenchmarkReport::find(std::string_view detector, std::string_view matcher,
                                          std::string_view transform) const {
  for (const auto& r : rows) {
    if (r.detector == detector && r.matcher == matcher && r.transform == transform) return &r;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const std::vector<NamedImage>& references, const std::vector<BenchmarkQuery>& queries,
                              const BenchmarkConfig& config) {
  config.validate();
  if (references.empty()) throw InvalidArgument("benchmark needs at least one reference");
  for (const auto& q : queries) {
    if (q.reference_id >= references.size()) throw InvalidArgument("query names a reference id out of range");
  }
  const auto start = Clock::now();
  const bool want_simple =
      std::find(config.matchers.begin(), config.matchers.end(), MatchMethod::Simple) != config.matchers.end();
  const bool want_knn =
      std::find(config.matchers.begin(), config.matchers.end(), MatchMethod::Knn) != config.matchers.end();
  std::vector<MatchMethod> matchers;
  if (want_simple) matchers.push_back(MatchMethod::Simple);
  if (want_knn) matchers.push_back(MatchMethod::Knn);

  std::set<std::string> labels;
  for (const auto& q : queries) labels.insert(q.transform);

  BenchmarkReport report;
  report.metadata = {{"references", references.size()},
                     {"queries", queries.size()},
                     {"nndr_threshold", config.nndr_threshold},
                     {"ann", config.use_ann},
                     {"seed", config.seed},
                     {"timing_repetitions", config.timing_repetitions},
                     {"timing_samples", config.timing_samples},
                     {"detectors", nlohmann::json::array()}};

  for (const DetectorConfig& detector : config.detectors) {
    report.metadata["detectors"].push_back(detector.to_json());
    const std::string dname(detector.name());

    std::vector<Features> ref_features(references.size());
    detail::parallel_for(references.size(), config.jobs,
                         [&](std::size_t i) { ref_features[i] = extract_features(references[i].image, detector); });
    ReferenceIndex index(detector, config.seed);
    for (std::size_t i = 0; i < references.size(); ++i) index.add(references[i].name, std::move(ref_features[i]));
    if (config.use_ann) index.build_ann();

    std::vector<std::size_t> keypoints(queries.size());
    std::vector<Scored> scored(queries.size());
    detail::parallel_for(queries.size(), config.jobs, [&](std::size_t qi) {
      const Features f = extract_features(queries[qi].image, detector);
      keypoints[qi] = f.size();
      if (f.empty()) return;
      if (want_simple && want_knn) {
        auto both = score_references_both(index, f.descriptors, config.nndr_threshold, config.use_ann, 1);
        scored[qi] = {std::move(both.simple), std::move(both.knn)};
        return;
      }
      IdentifyOptions opts;
      opts.method = want_simple ? MatchMethod::Simple : MatchMethod::Knn;
      opts.matcher.nndr_threshold = config.nndr_threshold;
      opts.use_ann = config.use_ann;
      opts.jobs = 1;
      (want_simple ? scored[qi].simple : scored[qi].knn) = score_references(index, f.descriptors, opts);
    });

    // Timed stages: each sampled query is extracted and matched on its own,
    // single-threaded, timing_repetitions times.
    std::map<std::string, std::vector<double>> extract_ms;
    std::map<std::pair<MatchMethod, std::string>, std::vector<double>> match_ms;
    for (const std::string& label : labels) {
      int taken = 0;
      for (std::size_t qi = 0; qi < queries.size() && taken < config.timing_samples; ++qi) {
        if (queries[qi].transform != label || keypoints[qi] == 0) continue;
        ++taken;
        Features f;
        for (int r = 0; r < config.timing_repetitions; ++r) {
          const auto t0 = Clock::now();
          f = extract_features(queries[qi].image, detector);
          const double ms = elapsed_ms(t0);
          extract_ms[label].push_back(ms);
          extract_ms[kAllLabel].push_back(ms);
        }
        for (MatchMethod m : matchers) {
          IdentifyOptions opts;
          opts.method = m;
          opts.matcher.nndr_threshold = config.nndr_threshold;
          opts.use_ann = config.use_ann;
          opts.jobs = 1;
          for (int r = 0; r < config.timing_repetitions; ++r) {
            const auto t0 = Clock::now();
            score_references(index, f.descriptors, opts);
            const double ms = elapsed_ms(t0) / static_cast<double>(index.size());
            match_ms[{m, label}].push_back(ms);
            match_ms[{m, kAllLabel}].push_back(ms);
          }
        }
      }
    }

    for (MatchMethod m : matchers) {
      const std::string mname(method_name(m));
      std::map<std::string, BenchmarkRow> rows;
      for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& scores = m == MatchMethod::Simple ? scored[qi].simple : scored[qi].knn;
        QueryOutcome o = outcome_for(index, scores, m, queries[qi]);
        o.detector = dname;
        o.matcher = mname;
        o.query = qi;
        for (const std::string& label : {queries[qi].transform, std::string(kAllLabel)}) {
          BenchmarkRow& row = rows[label];
          ++row.n_queries;
          row.accuracy_pct += o.predicted == o.truth ? 1.0 : 0.0;
          row.mean_keypoints += static_cast<double>(keypoints[qi]);
        }
        report.outcomes.push_back(std::move(o));
      }
      if (queries.empty()) rows[kAllLabel];
      for (auto& [label, row] : rows) {
        row.detector = dname;
        row.matcher = mname;
        row.transform = label;
        if (row.n_queries > 0) {
          row.accuracy_pct = 100.0 * row.accuracy_pct / static_cast<double>(row.n_queries);
          row.mean_keypoints /= static_cast<double>(row.n_queries);
        }
        row.median_extract_ms = median(extract_ms[label]);
        row.median_match_ms = median(match_ms[{m, label}]);
        report.rows.push_back(row);
      }
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    return std::tie(a.detector, a.matcher, a.transform) < std::tie(b.detector, b.matcher, b.transform);
  });
  report.total_seconds = elapsed_ms(start) / 1000.0;
  return report;
}

BenchmarkReport run_benchmark(const std::filesystem::path& ref_dir, const std::filesystem::path& testset_dir,
                              const BenchmarkConfig& config) {
  const auto ref_paths = list_reference_images(ref_dir);
  if (ref_paths.empty()) throw InvalidArgument("no reference covers in '" + ref_dir.string() + "'");
  const Manifest manifest = read_manifest(testset_dir / kManifestName);
  std::vector<NamedImage> refs;
  for (const auto& p : ref_paths) refs.push_back({p.stem().string(), load_image(p)});
  std::vector<BenchmarkQuery> queries;
  for (const TestCase& c : manifest.cases) {
    if (c.reference_id >= ref_paths.size() || ref_paths[c.reference_id].filename().string() != c.reference) {
      throw InvalidArgument("manifest entry '" + c.image + "' does not match reference id " +
                            std::to_string(c.reference_id) + " in '" + ref_dir.string() + "'");
    }
    queries.push_back({load_image(testset_dir / c.image), c.reference_id, c.transform});
  }
  BenchmarkReport report = run_benchmark(refs, queries, config);
  report.metadata["references_dir"] = ref_dir.string();
  report.metadata["testset_dir"] = testset_dir.string();
  return report;
}

void write_report(std::ostream& out, const BenchmarkReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
      rows.push_back({{"detector", r.detector},
                      {"matcher", r.matcher},
                      {"transform", r.transform},
                      {"n_queries", r.n_queries},
                      {"accuracy_pct", r.accuracy_pct},
                      {"mean_keypoints", r.mean_keypoints},
                      {"median_extract_ms", r.median_extract_ms},
                      {"median_match_ms", r.median_match_ms}});
    }
    out << nlohmann::json{{"metadata", report.metadata}, {"rows", rows}}.dump(2) << '\n';
  } else {
    out << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
      out << r.detector << ',' << r.matcher << ',' << r.transform << ',' << r.n_queries << ','
          << format_real(r.accuracy_pct) << ',' << format_real(r.mean_keypoints) << ','
          << format_real(r.median_extract_ms) << ',' << format_real(r.median_match_ms) << '\n';
    }
  }
  if (!out) throw IoError("failed writing report");
}

void write_report(const std::filesystem::path& path, const BenchmarkReport& report, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_report(out, report, format);
}

std::vector<BenchmarkRow> parse_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError("report CSV has an unexpected header");
  std::vector<BenchmarkRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw FormatError("report row needs 8 cells: " + line);
    try {
      BenchmarkRow r;
      r.detector = cells[0];
      r.matcher = cells[1];
      r.transform = cells[2];
      r.n_queries = std::stoull(cells[3]);
      r.accuracy_pct = std::stod(cells[4]);
      r.mean_keypoints = std::stod(cells[5]);
      r.median_extract_ms = std::stod(cells[6]);
      r.median_match_ms = std::stod(cells[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("report row has a malformed number: " + line);
    }
  }
  return rows;
}

}  // namespace coverscan
