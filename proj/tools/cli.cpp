#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "coverscan/benchmark.hpp"
#include "coverscan/detector.hpp"
#include "coverscan/error.hpp"
#include "coverscan/features_io.hpp"
#include "coverscan/identify.hpp"
#include "coverscan/reference_index.hpp"
#include "coverscan/test_set.hpp"
#include "coverscan/transforms.hpp"

namespace coverscan {
namespace {

// Problems with what the user asked for, as opposed to failures while doing it.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed() {
  const char* env = std::getenv("COVERSCAN_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || env[0] == '-') throw UsageError(std::string("COVERSCAN_SEED is not an unsigned integer: ") + env);
  return v;
}

nlohmann::json parse_value(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return text;
  }
}

DetectorConfig make_detector(const std::string& name, const std::vector<std::string>& params) {
  nlohmann::json j = {{"detector", name}, {"params", nlohmann::json::object()}};
  for (const std::string& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("parameter '" + p + "' is not NAME=VALUE");
    j["params"][p.substr(0, eq)] = parse_value(p.substr(eq + 1));
  }
  try {
    return DetectorConfig::from_json(j);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void log_config(std::ostream& err, const std::string& command, const nlohmann::json& config) {
  err << "coverscan " << command << " config: " << config.dump() << '\n';
}

struct Options {
  int jobs = 0;
  // extract / index build
  std::string detector;
  std::vector<std::string> params;
  std::string image;
  std::string output;
  std::string refs;
  // identify
  std::string index;
  std::string matcher = "simple";
  double nndr = 0.7;
  bool ann = false;
  bool mean_distance = false;
  std::string curve;
  std::optional<double> reject;
  int top = 0;
  // synth
  TransformParams transform;
  // bench
  std::string testset;
  std::string detectors = "sift,surf,orb,akaze";
  std::string matchers = "simple,knn";
  std::string report;
  std::string format = "csv";
  int repetitions = 3;
};

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  const DetectorConfig config = make_detector(o.detector, o.params);
  log_config(err, "extract", {{"detector", config.to_json()}, {"image", o.image}, {"output", o.output}});
  const GrayImage image = load_image(o.image);
  FeatureFile file{config, extract_features(image, config)};
  write_features(std::filesystem::path(o.output), file);
  out << file.features.size() << " keypoints in " << std::fixed << std::setprecision(1)
      << 1000.0 * file.features.extract_time << " ms -> " << o.output << '\n';
  return kExitOk;
}

int cmd_index_build(const Options& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  const DetectorConfig config = make_detector(o.detector, o.params);
  log_config(err, "index build",
             {{"detector", config.to_json()}, {"refs", o.refs}, {"output", o.output}, {"seed", seed}, {"jobs", o.jobs}});
  const auto paths = list_reference_images(o.refs);
  if (paths.empty()) throw InvalidArgument("no reference covers in '" + o.refs + "'");
  ReferenceIndex index(config, seed);
  for (const auto& p : paths) db_add_reference(index, p.stem().string(), load_image(p));
  db_save(index, o.output);
  out << index.size() << " references indexed -> " << o.output << '\n';
  return kExitOk;
}

int cmd_identify(const Options& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  IdentifyOptions opts;
  try {
    opts.method = parse_method(o.matcher);
    opts.matcher.nndr_threshold = o.nndr;
    opts.matcher.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  opts.use_ann = o.ann;
  opts.mean_distance = o.mean_distance;
  opts.jobs = o.jobs;
  opts.reject_threshold = o.reject;

  ReferenceIndex index = db_load(o.index);
  if (!o.detector.empty()) {
    DetectorKind wanted;
    try {
      wanted = parse_detector(o.detector);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    if (wanted != index.config().kind()) {
      throw ConfigMismatchError("index was built with " + std::string(index.config().name()) + ", not " +
                                std::string(detector_name(wanted)));
    }
  }
  if (opts.use_ann) index.build_ann();
  nlohmann::json cfg = {{"index", o.index},
                        {"detector", index.config().to_json()},
                        {"references", index.size()},
                        {"matcher", o.matcher},
                        {"nndr", o.nndr},
                        {"ann", o.ann},
                        {"mean_distance", o.mean_distance},
                        {"jobs", o.jobs},
                        {"seed", seed},
                        {"image", o.image}};
  cfg["reject"] = o.reject ? nlohmann::json(*o.reject) : nlohmann::json(nullptr);
  log_config(err, "identify", cfg);

  const GrayImage image = load_image(o.image);
  const Features query = extract_features(image, index.config());
  const Identification id = identify_features(index, query, opts);
  out << "rank\tid\tname\tscore\n";
  const std::size_t shown = o.top > 0 ? std::min<std::size_t>(o.top, id.ranking.size()) : id.ranking.size();
  for (std::size_t r = 0; r < shown; ++r) {
    const auto& e = id.ranking[r];
    out << r + 1 << '\t' << e.id << '\t' << e.name << '\t' << std::setprecision(10) << e.score << '\n';
  }
  err << "best: " << id.best().name << (id.rejected ? " (rejected by threshold)" : "") << "; " << query.size()
      << " query keypoints, extract " << std::fixed << std::setprecision(1) << 1000.0 * id.extract_seconds
      << " ms, match " << 1000.0 * id.match_seconds << " ms\n";
  if (!o.curve.empty()) {
    std::ofstream curve(o.curve, std::ios::binary | std::ios::trunc);
    if (!curve) throw IoError("cannot open '" + o.curve + "' for writing");
    write_score_curve(curve, score_curve_from_features(index, query, opts));
    if (!curve) throw IoError("failed writing '" + o.curve + "'");
  }
  return kExitOk;
}

int cmd_synth(const Options& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    o.transform.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  log_config(err, "synth", {{"refs", o.refs}, {"output", o.output}, {"seed", seed}, {"transform", o.transform.to_json()}});
  const Manifest m = make_test_set(o.refs, o.output, o.transform, seed);
  out << m.cases.size() << " test images -> " << o.output << '\n';
  return kExitOk;
}

int cmd_bench(const Options& o, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  BenchmarkConfig config;
  try {
    for (const auto& d : split_list(o.detectors)) config.detectors.push_back(make_detector(d, o.params));
    for (const auto& m : split_list(o.matchers)) config.matchers.push_back(parse_method(m));
    config.nndr_threshold = o.nndr;
    config.use_ann = o.ann;
    config.jobs = o.jobs;
    config.seed = seed;
    config.timing_repetitions = o.repetitions;
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (o.format != "csv" && o.format != "json") throw UsageError("report format must be csv or json");
  nlohmann::json cfg = {{"refs", o.refs},       {"testset", o.testset}, {"matchers", o.matchers},
                        {"nndr", o.nndr},       {"ann", o.ann},         {"jobs", o.jobs},
                        {"seed", seed},         {"report", o.report},   {"format", o.format},
                        {"repetitions", o.repetitions}};
  cfg["detectors"] = nlohmann::json::array();
  for (const auto& d : config.detectors) cfg["detectors"].push_back(d.to_json());
  log_config(err, "bench", cfg);

  const BenchmarkReport report = run_benchmark(std::filesystem::path(o.refs), std::filesystem::path(o.testset), config);
  write_report(std::filesystem::path(o.report), report, o.format == "json" ? ReportFormat::Json : ReportFormat::Csv);
  for (const auto& r : report.rows) {
    if (r.transform != "all") continue;
    out << r.detector << '/' << r.matcher << ": " << std::fixed << std::setprecision(1) << r.accuracy_pct << "% of "
        << r.n_queries << ", " << r.mean_keypoints << " keypoints, extract " << std::setprecision(2)
        << r.median_extract_ms << " ms, match " << std::setprecision(3) << r.median_match_ms << " ms/ref\n";
  }
  out << "report -> " << o.report << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Book-cover identification with SIFT, SURF, ORB and AKAZE features", "coverscan"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("-j,--jobs", o.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto add_detector_params = [&](CLI::App* cmd) {
    cmd->add_option("-p,--param", o.params, "Detector parameter override NAME=VALUE (repeatable)")
        ->allow_extra_args(false);
  };

  auto* extract = app.add_subcommand("extract", "Extract features from one image");
  extract->add_option("--detector", o.detector, "sift, surf, orb or akaze")->required();
  add_detector_params(extract);
  extract->add_option("image", o.image, "Input image")->required();
  extract->add_option("-o,--output", o.output, "Features file (JSON Lines)")->required();

  auto* index = app.add_subcommand("index", "Manage reference indexes");
  index->require_subcommand(1);
  auto* build = index->add_subcommand("build", "Build an index from a directory of covers");
  build->add_option("--detector", o.detector, "sift, surf, orb or akaze")->required();
  add_detector_params(build);
  build->add_option("--refs", o.refs, "Directory of reference covers")->required();
  build->add_option("-o,--output", o.output, "Index file")->required();

  auto* identify = app.add_subcommand("identify", "Identify the cover in an image");
  identify->add_option("--index", o.index, "Index file")->required();
  identify->add_option("--matcher", o.matcher, "simple or knn")->capture_default_str();
  identify->add_option("--nndr", o.nndr, "NNDR threshold in (0, 1]")->capture_default_str();
  identify->add_flag("--ann", o.ann, "Approximate nearest neighbours");
  identify->add_flag("--mean-distance", o.mean_distance, "Simple matcher: mean instead of sum of distances");
  identify->add_option("--detector", o.detector, "Expected detector of the index");
  identify->add_option("--curve", o.curve, "Write the per-reference score series here");
  identify->add_option("--reject", o.reject, "Reject threshold on the best score");
  identify->add_option("--top", o.top, "Show only the best N references")->check(CLI::NonNegativeNumber);
  identify->add_option("image", o.image, "Query image")->required();

  auto* synth = app.add_subcommand("synth", "Generate the transformed test set");
  synth->add_option("--refs", o.refs, "Directory of reference covers")->required();
  synth->add_option("-o,--output", o.output, "Test-set directory")->required();
  synth->add_option("--rotate", o.transform.rotate_degrees, "Oblique rotation in degrees")->capture_default_str();
  synth->add_option("--crop", o.transform.crop_fraction, "Kept share of each side")->capture_default_str();
  synth->add_option("--gain", o.transform.gain, "Illumination gain")->capture_default_str();
  synth->add_option("--gamma", o.transform.gamma, "Illumination gamma")->capture_default_str();
  synth->add_option("--scale", o.transform.scale, "Scale factor")->capture_default_str();
  synth->add_option("--view-shift", o.transform.viewpoint_shift, "Max corner shift as a share of the side")
      ->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Run the identification benchmark");
  bench->add_option("--refs", o.refs, "Directory of reference covers")->required();
  bench->add_option("--testset", o.testset, "Test-set directory with manifest.jsonl")->required();
  bench->add_option("--detectors", o.detectors, "Comma-separated detectors")->capture_default_str();
  bench->add_option("--matchers", o.matchers, "Comma-separated matchers")->capture_default_str();
  add_detector_params(bench);
  bench->add_option("--nndr", o.nndr, "NNDR threshold in (0, 1]")->capture_default_str();
  bench->add_flag("--ann", o.ann, "Approximate nearest neighbours");
  bench->add_option("--repetitions", o.repetitions, "Repetitions of every timed stage")->capture_default_str();
  bench->add_option("--report", o.report, "Report path")->required();
  bench->add_option("--format", o.format, "csv or json")->capture_default_str();

  if (args.empty()) {
    err << app.help();
    return kExitUsage;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    const std::uint64_t seed = resolve_seed();
    if (*extract) return cmd_extract(o, out, err);
    if (*build) return cmd_index_build(o, seed, out, err);
    if (*identify) return cmd_identify(o, seed, out, err);
    if (*synth) return cmd_synth(o, seed, out, err);
    if (*bench) return cmd_bench(o, seed, out, err);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigMismatchError& e) {
    err << "error: config mismatch: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace coverscan
