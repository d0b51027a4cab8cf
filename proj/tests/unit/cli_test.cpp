#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "coverscan/benchmark.hpp"
#include "coverscan/features_io.hpp"
#include "coverscan/reference_index.hpp"
#include "support.hpp"

namespace coverscan {
namespace {

using testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::filesystem::path kSamples = COVERSCAN_SAMPLE_DIR;

TEST(Cli, NoArgumentsPrintsUsage) {
  const CliRun r = cli({});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UnknownFlagsAndValuesAreUsageErrors) {
  EXPECT_EQ(cli({"extract", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"extract", "--detector", "brisk", "x.pgm", "-o", "y"}).code, kExitUsage);
  EXPECT_EQ(cli({"extract", "--detector", "orb", "-p", "nonsense=3", (kSamples / "cover_000.pgm").string(), "-o",
                 "/tmp/none.jsonl"})
                .code,
            kExitUsage);
  EXPECT_EQ(cli({"identify", "--index", "i", "--matcher", "fuzzy", "q.pgm"}).code, kExitUsage);
}

TEST(Cli, MissingInputIsRuntimeError) {
  TempDir dir("cli");
  EXPECT_EQ(cli({"extract", "--detector", "orb", (dir / "missing.pgm").string(), "-o", (dir / "f").string()}).code,
            kExitRuntime);
}

TEST(Cli, ExtractWritesFeaturesAndLogsConfig) {
  TempDir dir("cli");
  const auto out = dir / "f.jsonl";
  const CliRun r = cli({"extract", "--detector", "orb", "-p", "n_features=120", (kSamples / "cover_000.pgm").string(),
                     "-o", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const FeatureFile f = read_features(out);
  EXPECT_EQ(f.config.get<OrbParams>().n_features, 120);
  EXPECT_EQ(f.features.size(), 120u);
  EXPECT_NE(r.err.find("\"n_features\":120"), std::string::npos);
  EXPECT_NE(r.err.find("\"scale_factor\""), std::string::npos);
}

TEST(Cli, IndexIdentifyAndDetectorMismatch) {
  TempDir dir("cli");
  const auto idx = dir / "orb.cvridx";
  ASSERT_EQ(cli({"index", "build", "--detector", "orb", "--refs", kSamples.string(), "-o", idx.string()}).code,
            kExitOk);
  EXPECT_EQ(db_load(idx).size(), 5u);

  const auto curve = dir / "curve.tsv";
  const CliRun id = cli({"identify", "--index", idx.string(), "--matcher", "simple", "--curve", curve.string(),
                      (kSamples / "cover_003.pgm").string()});
  ASSERT_EQ(id.code, kExitOk) << id.err;
  EXPECT_NE(id.out.find("cover_003"), std::string::npos);
  std::ifstream tsv(curve);
  std::string line;
  int rows = 0;
  while (std::getline(tsv, line)) ++rows;
  EXPECT_EQ(rows, 6);

  const CliRun knn = cli({"identify", "--index", idx.string(), "--matcher", "knn", "--nndr", "0.7", "--ann",
                       (kSamples / "cover_001.pgm").string()});
  EXPECT_EQ(knn.code, kExitOk) << knn.err;

  const CliRun mismatch = cli({"identify", "--index", idx.string(), "--detector", "akaze",
                            (kSamples / "cover_001.pgm").string()});
  EXPECT_EQ(mismatch.code, kExitUsage);
  EXPECT_NE(mismatch.err.find("mismatch"), std::string::npos);
}

TEST(Cli, CorruptIndexIsRuntimeError) {
  TempDir dir("cli");
  std::ofstream(dir / "bad.cvridx") << "CVRIDX\x01garbage";
  EXPECT_EQ(cli({"identify", "--index", (dir / "bad.cvridx").string(), (kSamples / "cover_001.pgm").string()}).code,
            kExitRuntime);
}

TEST(Cli, SynthAndBenchOnSampleCorpus) {
  TempDir dir("cli");
  const auto set = dir / "set";
  ASSERT_EQ(cli({"synth", "--refs", kSamples.string(), "-o", set.string()}).code, kExitOk);
  const auto report = dir / "report.csv";
  const CliRun r = cli({"bench", "--refs", kSamples.string(), "--testset", set.string(), "--detectors", "orb,akaze",
                     "--matchers", "simple,knn", "--report", report.string(), "-j", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(report);
  const auto rows = parse_report_csv(in);
  EXPECT_EQ(rows.size(), 2u * 2 * 7);
}

TEST(Cli, SeedFromEnvironment) {
  TempDir dir("cli");
  ::setenv("COVERSCAN_SEED", "not-a-number", 1);
  EXPECT_EQ(cli({"synth", "--refs", kSamples.string(), "-o", (dir / "a").string()}).code, kExitUsage);
  ::setenv("COVERSCAN_SEED", "7", 1);
  const CliRun r = cli({"synth", "--refs", kSamples.string(), "-o", (dir / "b").string()});
  ::unsetenv("COVERSCAN_SEED");
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("\"seed\":7"), std::string::npos);
}

}  // namespace
}  // namespace coverscan
