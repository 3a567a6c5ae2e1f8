#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "sticky/pipeline.h"
#include "test_util.h"

namespace sticky {
namespace {

PipelineConfig toy_config(const std::filesystem::path& out, unsigned threads = 2) {
  auto c = PipelineConfig::from_map({});
  c.out = out.string();
  c.threads = threads;
  return c;
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

TEST(Pipeline, DetectFindsPlantedTokensAndWritesArtifacts) {
  const auto dir = testing::fresh_dir("detect");
  Session s(toy_config(dir));
  const auto report = detect(s);
  for (TokenId id : report.planted_ids) {
    EXPECT_TRUE(std::binary_search(report.validation.omega.begin(), report.validation.omega.end(), id)) << id;
  }
  for (const char* f : {"vocab.jsonl", "histogram.csv", "filtered_pairs.jsonl", "scores.csv", "validation.csv",
                        "report.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto j = read_json(dir / "report.json");
  EXPECT_EQ(j.at("schema_version"), kReportSchemaVersion);
  EXPECT_EQ(rederive_omega(j), report_omega(j));
  EXPECT_EQ(report_omega(j), report.validation.omega);
  EXPECT_FALSE(std::filesystem::exists(dir / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ReportBodyIndependentOfThreadCount) {
  const auto a_dir = testing::fresh_dir("det_a");
  const auto b_dir = testing::fresh_dir("det_b");
  Session a(toy_config(a_dir, 1));
  Session b(toy_config(b_dir, 4));
  const auto ra = detect(a);
  const auto rb = detect(b);
  EXPECT_EQ(report_body(ra, a).dump(), report_body(rb, b).dump());
  std::filesystem::remove_all(a_dir);
  std::filesystem::remove_all(b_dir);
}

TEST(Pipeline, StageFailureWritesManifest) {
  const auto dir = testing::fresh_dir("fail");
  auto c = toy_config(dir);
  c.pairs = {(dir / "missing.tsv").string()};
  Session s(c);
  try {
    detect(s);
    FAIL() << "expected StageFailure";
  } catch (const StageFailure& e) {
    EXPECT_EQ(e.stage(), "filter");
    EXPECT_EQ(exit_code_for(std::current_exception()), 2);
  }
  const auto m = read_json(dir / "manifest.json");
  EXPECT_EQ(m.at("failed_stage"), "filter");
  const auto artifacts = m.at("artifacts").get<std::vector<std::string>>();
  EXPECT_NE(std::find(artifacts.begin(), artifacts.end(), "vocab.jsonl"), artifacts.end());
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, ExitCodes) {
  auto code = [](auto e) { return exit_code_for(std::make_exception_ptr(e)); };
  EXPECT_EQ(code(ConfigError("x")), 2);
  EXPECT_EQ(code(DataError("x")), 2);
  EXPECT_EQ(code(TransportError("x")), 3);
  EXPECT_EQ(code(InsufficientDataError("x")), 4);
  EXPECT_EQ(code(Error("x")), 1);
  EXPECT_EQ(code(std::runtime_error("x")), 1);
}

TEST(Pipeline, LoadReportRejectsOtherSchema) {
  const auto dir = testing::fresh_dir("schema");
  std::ofstream(dir / "r.json") << R"({"schema_version": 99})";
  EXPECT_THROW(load_report((dir / "r.json").string()), DataError);
  std::filesystem::remove_all(dir);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STICKY_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, DetectThenSweepAndImpact) {
  const auto dir = testing::fresh_dir("cli");
  const std::string out = " --out " + dir.string();
  ASSERT_EQ(run_cli("detect" + out), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  ASSERT_EQ(run_cli("sweep --set sweep.tokens=380" + out), 0);
  std::ifstream sweep(dir / "sweep_380.csv");
  std::string line;
  std::size_t rows = 0;
  std::getline(sweep, line);
  EXPECT_EQ(line, "n,similarity");
  while (std::getline(sweep, line)) ++rows;
  EXPECT_EQ(rows, 17u);
  EXPECT_EQ(run_cli("impact" + out), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "impact.json"));
  std::filesystem::remove_all(dir);
}

TEST(Cli, StagedCommandsMatchDetect) {
  const auto dir = testing::fresh_dir("cli_staged");
  const std::string out = " --out " + dir.string();
  ASSERT_EQ(run_cli("score" + out), 0);
  ASSERT_EQ(run_cli("validate --format csv" + out), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "validation.csv"));
  EXPECT_EQ(run_cli("classify-vocab" + out), 0);
  EXPECT_EQ(run_cli("stats" + out), 0);
  std::filesystem::remove_all(dir);
}

TEST(Cli, UsageAndConfigErrors) {
  const auto dir = testing::fresh_dir("cli_err");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("detect --no-such-flag" + out), 2);
  EXPECT_EQ(run_cli("detect --config " + (dir / "missing.conf").string() + out), 2);
  EXPECT_EQ(run_cli("detect --set nope=1" + out), 2);
  EXPECT_EQ(run_cli("detect --provider http://127.0.0.1:1" + out), 3);
  EXPECT_EQ(run_cli("detect --set epsilon=0 --set shortlist_fraction=0.0005" + out), 0);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sticky
