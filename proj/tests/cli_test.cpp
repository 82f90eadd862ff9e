#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "schemamap/service.hpp"
#include "schemamap/workload.hpp"
#include "test_support.hpp"

using namespace schemamap;
using nlohmann::json;

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless merged is set.
Run cli(const std::string &args, bool merged = false, const std::string &env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(SCHEMAMAP_CLI_PATH) + "' " + args +
                          (merged ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE *p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string quoted(const std::filesystem::path &p) { return "'" + p.string() + "'"; }

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const auto kDemoTask = testkit::data_dir() / "tasks" / "demo.task.json";
const auto kUnsat = testkit::data_dir() / "tasks" / "unsatisfiable.task.json";

std::string demo_args() { return "--task " + quoted(kDemoTask) + " --catalog-dir " + quoted(testkit::catalogs_dir()); }

json without_timing(json report) {
  report.erase("elapsed_ms");
  return report;
}

} // namespace

TEST(Cli, SynthesizeDemo) {
  const auto r = cli("synthesize " + demo_args());
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto j = json::parse(r.out);
  EXPECT_FALSE(j["timed_out"]);
  EXPECT_EQ(j["queries"][0]["sql"],
            "SELECT geo_lake.province, lake.name, lake.area FROM lake, geo_lake WHERE lake.name = geo_lake.lake");
}

TEST(Cli, ReportMatchesTheService) {
  const auto cli_report = json::parse(cli("synthesize " + demo_args()).out);
  ServiceConfig cfg;
  cfg.catalog_dir = testkit::catalogs_dir();
  Service s(cfg);
  const auto body = R"({"task": )" + slurp(kDemoTask) + "}";
  const auto started = s.handle("POST", "/synthesize", {}, body);
  ASSERT_EQ(started.status, 202);
  s.wait_idle();
  const auto id = json::parse(started.body)["session"].get<std::string>();
  const auto service_report = json::parse(s.handle("GET", "/sessions/" + id).body)["report"];
  EXPECT_EQ(without_timing(cli_report), without_timing(service_report));
}

TEST(Cli, PoliciesAndWorkersAgree) {
  const auto base = without_timing(json::parse(cli("synthesize " + demo_args()).out))["queries"];
  for (const char *extra : {"--policy random --seed 4", "--policy baseline", "--workers 4"}) {
    const auto r = cli("synthesize " + demo_args() + " " + extra);
    ASSERT_EQ(r.rc, 0) << extra;
    EXPECT_EQ(json::parse(r.out)["queries"], base) << extra;
  }
}

TEST(Cli, UnsatisfiableTaskExitsCleanly) {
  const auto r = cli("synthesize --task " + quoted(kUnsat) + " --catalog-dir " + quoted(testkit::catalogs_dir()));
  ASSERT_EQ(r.rc, 0);
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["queries"].empty());
  EXPECT_FALSE(j["timed_out"]);
}

TEST(Cli, ExitCodes) {
  testkit::TempDir d;
  d.write("broken.json", R"({"config": {"catalog": "mondial-mini", "arity": 2, "samples": 1}, "rows": [["a ||", ""]]})");
  d.write("lost.json", R"({"config": {"catalog": "atlantis", "arity": 1, "samples": 1}, "rows": [["a"]]})");
  const auto dir = " --catalog-dir " + quoted(testkit::catalogs_dir());

  const auto parse = cli("synthesize --task " + quoted(d.path() / "broken.json") + dir, true);
  EXPECT_EQ(parse.rc, 1);
  EXPECT_NE(parse.out.find("row 0 column 0"), std::string::npos) << parse.out;
  EXPECT_EQ(cli("synthesize --task " + quoted(d.path() / "missing.json") + dir).rc, 1);
  EXPECT_EQ(cli("synthesize " + demo_args() + " --policy greedy").rc, 1);
  EXPECT_EQ(cli("synthesize").rc, 1);
  EXPECT_EQ(cli("frobnicate").rc, 1);
  EXPECT_EQ(cli("synthesize --task " + quoted(d.path() / "lost.json") + dir).rc, 2);
  EXPECT_EQ(cli("synthesize " + demo_args() + " --catalog atlantis").rc, 2);
  EXPECT_EQ(cli("--help").rc, 0);
}

TEST(Cli, TimeoutHasItsOwnExitCode) {
  testkit::TempDir d;
  testkit::write_catalog(make_oversized_catalog(1), d.path());
  d.write("slow.json", R"({"config": {"catalog": "oversized", "arity": 3, "samples": 1}, "rows": [[">= 0", ">= 0", ">= 0"]]})");
  const auto r = cli("synthesize --task " + quoted(d.path() / "slow.json") + " --catalog-dir " + quoted(d.path()) +
                     " --budget 300");
  EXPECT_EQ(r.rc, 3);
  const auto j = json::parse(r.out);
  EXPECT_TRUE(j["timed_out"]);
}

TEST(Cli, CatalogDirFromEnvironment) {
  const auto r = cli("synthesize --task " + quoted(kDemoTask), false,
                     std::string(kCatalogDirEnv) + "=" + quoted(testkit::catalogs_dir()));
  EXPECT_EQ(r.rc, 0);
  EXPECT_EQ(cli("synthesize --task " + quoted(kDemoTask), false, std::string(kCatalogDirEnv) + "=/nonexistent").rc, 2);
}

TEST(Cli, CatalogByPath) {
  const auto r = cli("synthesize --task " + quoted(kDemoTask) + " --catalog " +
                     quoted(testkit::catalogs_dir() / "mondial-mini" / "schema.json"));
  EXPECT_EQ(r.rc, 0);
}

TEST(Cli, PersistWritesTheReport) {
  testkit::TempDir d;
  const auto r = cli("synthesize " + demo_args() + " --persist " + quoted(d.path() / "report.json"));
  ASSERT_EQ(r.rc, 0);
  EXPECT_EQ(slurp(d.path() / "report.json"), r.out);
}

TEST(Cli, TraceFlag) {
  const auto j = json::parse(cli("synthesize " + demo_args() + " --trace").out);
  ASSERT_TRUE(j.contains("trace"));
  EXPECT_EQ(j["trace"].size(), j["filters_validated"]);
}

TEST(Cli, ExplainMatchesGoldenFiles) {
  EXPECT_EQ(cli("explain " + demo_args()).out, slurp(testkit::golden_dir() / "demo_query.dot"));
  EXPECT_EQ(cli("explain " + demo_args() + " --format structured").out, slurp(testkit::golden_dir() / "demo_query.json"));
  const auto one = json::parse(cli("explain " + demo_args() + " --format structured --constraints 2").out);
  ASSERT_EQ(one["boxes"].size(), 1u);
  EXPECT_EQ(one["boxes"][0]["constraint_kind"], "metadata");
  EXPECT_EQ(cli("explain " + demo_args() + " --query 9999").rc, 1);
  EXPECT_EQ(cli("explain " + demo_args() + " --constraints 5").rc, 1);
  EXPECT_EQ(cli("explain " + demo_args() + " --format svg").rc, 1);
}

TEST(Cli, LoadDescribesCatalog) {
  const auto r = cli("load mondial-mini --catalog-dir " + quoted(testkit::catalogs_dir()));
  ASSERT_EQ(r.rc, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["relations"].size(), 3u);
  EXPECT_EQ(cli("load atlantis --catalog-dir " + quoted(testkit::catalogs_dir())).rc, 2);
}

TEST(Cli, BenchPrintsATable) {
  const auto r = cli("bench --seeds 4");
  ASSERT_EQ(r.rc, 0) << r.out;
  for (const char *word : {"policy", "median_validations", "total_time_ms", "random", "baseline", "bayes"})
    EXPECT_NE(r.out.find(word), std::string::npos) << word << "\n" << r.out;
}
