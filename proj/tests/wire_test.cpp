#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "schemamap/wire.hpp"
#include "test_support.hpp"

using namespace schemamap;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST(TaskDocument, DemoFileParses) {
  const auto doc = parse_task_text(slurp(testkit::data_dir() / "tasks" / "demo.task.json"));
  EXPECT_EQ(doc.catalog, "mondial-mini");
  EXPECT_EQ(doc.arity, 3u);
  ASSERT_EQ(doc.rows.size(), 1u);
  EXPECT_EQ(doc.rows[0][0], "California || Nevada");
  EXPECT_EQ(doc.metadata[2], "DataType=='decimal' AND MinValue>='0'");
  const auto task = doc.to_task();
  EXPECT_EQ(task.arity(), 3u);
  EXPECT_TRUE(task.samples()[0].cells[2].empty());
}

TEST(TaskDocument, RoundTrips) {
  TaskDocument doc;
  doc.catalog = "x";
  doc.arity = 2;
  doc.rows = {{"a || b", ""}, {"'q\\'d'", "<= 3"}};
  doc.metadata = {"", "DataType == 'integer'"};
  const auto back = parse_task_document(json::parse(to_json(doc).dump()));
  EXPECT_EQ(back.catalog, doc.catalog);
  EXPECT_EQ(back.arity, doc.arity);
  EXPECT_EQ(back.rows, doc.rows);
  EXPECT_EQ(back.metadata, doc.metadata);
}

TEST(TaskDocument, MetadataIsOptional) {
  auto doc = parse_task_text(R"({"config": {"arity": 2, "samples": 1}, "rows": [["a", "b"]]})");
  EXPECT_EQ(doc.metadata, (std::vector<std::string>{"", ""}));
  doc = parse_task_text(
      R"({"config": {"arity": 1, "samples": 1, "metadata": false}, "rows": [["a"]], "metadata": ["DataType=='text'"]})");
  EXPECT_EQ(doc.metadata, (std::vector<std::string>{""}));
}

TEST(TaskDocument, Errors) {
  EXPECT_THROW(parse_task_text("{"), WireError);
  EXPECT_THROW(parse_task_text("[]"), WireError);
  EXPECT_THROW(parse_task_text(R"({"config": {}})"), WireError);
  EXPECT_THROW(parse_task_text(R"({"config": {"arity": 0}})"), WireError);
  EXPECT_THROW(parse_task_text(R"({"version": 2, "config": {"arity": 1}})"), WireError);
  EXPECT_THROW(parse_task_text(R"({"config": {"arity": 1, "samples": 2}, "rows": [["a"]]})"), WireError);
  EXPECT_THROW(parse_task_text(R"({"config": {"arity": 1}, "rows": [[1]]})"), WireError);
  // shape errors surface when the task is built
  EXPECT_THROW(parse_task_text(R"({"config": {"arity": 2}, "rows": [["a"]]})").to_task(), TaskError);
  try {
    parse_task_text(R"({"config": {"arity": 2}, "rows": [["a", "b ||"]]})").to_task();
    FAIL();
  } catch (const TaskParseError &e) {
    EXPECT_FALSE(e.in_metadata());
    EXPECT_EQ(e.row(), 0u);
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(Options, OverridesApply) {
  EngineConfig cfg;
  apply_options(cfg, json::parse(R"({"policy": "random", "budget_ms": 250, "max_edges": 2, "seed": 9,
                                     "match_mode": "token", "case_sensitive": true, "workers": 4, "batch_size": 16})"));
  EXPECT_EQ(cfg.policy, SchedulePolicy::Random);
  EXPECT_EQ(cfg.budget, std::chrono::milliseconds(250));
  EXPECT_EQ(cfg.limits.max_edges, 2u);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.match.mode, MatchMode::Token);
  EXPECT_TRUE(cfg.match.case_sensitive);
  EXPECT_EQ(cfg.workers, 4u);
  EXPECT_EQ(cfg.batch_size, 16u);
  apply_options(cfg, nullptr);
  EXPECT_EQ(cfg.workers, 4u);
  EXPECT_THROW(apply_options(cfg, json::parse(R"({"policy": "fastest"})")), WireError);
  EXPECT_THROW(apply_options(cfg, json::parse(R"({"match_mode": "fuzzy"})")), WireError);
  EXPECT_THROW(apply_options(cfg, json::parse(R"({"budget_ms": "soon"})")), WireError);
}

TEST(Report, DemoReportFields) {
  const auto &c = testkit::mondial();
  const auto report = synthesize(testkit::demo_task(), c);
  const auto j = report_to_json(report, c);
  for (const char *key : {"version", "catalog", "timed_out", "candidates", "filters_generated", "filters_validated",
                          "filters_pruned", "filters_inferred", "candidates_pruned", "elapsed_ms", "queries"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_FALSE(j.contains("trace"));
  EXPECT_EQ(j["catalog"], "mondial-mini");
  const auto &q = j["queries"][0];
  EXPECT_EQ(q["id"], 0);
  EXPECT_EQ(q["projection"], json({"geo_lake.province", "lake.name", "lake.area"}));
  EXPECT_EQ(q["joins"][0]["left"], "lake.name");
  EXPECT_EQ(q["joins"][0]["right"], "geo_lake.lake");
  EXPECT_FALSE(report_to_json(report, c, false).contains("elapsed_ms"));
}

TEST(Report, SelfJoinInstancesAreDistinct) {
  Catalog c("p", {testkit::make_relation("person", {"id", "boss", "name"}, {{"1", "2", "Ann"}, {"2", "", "Bo"}})},
            {{{0, 1}, {0, 0}}});
  const auto q = make_candidate({{{0, 0}, {0, 1}}, {{0, 0, 1}}}, {{0, 2}, {1, 2}});
  const auto j = query_to_json(q, 0, c);
  ASSERT_EQ(j["relations"].size(), 2u);
  EXPECT_NE(j["relations"][0]["instance"], j["relations"][1]["instance"]);
  EXPECT_EQ(j["relations"][1]["relation"], "person");
}

TEST(Report, TraceIsOptIn) {
  EngineConfig cfg;
  cfg.record_trace = true;
  const auto &c = testkit::mondial();
  const auto j = report_to_json(synthesize(testkit::demo_task(), c, cfg), c);
  ASSERT_TRUE(j.contains("trace"));
  const auto &t = j["trace"][0];
  for (const char *key : {"filter", "edges", "fail_prob", "cost", "pruned_count", "priority", "passed"})
    EXPECT_TRUE(t.contains(key)) << key;
}
