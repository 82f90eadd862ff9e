#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "schemamap/catalog.hpp"
#include "schemamap/workload.hpp"
#include "test_support.hpp"

using namespace schemamap;
using testkit::mondial;
using testkit::TempDir;

namespace {

std::set<std::string> lookup(const Catalog &c, std::string_view constant, MatchOptions opts = {}) {
  std::set<std::string> out;
  for (auto col : c.lookup_value({CompareOp::Eq, Literal(std::string(constant))}, opts))
    out.insert(c.qualified_name(col));
  return out;
}

// Brute force: every column holding a cell equal to the constant.
std::set<std::string> scan(const Catalog &c, std::string_view constant, MatchOptions opts = {}) {
  std::set<std::string> out;
  const ValuePredicate p{CompareOp::Eq, Literal(std::string(constant))};
  for (auto col : c.all_columns())
    for (std::size_t r = 0; r < c.relation(col.relation).rows.size(); ++r)
      if (eval(p, c.cell(col, r), opts)) out.insert(c.qualified_name(col));
  return out;
}


} // namespace

TEST(Catalog, LoadsMondialMini) {
  const auto &c = mondial();
  EXPECT_EQ(c.name(), "mondial-mini");
  ASSERT_EQ(c.relations().size(), 3u);
  EXPECT_EQ(c.relation(0).name, "lake");
  EXPECT_EQ(c.join_edges().size(), 2u);
  const auto area = c.stats(c.resolve("lake.area"));
  EXPECT_EQ(area.inferred_type, DataType::Decimal);
  EXPECT_EQ(area.min_value, 53.2);
  EXPECT_EQ(area.max_value, 981);
  EXPECT_EQ(area.distinct_count, 3u);
  EXPECT_EQ(c.stats(c.resolve("province.population")).inferred_type, DataType::Int);
}

TEST(Catalog, LookupExamples) {
  const auto &c = mondial();
  EXPECT_EQ(lookup(c, "Lake Tahoe"), (std::set<std::string>{"lake.name", "geo_lake.lake"}));
  EXPECT_TRUE(lookup(c, "Atlantis").empty());
  EXPECT_EQ(lookup(c, "california"), (std::set<std::string>{"province.name", "geo_lake.province"}));
  EXPECT_EQ(lookup(c, "497.0"), (std::set<std::string>{"lake.area"}));
  EXPECT_TRUE(lookup(c, "california", {MatchMode::Cell, true}).empty());
  EXPECT_EQ(lookup(c, "Tahoe", {MatchMode::Token, false}), (std::set<std::string>{"lake.name", "geo_lake.lake"}));
  EXPECT_THROW(c.lookup_value({CompareOp::Gt, Literal("3")}), std::invalid_argument);
}

TEST(Catalog, IndexAgreesWithScan) {
  // completeness and soundness against a full scan, for every stored value
  // and every token of every stored value, on fixture and random catalogs
  std::vector<Catalog> catalogs;
  catalogs.push_back(mondial());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) catalogs.push_back(make_micro_catalog(seed));
  for (const auto &c : catalogs) {
    std::set<std::string> probes = {"nowhere", "0", "4.0"};
    for (auto col : c.all_columns())
      for (std::size_t r = 0; r < c.relation(col.relation).rows.size(); ++r) {
        probes.insert(c.cell(col, r).text);
        for (auto &t : tokenize(c.cell(col, r).text)) probes.insert(t);
      }
    for (const auto &p : probes) {
      if (p.empty()) continue;
      for (auto mode : {MatchMode::Cell, MatchMode::Token})
        for (bool cs : {false, true}) {
          const MatchOptions opts{mode, cs};
          EXPECT_EQ(lookup(c, p, opts), scan(c, p, opts)) << c.name() << " probe '" << p << "'";
        }
    }
  }
}

TEST(Catalog, ResolveAndNames) {
  const auto &c = mondial();
  const auto col = c.resolve("geo_lake.province");
  EXPECT_EQ(c.qualified_name(col), "geo_lake.province");
  EXPECT_THROW(c.resolve("lake.depth"), CatalogError);
  EXPECT_THROW(c.resolve("sea.name"), CatalogError);
  EXPECT_THROW(c.resolve("lake"), CatalogError);
}

TEST(Catalog, ConstructorValidates) {
  using testkit::make_relation;
  EXPECT_THROW(Catalog("empty", {}, {}), CatalogError);
  EXPECT_THROW(Catalog("dup", {make_relation("a", {"x"}, {}), make_relation("a", {"y"}, {})}, {}), CatalogError);
  EXPECT_THROW(Catalog("ragged", {make_relation("a", {"x", "y"}, {{"1"}})}, {}), CatalogError);
  EXPECT_THROW(Catalog("edge", {make_relation("a", {"x"}, {})}, {{{0, 0}, {0, 1}}}), CatalogError);
  EXPECT_THROW(Catalog("self", {make_relation("a", {"x"}, {})}, {{{0, 0}, {0, 0}}}), CatalogError);
  // a self-join between different columns is fine
  Catalog ok("person", {make_relation("person", {"id", "manager"}, {{"1", ""}, {"2", "1"}})}, {{{0, 1}, {0, 0}}});
  EXPECT_TRUE(ok.join_edges()[0].self_join());
}

TEST(Catalog, ParseCsv) {
  std::istringstream in("a,b\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",\n");
  const auto rows = parse_csv(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"x, y", "say \"hi\""}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"multi\nline", ""}));
  std::istringstream bad("a\n\"open\n");
  EXPECT_THROW(parse_csv(bad), CatalogError);
}

TEST(Catalog, LoadErrors) {
  TempDir dir;
  dir.write("r.csv", "x,y\n1,2\n");
  auto config = [&](const std::string &body) {
    dir.write("schema.json", body);
    return dir.path() / "schema.json";
  };
  auto message = [](const std::filesystem::path &p) {
    try {
      load_catalog(p);
    } catch (const CatalogError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  EXPECT_NE(message(config(R"({"version":1,"name":"z","relations":[]})")).find("no relations"), std::string::npos);
  EXPECT_NE(message(config(R"({"version":1,"name":"m","relations":[{"name":"r","csv":"missing.csv","columns":["x","y"]}]})"))
                .find("missing CSV"),
            std::string::npos);
  EXPECT_NE(message(config(R"({"version":1,"name":"h","relations":[{"name":"r","csv":"r.csv","columns":["x","z"]}]})"))
                .find("header"),
            std::string::npos);
  EXPECT_NE(message(config(R"({"version":1,"name":"e","relations":[{"name":"r","csv":"r.csv","columns":["x","y"]}],
                               "join_edges":[{"left":"r.x","right":"lake.depth"}]})"))
                .find("lake.depth"),
            std::string::npos);
  EXPECT_NE(message(config("{not json")).find("malformed"), std::string::npos);
  dir.write("g.csv", "x,y\n1\n");
  EXPECT_NE(message(config(R"({"version":1,"name":"g","relations":[{"name":"r","csv":"g.csv","columns":["x","y"]}]})"))
                .find("ragged"),
            std::string::npos);

  const auto ok = load_catalog(config(R"({"version":1,"name":"fine","relations":[{"name":"r","csv":"r.csv","columns":["x","y"]}]})"));
  EXPECT_EQ(ok.relation(0).rows.size(), 1u);
}

TEST(Catalog, WrittenCatalogsLoadBack) {
  TempDir dir;
  std::vector<Catalog> catalogs{make_micro_catalog(3), make_micro_catalog(11)};
  catalogs.push_back(Catalog("quoted", {testkit::make_relation("r", {"a", "b"}, {{"x, y", "say \"hi\""}, {"", "2"}})}, {}));
  for (const auto &c : catalogs) {
    const auto back = load_catalog(testkit::write_catalog(c, dir.path()) / "schema.json");
    EXPECT_EQ(back.name(), c.name());
    ASSERT_EQ(back.relations().size(), c.relations().size());
    for (std::size_t r = 0; r < c.relations().size(); ++r) {
      EXPECT_EQ(back.relation(r).columns, c.relation(r).columns);
      ASSERT_EQ(back.relation(r).rows.size(), c.relation(r).rows.size());
      for (std::size_t i = 0; i < c.relation(r).rows.size(); ++i)
        for (std::size_t k = 0; k < c.relation(r).columns.size(); ++k)
          EXPECT_EQ(back.relation(r).rows[i][k].text, c.relation(r).rows[i][k].text);
    }
    EXPECT_EQ(back.join_edges(), c.join_edges());
  }
}
