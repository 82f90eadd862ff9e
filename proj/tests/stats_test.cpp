#include <gtest/gtest.h>

#include "schemamap/stats.hpp"

using namespace schemamap;

namespace {

ColumnStats of(std::vector<std::string> values, std::size_t top_k = kDefaultTopK) {
  std::vector<Cell> cells;
  for (auto &v : values) cells.emplace_back(v);
  return compute_column_stats(cells, "c", top_k);
}

} // namespace

TEST(Stats, DecimalColumn) {
  const auto s = of({"497", "53.2", "981"});
  EXPECT_EQ(s.inferred_type, DataType::Decimal);
  EXPECT_EQ(s.min_value, 53.2);
  EXPECT_EQ(s.max_value, 981);
  EXPECT_EQ(s.distinct_count, 3u);
  EXPECT_EQ(s.row_count, 3u);
  EXPECT_EQ(s.max_length, 4u);
}

TEST(Stats, EmptyColumnIsText) {
  const auto s = of({});
  EXPECT_EQ(s.inferred_type, DataType::Text);
  EXPECT_FALSE(s.min_value);
  EXPECT_EQ(s.distinct_count, 0u);
  EXPECT_EQ(s.row_count, 0u);
}

TEST(Stats, IntColumnOrdersNumerically) {
  const auto s = of({"3", "7", "11"});
  EXPECT_EQ(s.inferred_type, DataType::Int);
  EXPECT_EQ(s.min_value, 3);
  EXPECT_EQ(s.max_value, 11);
}

TEST(Stats, TypeLattice) {
  EXPECT_EQ(of({"1", "", "2"}).inferred_type, DataType::Int); // empty cells are ignored
  EXPECT_EQ(of({"1", "2.5"}).inferred_type, DataType::Decimal);
  EXPECT_EQ(of({"2023-01-31", "1999-12-01"}).inferred_type, DataType::Date);
  EXPECT_EQ(of({"12:30", "08:15:00"}).inferred_type, DataType::Time);
  EXPECT_EQ(of({"2023-13-01"}).inferred_type, DataType::Text);
  EXPECT_EQ(of({"1", "x"}).inferred_type, DataType::Text);
  EXPECT_EQ(of({"", ""}).inferred_type, DataType::Text);
}

TEST(Stats, MixedColumnKeepsNumericRange) {
  const auto s = of({"5", "n/a", "-2"});
  EXPECT_EQ(s.inferred_type, DataType::Text);
  EXPECT_FALSE(s.min_value);
  EXPECT_EQ(s.numeric_min, -2);
  EXPECT_EQ(s.numeric_max, 5);
  EXPECT_EQ(s.non_empty_count, 3u);
}

TEST(Stats, LengthCountsCodePoints) {
  EXPECT_EQ(utf8_length("Zürich"), 6u);
  EXPECT_EQ(of({"Zürich", "Bern"}).max_length, 6u);
}

TEST(Stats, TopKFrequencies) {
  const auto s = of({"a", "b", "a", "c", "a", "b"}, 2);
  ASSERT_EQ(s.value_frequencies.size(), 2u);
  EXPECT_EQ(s.value_frequencies[0], (std::pair<std::string, std::size_t>{"a", 3}));
  EXPECT_EQ(s.value_frequencies[1], (std::pair<std::string, std::size_t>{"b", 2}));
  EXPECT_EQ(s.distinct_count, 3u);
  EXPECT_EQ(s.untracked_count(), 1u);
  EXPECT_EQ(s.untracked_distinct(), 1u);
}

TEST(Stats, Recognizers) {
  EXPECT_TRUE(is_int_text("-12"));
  EXPECT_FALSE(is_int_text("1.0"));
  EXPECT_TRUE(is_iso_date("2020-02-29"));
  EXPECT_FALSE(is_iso_date("2020-2-29"));
  EXPECT_TRUE(is_iso_time("23:59:59.5"));
  EXPECT_FALSE(is_iso_time("24:00"));
}
