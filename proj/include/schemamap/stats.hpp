#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "schemamap/constraint.hpp"

namespace schemamap {

/// Column metadata collected at load time.
struct ColumnStats {
  std::string name;
  DataType inferred_type = DataType::Text;
  /// Present only for int/decimal columns.
  std::optional<double> min_value;
  std::optional<double> max_value;
  /// Maximum length in characters (UTF-8 code points) over raw cell text.
  std::size_t max_length = 0;
  std::size_t distinct_count = 0;
  std::size_t row_count = 0;
  std::size_t non_empty_count = 0;
  /// Range over every numerically parseable cell, whatever the inferred type.
  /// Used for ordering-predicate overlap checks on mixed columns.
  std::optional<double> numeric_min;
  std::optional<double> numeric_max;
  /// Top-K raw values by count (ties broken by value), descending count.
  std::vector<std::pair<std::string, std::size_t>> value_frequencies;

  /// Rows whose value is not in value_frequencies.
  std::size_t untracked_count() const;
  std::size_t untracked_distinct() const;
};

inline constexpr std::size_t kDefaultTopK = 1000;

/// Most specific type all non-empty cells satisfy: int < decimal, ISO-8601
/// date (YYYY-MM-DD) or time (HH:MM[:SS[.fff]]), else text.
ColumnStats compute_column_stats(std::span<const Cell> cells, std::string name = {},
                                 std::size_t top_k = kDefaultTopK);

bool is_int_text(std::string_view text);
bool is_iso_date(std::string_view text);
bool is_iso_time(std::string_view text);
std::size_t utf8_length(std::string_view text);

} // namespace schemamap
