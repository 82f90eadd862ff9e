#include "schemamap/stats.hpp"

#include <algorithm>
#include <map>

namespace schemamap {

std::size_t ColumnStats::untracked_count() const {
  std::size_t tracked = 0;
  for (const auto &[value, count] : value_frequencies) tracked += count;
  return row_count - tracked;
}

std::size_t ColumnStats::untracked_distinct() const { return distinct_count - value_frequencies.size(); }

bool is_int_text(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) text.remove_prefix(1);
  return !text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; });
}

namespace {

bool digits(std::string_view s, std::size_t from, std::size_t n) {
  if (from + n > s.size()) return false;
  for (std::size_t i = from; i < from + n; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

int number_at(std::string_view s, std::size_t from, std::size_t n) {
  int v = 0;
  for (std::size_t i = from; i < from + n; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

} // namespace

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  if (!digits(s, 0, 4) || !digits(s, 5, 2) || !digits(s, 8, 2)) return false;
  const int month = number_at(s, 5, 2), day = number_at(s, 8, 2);
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

bool is_iso_time(std::string_view s) {
  if (s.size() < 5 || s[2] != ':' || !digits(s, 0, 2) || !digits(s, 3, 2)) return false;
  if (number_at(s, 0, 2) > 23 || number_at(s, 3, 2) > 59) return false;
  if (s.size() == 5) return true;
  if (s.size() < 8 || s[5] != ':' || !digits(s, 6, 2) || number_at(s, 6, 2) > 60) return false;
  if (s.size() == 8) return true;
  return s[8] == '.' && s.size() > 9 && digits(s, 9, s.size() - 9);
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

ColumnStats compute_column_stats(std::span<const Cell> cells, std::string name, std::size_t top_k) {
  ColumnStats stats;
  stats.name = std::move(name);
  stats.row_count = cells.size();

  bool all_int = true, all_decimal = true, all_date = true, all_time = true;
  std::map<std::string, std::size_t> counts;
  for (const Cell &cell : cells) {
    ++counts[cell.text];
    stats.max_length = std::max(stats.max_length, utf8_length(cell.text));
    if (cell.number) {
      stats.numeric_min = std::min(stats.numeric_min.value_or(*cell.number), *cell.number);
      stats.numeric_max = std::max(stats.numeric_max.value_or(*cell.number), *cell.number);
    }
    if (cell.empty()) continue;
    ++stats.non_empty_count;
    all_decimal = all_decimal && cell.number.has_value();
    all_int = all_int && cell.number.has_value() && is_int_text(cell.text);
    all_date = all_date && is_iso_date(cell.text);
    all_time = all_time && is_iso_time(cell.text);
  }
  stats.distinct_count = counts.size();

  if (stats.non_empty_count == 0)
    stats.inferred_type = DataType::Text;
  else if (all_int)
    stats.inferred_type = DataType::Int;
  else if (all_decimal)
    stats.inferred_type = DataType::Decimal;
  else if (all_date)
    stats.inferred_type = DataType::Date;
  else if (all_time)
    stats.inferred_type = DataType::Time;
  else
    stats.inferred_type = DataType::Text;

  if (stats.inferred_type == DataType::Int || stats.inferred_type == DataType::Decimal) {
    stats.min_value = stats.numeric_min;
    stats.max_value = stats.numeric_max;
  }

  stats.value_frequencies.assign(counts.begin(), counts.end());
  std::stable_sort(stats.value_frequencies.begin(), stats.value_frequencies.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  if (stats.value_frequencies.size() > top_k) stats.value_frequencies.resize(top_k);
  return stats;
}

} // namespace schemamap
