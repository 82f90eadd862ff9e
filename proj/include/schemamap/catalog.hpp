#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "schemamap/constraint.hpp"
#include "schemamap/stats.hpp"

namespace schemamap {

struct ColumnRef {
  std::size_t relation = 0;
  std::size_t column = 0;
  auto operator<=>(const ColumnRef &) const = default;
};

/// Equi-join edge declared in the schema config. left and right may name the
/// same relation (self-join).
struct JoinEdge {
  ColumnRef left;
  ColumnRef right;
  bool self_join() const { return left.relation == right.relation; }
  friend bool operator==(const JoinEdge &, const JoinEdge &) = default;
};

struct Relation {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t row_count() const { return rows.size(); }
  std::vector<Cell> column_cells(std::size_t column) const;
};

struct Posting {
  std::uint32_t relation;
  std::uint32_t column;
  std::uint32_t row;
};

/// Maps normalized whole-cell keys and normalized tokens to cell postings.
class InvertedIndex {
public:
  void add_cell(const Cell &cell, Posting posting);

  const std::vector<Posting> &cell_postings(const std::string &key) const;
  const std::vector<Posting> &token_postings(const std::string &token) const;

  std::size_t cell_key_count() const { return cells_.size(); }
  std::size_t token_count() const { return tokens_.size(); }

private:
  std::unordered_map<std::string, std::vector<Posting>> cells_;
  std::unordered_map<std::string, std::vector<Posting>> tokens_;
};

class CatalogError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Immutable in-memory source database: relations, declared join edges, an
/// inverted index over every cell, and per-column stats.
class Catalog {
public:
  Catalog(std::string name, std::vector<Relation> relations, std::vector<JoinEdge> join_edges,
          std::size_t top_k = kDefaultTopK);

  const std::string &name() const { return name_; }
  const std::vector<Relation> &relations() const { return relations_; }
  const Relation &relation(std::size_t i) const { return relations_.at(i); }
  const std::vector<JoinEdge> &join_edges() const { return join_edges_; }
  const InvertedIndex &index() const { return index_; }
  const ColumnStats &stats(ColumnRef col) const { return stats_.at(col.relation).at(col.column); }
  const Cell &cell(ColumnRef col, std::size_t row) const { return relations_[col.relation].rows[row][col.column]; }

  std::vector<ColumnRef> all_columns() const;
  std::size_t column_count() const;
  std::optional<std::size_t> find_relation(std::string_view name) const;
  /// Resolves "relation.column"; throws CatalogError naming the column.
  ColumnRef resolve(std::string_view qualified) const;
  std::string qualified_name(ColumnRef col) const;
  const std::string &column_name(ColumnRef col) const {
    return relations_.at(col.relation).columns.at(col.column);
  }

  /// Columns with at least one cell equal to pred's constant under opts.
  /// pred must be an equality predicate; ordering predicates are answered
  /// from stats instead.
  std::set<ColumnRef> lookup_value(const ValuePredicate &pred, const MatchOptions &opts = {}) const;

private:
  std::string name_;
  std::vector<Relation> relations_;
  std::vector<JoinEdge> join_edges_;
  InvertedIndex index_;
  std::vector<std::vector<ColumnStats>> stats_;
};

/// RFC-4180 CSV. The first record is the header.
std::vector<std::vector<std::string>> parse_csv(std::istream &in);

/// Loads a JSON schema config:
///   {"version": 1, "name": "...", "top_k": 1000,
///    "relations": [{"name": "...", "csv": "file.csv", "columns": [...]}],
///    "join_edges": [{"left": "rel.col", "right": "rel.col"}]}
/// CSV paths resolve against data_dir, or the config's directory when
/// data_dir is empty.
Catalog load_catalog(const std::filesystem::path &schema_config, const std::filesystem::path &data_dir = {});

} // namespace schemamap
