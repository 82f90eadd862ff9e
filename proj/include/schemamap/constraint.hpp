#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace schemamap {

enum class CompareOp { Gt, Ge, Lt, Le, Eq, Ne };

std::string_view to_string(CompareOp op);
bool is_ordering(CompareOp op);

/// A constant as written by the user. It is numeric iff its whole text is a
/// decimal number; quoting does not change that.
class Literal {
public:
  Literal() = default;
  explicit Literal(std::string text);

  const std::string &text() const { return text_; }
  bool is_numeric() const { return number_.has_value(); }
  double number() const { return *number_; }

  friend bool operator==(const Literal &, const Literal &) = default;

private:
  std::string text_;
  std::optional<double> number_;
};

/// Parses a full string as a decimal number ("12", "-0.5", "1e3"). Rejects
/// inf/nan, hex and trailing garbage. Leading/trailing whitespace is ignored.
std::optional<double> parse_decimal(std::string_view text);

/// Shortest round-trip decimal text for a double ("497", "53.2").
std::string canonical_number(double value);

struct ValuePredicate {
  CompareOp op = CompareOp::Eq;
  Literal constant;
  friend bool operator==(const ValuePredicate &, const ValuePredicate &) = default;
};

enum class MetadataSubject { DataType, ColumnName, MaxValue, MinValue, MaxLength };

std::string_view to_string(MetadataSubject subject);

enum class DataType { Int, Decimal, Text, Date, Time };

std::string_view to_string(DataType type);
std::optional<DataType> parse_data_type(std::string_view name);

struct MetadataPredicate {
  MetadataSubject subject = MetadataSubject::DataType;
  CompareOp op = CompareOp::Eq;
  Literal constant;
  friend bool operator==(const MetadataPredicate &, const MetadataPredicate &) = default;
};

/// AND/OR tree over predicate leaves. AND and OR nodes hold >= 2 children and
/// never directly nest a node of the same kind (chains are flattened).
template <typename Pred> struct BoolExpr {
  enum class Kind { Leaf, And, Or };
  Kind kind = Kind::Leaf;
  Pred leaf{};
  std::vector<BoolExpr> children;

  static BoolExpr make_leaf(Pred p) {
    BoolExpr e;
    e.kind = Kind::Leaf;
    e.leaf = std::move(p);
    return e;
  }

  friend bool operator==(const BoolExpr &, const BoolExpr &) = default;
};

/// A constraint is either Empty (no expression) or a tree.
template <typename Pred> struct Constraint {
  std::optional<BoolExpr<Pred>> expr;
  /// Text the user typed; used as the constraint's display label.
  std::string source;

  bool empty() const { return !expr.has_value(); }
  friend bool operator==(const Constraint &a, const Constraint &b) { return a.expr == b.expr; }
};

using ValueExpr = BoolExpr<ValuePredicate>;
using MetadataExpr = BoolExpr<MetadataPredicate>;
using ValueConstraint = Constraint<ValuePredicate>;
using MetadataConstraint = Constraint<MetadataPredicate>;

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &message, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// ParseError from SynthesisTask::parse, tagged with the offending cell.
/// For metadata cells `row` is unused.
class TaskParseError : public ParseError {
public:
  TaskParseError(const std::string &message, std::size_t position, bool metadata, std::size_t row, std::size_t column)
      : ParseError(message, position), metadata_(metadata), row_(row), column_(column) {}
  bool in_metadata() const { return metadata_; }
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

private:
  bool metadata_;
  std::size_t row_, column_;
};

ValueConstraint parse_value_constraint(std::string_view text);
MetadataConstraint parse_metadata_constraint(std::string_view text);

/// Canonical text; reparsing it yields a structurally identical AST.
std::string to_string(const ValueConstraint &c);
std::string to_string(const MetadataConstraint &c);
std::string to_string(const ValueExpr &e);
std::string to_string(const MetadataExpr &e);

/// A cell value as stored in the catalog or given to an evaluator.
struct Cell {
  std::string text;
  std::optional<double> number;

  Cell() = default;
  explicit Cell(std::string raw);
  bool empty() const { return text.empty(); }
  friend bool operator==(const Cell &, const Cell &) = default;
};

enum class MatchMode { Cell, Token };

struct MatchOptions {
  MatchMode mode = MatchMode::Cell;
  bool case_sensitive = false;
};

/// Trimmed, lowercased (ASCII) copy.
std::string normalize_text(std::string_view text);
/// Index key for whole-cell equality: canonical number for numeric cells,
/// normalized text otherwise.
std::string cell_key(const Cell &cell);
/// Maximal runs of alphanumeric bytes (non-ASCII bytes count as
/// alphanumeric), normalized.
std::vector<std::string> tokenize(std::string_view text);

bool eval(const ValuePredicate &p, const Cell &cell, const MatchOptions &opts = {});
bool eval(const ValueExpr &e, const Cell &cell, const MatchOptions &opts = {});
bool eval_value_constraint(const ValueConstraint &c, const Cell &cell,
                           const MatchOptions &opts = {});

struct ColumnStats;
bool eval(const MetadataPredicate &p, const ColumnStats &stats);
bool eval(const MetadataExpr &e, const ColumnStats &stats);
bool eval_metadata_constraint(const MetadataConstraint &c, const ColumnStats &stats);

struct SampleConstraint {
  std::vector<ValueConstraint> cells;
};

/// Target arity plus per-row sample constraints and per-column metadata
/// constraints. Validated on construction.
class SynthesisTask {
public:
  SynthesisTask(std::size_t arity, std::vector<SampleConstraint> samples,
                std::vector<MetadataConstraint> metadata);

  /// Parses every cell and metadata string; ParseError messages are prefixed
  /// with the cell location.
  static SynthesisTask parse(std::size_t arity,
                             const std::vector<std::vector<std::string>> &rows,
                             const std::vector<std::string> &metadata);

  std::size_t arity() const { return arity_; }
  const std::vector<SampleConstraint> &samples() const { return samples_; }
  const std::vector<MetadataConstraint> &metadata() const { return metadata_; }

  /// True if neither a value nor a metadata constraint restricts column j.
  bool column_unconstrained(std::size_t column) const;

private:
  std::size_t arity_;
  std::vector<SampleConstraint> samples_;
  std::vector<MetadataConstraint> metadata_;
};

class TaskError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace schemamap
