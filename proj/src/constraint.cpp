#include "schemamap/constraint.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "schemamap/stats.hpp"

namespace schemamap {

std::string_view to_string(CompareOp op) {
  switch (op) {
  case CompareOp::Gt: return ">";
  case CompareOp::Ge: return ">=";
  case CompareOp::Lt: return "<";
  case CompareOp::Le: return "<=";
  case CompareOp::Eq: return "=";
  case CompareOp::Ne: return "!=";
  }
  return "?";
}

bool is_ordering(CompareOp op) {
  return op == CompareOp::Gt || op == CompareOp::Ge || op == CompareOp::Lt || op == CompareOp::Le;
}

std::string_view to_string(MetadataSubject subject) {
  switch (subject) {
  case MetadataSubject::DataType: return "DataType";
  case MetadataSubject::ColumnName: return "ColumnName";
  case MetadataSubject::MaxValue: return "MaxValue";
  case MetadataSubject::MinValue: return "MinValue";
  case MetadataSubject::MaxLength: return "MaxLength";
  }
  return "?";
}

std::string_view to_string(DataType type) {
  switch (type) {
  case DataType::Int: return "int";
  case DataType::Decimal: return "decimal";
  case DataType::Text: return "text";
  case DataType::Date: return "date";
  case DataType::Time: return "time";
  }
  return "?";
}

std::optional<DataType> parse_data_type(std::string_view name) {
  const std::string n = normalize_text(name);
  for (DataType t : {DataType::Int, DataType::Decimal, DataType::Text, DataType::Date, DataType::Time})
    if (n == to_string(t)) return t;
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

} // namespace

std::optional<double> parse_decimal(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  // [+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  std::size_t int_digits = 0, frac_digits = 0;
  while (i < text.size() && is_digit(text[i])) ++i, ++int_digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && is_digit(text[i])) ++i, ++frac_digits;
  }
  if (int_digits + frac_digits == 0) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < text.size() && is_digit(text[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  // from_chars rejects a leading '+'.
  std::string_view body = text.front() == '+' ? text.substr(1) : text;
  double value = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec == std::errc::result_out_of_range || ptr != body.data() + body.size()) {
    value = std::strtod(std::string(body).c_str(), nullptr);
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value == 0 ? 0.0 : value; // fold -0
}

std::string canonical_number(double value) {
  if (value == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Literal::Literal(std::string text) : text_(std::move(text)), number_(parse_decimal(text_)) {}

Cell::Cell(std::string raw) : text(std::move(raw)), number(parse_decimal(text)) {}

std::string normalize_text(std::string_view text) {
  text = trim(text);
  std::string out(text);
  for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string cell_key(const Cell &cell) {
  if (cell.number) return canonical_number(*cell.number);
  return normalize_text(cell.text);
}

namespace {

std::vector<std::string> tokenize_impl(std::string_view text, bool fold) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      current.push_back(fold ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool contains_sequence(const std::vector<std::string> &hay, const std::vector<std::string> &needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) { return tokenize_impl(text, true); }

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { LParen, RParen, Op, And, Or, Word, Quoted, End };

struct Token {
  Tok kind;
  std::size_t begin; // byte offsets into the source
  std::size_t end;
  CompareOp op = CompareOp::Eq;
  std::string text; // unescaped contents for Quoted, raw for Word
};

bool is_bare_char(char c) {
  if (std::isspace(static_cast<unsigned char>(c))) return false;
  switch (c) {
  case '(': case ')': case '<': case '>': case '=': case '!': case '&': case '|': case '\'': case '"':
    return false;
  default:
    return true;
  }
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto two = [&](char a, char b) { return c == a && i + 1 < src.size() && src[i + 1] == b; };
    if (c == '(' || c == ')') {
      out.push_back({c == '(' ? Tok::LParen : Tok::RParen, i, i + 1});
      ++i;
    } else if (two('&', '&')) {
      out.push_back({Tok::And, i, i + 2});
      i += 2;
    } else if (two('|', '|')) {
      out.push_back({Tok::Or, i, i + 2});
      i += 2;
    } else if (two('>', '=') || two('<', '=') || two('!', '=') || two('=', '=')) {
      CompareOp op = c == '>' ? CompareOp::Ge : c == '<' ? CompareOp::Le : c == '!' ? CompareOp::Ne : CompareOp::Eq;
      out.push_back({Tok::Op, i, i + 2, op});
      i += 2;
    } else if (c == '>' || c == '<' || c == '=') {
      CompareOp op = c == '>' ? CompareOp::Gt : c == '<' ? CompareOp::Lt : CompareOp::Eq;
      out.push_back({Tok::Op, i, i + 1, op});
      ++i;
    } else if (c == '\'' || c == '"') {
      std::string body;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '\\' && i + 1 < src.size()) {
          body.push_back(src[i + 1]);
          i += 2;
        } else if (src[i] == c) {
          closed = true;
          ++i;
          break;
        } else {
          body.push_back(src[i++]);
        }
      }
      if (!closed) throw ParseError("unterminated string literal", start);
      out.push_back({Tok::Quoted, start, i, CompareOp::Eq, std::move(body)});
    } else if (is_bare_char(c)) {
      while (i < src.size() && is_bare_char(src[i])) ++i;
      std::string word(src.substr(start, i - start));
      Tok kind = word == "AND" ? Tok::And : word == "OR" ? Tok::Or : Tok::Word;
      out.push_back({kind, start, i, CompareOp::Eq, std::move(word)});
    } else {
      throw ParseError(std::string("unknown operator '") + c + "'", start);
    }
  }
  out.push_back({Tok::End, src.size(), src.size()});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

template <typename Pred> class Parser {
public:
  using Expr = BoolExpr<Pred>;
  using LeafFn = Pred (*)(Parser &);

  Parser(std::string_view src, LeafFn leaf) : src_(src), toks_(lex(src)), leaf_fn_(leaf) {}

  Constraint<Pred> parse_all() {
    Constraint<Pred> c;
    c.source = std::string(trim(src_));
    if (peek().kind == Tok::End) return c;
    c.expr = parse_or();
    if (peek().kind == Tok::RParen) throw ParseError("unbalanced ')'", peek().begin);
    if (peek().kind != Tok::End) throw ParseError("expected '&&' or '||'", peek().begin);
    return c;
  }

  const Token &peek() const { return toks_[pos_]; }
  const Token &take() { return toks_[pos_++]; }

  /// Adjacent bare words form one literal spanning the source between them.
  Literal take_literal(const char *what) {
    const Token &t = peek();
    if (t.kind == Tok::Quoted) {
      take();
      return Literal(t.text);
    }
    if (t.kind != Tok::Word) throw ParseError(std::string("expected ") + what, t.begin);
    const std::size_t begin = t.begin;
    std::size_t end = t.end;
    take();
    while (peek().kind == Tok::Word) end = take().end;
    return Literal(std::string(src_.substr(begin, end - begin)));
  }

private:
  Expr parse_or() {
    std::vector<Expr> parts;
    parts.push_back(parse_and());
    while (peek().kind == Tok::Or) {
      take();
      parts.push_back(parse_and());
    }
    return combine(Expr::Kind::Or, std::move(parts));
  }

  Expr parse_and() {
    std::vector<Expr> parts;
    parts.push_back(parse_primary());
    while (peek().kind == Tok::And) {
      take();
      parts.push_back(parse_primary());
    }
    return combine(Expr::Kind::And, std::move(parts));
  }

  Expr parse_primary() {
    if (peek().kind == Tok::LParen) {
      const std::size_t open = take().begin;
      if (peek().kind == Tok::RParen) throw ParseError("empty parentheses", peek().begin);
      Expr inner = parse_or();
      if (peek().kind != Tok::RParen) throw ParseError("unbalanced '('", open);
      take();
      return inner;
    }
    if (peek().kind == Tok::RParen) throw ParseError("unbalanced ')'", peek().begin);
    if (peek().kind == Tok::End) throw ParseError("unexpected end of input", peek().begin);
    return Expr::make_leaf(leaf_fn_(*this));
  }

  static Expr combine(typename Expr::Kind kind, std::vector<Expr> parts) {
    if (parts.size() == 1) return std::move(parts.front());
    Expr e;
    e.kind = kind;
    for (auto &p : parts) {
      if (p.kind == kind) {
        for (auto &c : p.children) e.children.push_back(std::move(c));
      } else {
        e.children.push_back(std::move(p));
      }
    }
    return e;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  LeafFn leaf_fn_;
};

ValuePredicate parse_value_leaf(Parser<ValuePredicate> &p) {
  ValuePredicate pred;
  if (p.peek().kind == Tok::Op) pred.op = p.take().op;
  const std::size_t at = p.peek().begin;
  pred.constant = p.take_literal("a constant");
  if (is_ordering(pred.op) && !pred.constant.is_numeric())
    throw ParseError("ordering operator '" + std::string(to_string(pred.op)) +
                         "' requires a numeric constant, got '" + pred.constant.text() + "'",
                     at);
  return pred;
}

std::optional<MetadataSubject> parse_subject(std::string_view word) {
  const std::string w = normalize_text(word);
  for (MetadataSubject s : {MetadataSubject::DataType, MetadataSubject::ColumnName, MetadataSubject::MaxValue,
                            MetadataSubject::MinValue, MetadataSubject::MaxLength})
    if (w == normalize_text(to_string(s))) return s;
  return std::nullopt;
}

MetadataPredicate parse_metadata_leaf(Parser<MetadataPredicate> &p) {
  MetadataPredicate pred;
  const Token &subject_tok = p.peek();
  if (subject_tok.kind != Tok::Word) throw ParseError("expected a metadata subject", subject_tok.begin);
  auto subject = parse_subject(subject_tok.text);
  if (!subject) throw ParseError("unknown metadata subject '" + subject_tok.text + "'", subject_tok.begin);
  pred.subject = *subject;
  p.take();
  const Token &op_tok = p.peek();
  if (op_tok.kind != Tok::Op) throw ParseError("expected a comparison operator", op_tok.begin);
  pred.op = op_tok.op;
  p.take();
  const std::size_t at = p.peek().begin;
  pred.constant = p.take_literal("a constant");

  switch (pred.subject) {
  case MetadataSubject::DataType: {
    if (is_ordering(pred.op)) throw ParseError("DataType admits only = and !=", op_tok.begin);
    auto type = parse_data_type(pred.constant.text());
    if (!type) throw ParseError("unknown data type '" + pred.constant.text() + "'", at);
    pred.constant = Literal(std::string(to_string(*type)));
    break;
  }
  case MetadataSubject::ColumnName:
    if (is_ordering(pred.op)) throw ParseError("ColumnName admits only = and !=", op_tok.begin);
    break;
  case MetadataSubject::MaxValue:
  case MetadataSubject::MinValue:
  case MetadataSubject::MaxLength:
    if (!pred.constant.is_numeric())
      throw ParseError(std::string(to_string(pred.subject)) + " requires a numeric constant", at);
    break;
  }
  return pred;
}

// ---------------------------------------------------------------------------
// Printer

std::string quote(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string print_literal(const Literal &lit) {
  const auto &t = lit.text();
  const bool bare = lit.is_numeric() && std::all_of(t.begin(), t.end(), is_bare_char);
  return bare ? t : quote(t);
}

std::string print_leaf(const ValuePredicate &p) {
  return std::string(to_string(p.op)) + " " + print_literal(p.constant);
}

std::string print_leaf(const MetadataPredicate &p) {
  return std::string(to_string(p.subject)) + " " + std::string(to_string(p.op)) + " " +
         print_literal(p.constant);
}

template <typename Pred> std::string print(const BoolExpr<Pred> &e) {
  using Kind = typename BoolExpr<Pred>::Kind;
  if (e.kind == Kind::Leaf) return print_leaf(e.leaf);
  std::string out;
  const char *sep = e.kind == Kind::And ? " && " : " || ";
  for (std::size_t i = 0; i < e.children.size(); ++i) {
    if (i) out += sep;
    const auto &c = e.children[i];
    if (e.kind == Kind::And && c.kind == Kind::Or)
      out += "(" + print(c) + ")";
    else
      out += print(c);
  }
  return out;
}

} // namespace

ParseError::ParseError(const std::string &message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position)), position_(position) {}

ValueConstraint parse_value_constraint(std::string_view text) {
  return Parser<ValuePredicate>(text, &parse_value_leaf).parse_all();
}

MetadataConstraint parse_metadata_constraint(std::string_view text) {
  return Parser<MetadataPredicate>(text, &parse_metadata_leaf).parse_all();
}

std::string to_string(const ValueExpr &e) { return print(e); }
std::string to_string(const MetadataExpr &e) { return print(e); }
std::string to_string(const ValueConstraint &c) { return c.expr ? print(*c.expr) : std::string(); }
std::string to_string(const MetadataConstraint &c) { return c.expr ? print(*c.expr) : std::string(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace {

bool compare(double lhs, CompareOp op, double rhs) {
  switch (op) {
  case CompareOp::Gt: return lhs > rhs;
  case CompareOp::Ge: return lhs >= rhs;
  case CompareOp::Lt: return lhs < rhs;
  case CompareOp::Le: return lhs <= rhs;
  case CompareOp::Eq: return lhs == rhs;
  case CompareOp::Ne: return lhs != rhs;
  }
  return false;
}

bool text_equal(const Literal &constant, const Cell &cell, const MatchOptions &opts) {
  if (constant.is_numeric() && cell.number) return constant.number() == *cell.number;
  const bool fold = !opts.case_sensitive;
  if (opts.mode == MatchMode::Token) {
    auto needle = tokenize_impl(constant.text(), fold);
    if (!needle.empty()) return contains_sequence(tokenize_impl(cell.text, fold), needle);
  }
  if (fold) return normalize_text(constant.text()) == normalize_text(cell.text);
  return trim(constant.text()) == trim(cell.text);
}

template <typename Pred, typename Arg, typename LeafEval>
bool eval_tree(const BoolExpr<Pred> &e, const Arg &arg, LeafEval &&leaf) {
  using Kind = typename BoolExpr<Pred>::Kind;
  switch (e.kind) {
  case Kind::Leaf: return leaf(e.leaf, arg);
  case Kind::And:
    return std::all_of(e.children.begin(), e.children.end(),
                       [&](const auto &c) { return eval_tree(c, arg, leaf); });
  case Kind::Or:
    return std::any_of(e.children.begin(), e.children.end(),
                       [&](const auto &c) { return eval_tree(c, arg, leaf); });
  }
  return false;
}

} // namespace

bool eval(const ValuePredicate &p, const Cell &cell, const MatchOptions &opts) {
  switch (p.op) {
  case CompareOp::Eq: return text_equal(p.constant, cell, opts);
  case CompareOp::Ne: return !text_equal(p.constant, cell, opts);
  default:
    // Text cells that fail numeric parse never satisfy an ordering predicate.
    if (!p.constant.is_numeric() || !cell.number) return false;
    return compare(*cell.number, p.op, p.constant.number());
  }
}

bool eval(const ValueExpr &e, const Cell &cell, const MatchOptions &opts) {
  return eval_tree(e, cell, [&](const ValuePredicate &p, const Cell &c) { return eval(p, c, opts); });
}

bool eval_value_constraint(const ValueConstraint &c, const Cell &cell, const MatchOptions &opts) {
  return c.empty() || eval(*c.expr, cell, opts);
}

bool eval(const MetadataPredicate &p, const ColumnStats &stats) {
  switch (p.subject) {
  case MetadataSubject::DataType: {
    auto wanted = parse_data_type(p.constant.text());
    if (!wanted) return false;
    const bool match = stats.inferred_type == *wanted ||
                       (*wanted == DataType::Decimal && stats.inferred_type == DataType::Int);
    return p.op == CompareOp::Ne ? !match : (p.op == CompareOp::Eq && match);
  }
  case MetadataSubject::ColumnName: {
    const bool match = normalize_text(stats.name) == normalize_text(p.constant.text());
    return p.op == CompareOp::Ne ? !match : (p.op == CompareOp::Eq && match);
  }
  case MetadataSubject::MinValue:
  case MetadataSubject::MaxValue: {
    const bool numeric = stats.inferred_type == DataType::Int || stats.inferred_type == DataType::Decimal;
    const auto &v = p.subject == MetadataSubject::MinValue ? stats.min_value : stats.max_value;
    if (!numeric || !v || !p.constant.is_numeric()) return false;
    return compare(*v, p.op, p.constant.number());
  }
  case MetadataSubject::MaxLength:
    if (!p.constant.is_numeric()) return false;
    return compare(static_cast<double>(stats.max_length), p.op, p.constant.number());
  }
  return false;
}

bool eval(const MetadataExpr &e, const ColumnStats &stats) {
  return eval_tree(e, stats, [](const MetadataPredicate &p, const ColumnStats &s) { return eval(p, s); });
}

bool eval_metadata_constraint(const MetadataConstraint &c, const ColumnStats &stats) {
  return c.empty() || eval(*c.expr, stats);
}

// ---------------------------------------------------------------------------
// SynthesisTask

SynthesisTask::SynthesisTask(std::size_t arity, std::vector<SampleConstraint> samples,
                             std::vector<MetadataConstraint> metadata)
    : arity_(arity), samples_(std::move(samples)), metadata_(std::move(metadata)) {
  if (arity_ == 0) throw TaskError("arity must be positive");
  if (metadata_.empty()) metadata_.resize(arity_);
  if (metadata_.size() != arity_)
    throw TaskError("metadata list has " + std::to_string(metadata_.size()) + " entries, expected " +
                    std::to_string(arity_));
  bool any = std::any_of(metadata_.begin(), metadata_.end(), [](const auto &m) { return !m.empty(); });
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].cells.size() != arity_)
      throw TaskError("sample row " + std::to_string(i) + " has " + std::to_string(samples_[i].cells.size()) +
                      " cells, expected " + std::to_string(arity_));
    for (const auto &c : samples_[i].cells) any = any || !c.empty();
  }
  if (!any) throw TaskError("task has no constraints");
}

SynthesisTask SynthesisTask::parse(std::size_t arity, const std::vector<std::vector<std::string>> &rows,
                                   const std::vector<std::string> &metadata) {
  auto located = [](const ParseError &e, bool metadata, std::size_t row, std::size_t column) {
    const std::string where = metadata ? "metadata column " + std::to_string(column)
                                       : "row " + std::to_string(row) + " column " + std::to_string(column);
    return TaskParseError(where + ": " + e.what(), e.position(), metadata, row, column);
  };
  std::vector<SampleConstraint> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SampleConstraint s;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      try {
        s.cells.push_back(parse_value_constraint(rows[i][j]));
      } catch (const ParseError &e) {
        throw located(e, false, i, j);
      }
    }
    samples.push_back(std::move(s));
  }
  std::vector<MetadataConstraint> meta;
  for (std::size_t j = 0; j < metadata.size(); ++j) {
    try {
      meta.push_back(parse_metadata_constraint(metadata[j]));
    } catch (const ParseError &e) {
      throw located(e, true, 0, j);
    }
  }
  return SynthesisTask(arity, std::move(samples), std::move(meta));
}

bool SynthesisTask::column_unconstrained(std::size_t column) const {
  if (!metadata_.at(column).empty()) return false;
  return std::all_of(samples_.begin(), samples_.end(),
                     [&](const SampleConstraint &s) { return s.cells.at(column).empty(); });
}

} // namespace schemamap
