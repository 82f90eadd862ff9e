#include "schemamap/catalog.hpp"

#include <fstream>
#include <istream>
#include <set>

#include <json.hpp>

namespace schemamap {

std::vector<Cell> Relation::column_cells(std::size_t column) const {
  std::vector<Cell> out;
  out.reserve(rows.size());
  for (const auto &row : rows) out.push_back(row.at(column));
  return out;
}

namespace {
const std::vector<Posting> kNoPostings;
}

void InvertedIndex::add_cell(const Cell &cell, Posting posting) {
  if (cell.empty()) return;
  cells_[cell_key(cell)].push_back(posting);
  std::set<std::string> seen;
  for (auto &token : tokenize(cell.text))
    if (seen.insert(token).second) tokens_[token].push_back(posting);
}

const std::vector<Posting> &InvertedIndex::cell_postings(const std::string &key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? kNoPostings : it->second;
}

const std::vector<Posting> &InvertedIndex::token_postings(const std::string &token) const {
  auto it = tokens_.find(token);
  return it == tokens_.end() ? kNoPostings : it->second;
}

Catalog::Catalog(std::string name, std::vector<Relation> relations, std::vector<JoinEdge> join_edges,
                 std::size_t top_k)
    : name_(std::move(name)), relations_(std::move(relations)), join_edges_(std::move(join_edges)) {
  if (relations_.empty()) throw CatalogError("catalog '" + name_ + "' has no relations");
  std::set<std::string> names;
  for (const auto &rel : relations_) {
    if (!names.insert(rel.name).second) throw CatalogError("duplicate relation name '" + rel.name + "'");
    std::set<std::string> cols;
    for (const auto &c : rel.columns)
      if (!cols.insert(c).second) throw CatalogError("duplicate column '" + c + "' in relation '" + rel.name + "'");
    for (std::size_t r = 0; r < rel.rows.size(); ++r)
      if (rel.rows[r].size() != rel.columns.size())
        throw CatalogError("relation '" + rel.name + "' row " + std::to_string(r) + " has " +
                           std::to_string(rel.rows[r].size()) + " cells, expected " +
                           std::to_string(rel.columns.size()));
  }
  for (const auto &e : join_edges_) {
    for (ColumnRef c : {e.left, e.right})
      if (c.relation >= relations_.size() || c.column >= relations_[c.relation].columns.size())
        throw CatalogError("join edge references an unknown column");
    if (e.left == e.right) throw CatalogError("join edge joins column " + qualified_name(e.left) + " to itself");
  }

  stats_.resize(relations_.size());
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    const auto &rel = relations_[r];
    for (std::size_t c = 0; c < rel.columns.size(); ++c) {
      const auto cells = rel.column_cells(c);
      stats_[r].push_back(compute_column_stats(cells, rel.columns[c], top_k));
      for (std::size_t row = 0; row < cells.size(); ++row)
        index_.add_cell(cells[row], {static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c),
                                     static_cast<std::uint32_t>(row)});
    }
  }
}

std::vector<ColumnRef> Catalog::all_columns() const {
  std::vector<ColumnRef> out;
  for (std::size_t r = 0; r < relations_.size(); ++r)
    for (std::size_t c = 0; c < relations_[r].columns.size(); ++c) out.push_back({r, c});
  return out;
}

std::size_t Catalog::column_count() const {
  std::size_t n = 0;
  for (const auto &rel : relations_) n += rel.columns.size();
  return n;
}

std::optional<std::size_t> Catalog::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return i;
  return std::nullopt;
}

ColumnRef Catalog::resolve(std::string_view qualified) const {
  const auto dot = qualified.find('.');
  if (dot == std::string_view::npos) throw CatalogError("expected relation.column, got '" + std::string(qualified) + "'");
  auto rel = find_relation(qualified.substr(0, dot));
  if (!rel) throw CatalogError("unknown column '" + std::string(qualified) + "' (no such relation)");
  const auto col = qualified.substr(dot + 1);
  const auto &cols = relations_[*rel].columns;
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (cols[c] == col) return {*rel, c};
  throw CatalogError("unknown column '" + std::string(qualified) + "'");
}

std::string Catalog::qualified_name(ColumnRef col) const {
  return relations_.at(col.relation).name + "." + relations_.at(col.relation).columns.at(col.column);
}

std::set<ColumnRef> Catalog::lookup_value(const ValuePredicate &pred, const MatchOptions &opts) const {
  if (pred.op != CompareOp::Eq) throw std::invalid_argument("lookup_value expects an equality predicate");
  std::set<ColumnRef> out;
  auto scan = [&](const std::vector<Posting> &postings) {
    for (const Posting &p : postings) {
      ColumnRef col{p.relation, p.column};
      if (out.count(col)) continue;
      if (eval(pred, cell(col, p.row), opts)) out.insert(col);
    }
  };
  const Cell as_cell(pred.constant.text());
  scan(index_.cell_postings(cell_key(as_cell)));
  if (opts.mode == MatchMode::Token) {
    auto tokens = tokenize(pred.constant.text());
    if (!tokens.empty()) scan(index_.token_postings(tokens.front()));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> parse_csv(std::istream &in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false, any = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any = false;
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
    case '"':
      if (field_started && !field.empty()) throw CatalogError("stray quote inside unquoted CSV field");
      in_quotes = true;
      field_started = any = true;
      break;
    case ',':
      end_field();
      any = true;
      break;
    case '\r':
      if (in.peek() == '\n') in.get(c);
      end_record();
      break;
    case '\n':
      end_record();
      break;
    default:
      field.push_back(c);
      field_started = any = true;
    }
  }
  if (in_quotes) throw CatalogError("unterminated quoted CSV field");
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

Catalog load_catalog(const std::filesystem::path &schema_config, const std::filesystem::path &data_dir) {
  std::ifstream cfg_in(schema_config);
  if (!cfg_in) throw CatalogError("cannot open schema config " + schema_config.string());
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(cfg_in);
  } catch (const nlohmann::json::exception &e) {
    throw CatalogError("malformed schema config " + schema_config.string() + ": " + e.what());
  }
  const auto base = data_dir.empty() ? schema_config.parent_path() : data_dir;

  try {
    const std::string name = cfg.value("name", schema_config.parent_path().filename().string());
    std::vector<Relation> relations;
    for (const auto &r : cfg.at("relations")) {
      Relation rel;
      rel.name = r.at("name").get<std::string>();
      rel.columns = r.at("columns").get<std::vector<std::string>>();
      const auto csv_path = base / r.at("csv").get<std::string>();
      std::ifstream csv_in(csv_path, std::ios::binary);
      if (!csv_in) throw CatalogError("missing CSV file " + csv_path.string());
      auto records = parse_csv(csv_in);
      if (records.empty()) throw CatalogError("CSV file " + csv_path.string() + " has no header");
      if (records.front() != rel.columns)
        throw CatalogError("CSV header of " + csv_path.string() + " does not match the configured columns of '" +
                           rel.name + "'");
      for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != rel.columns.size())
          throw CatalogError("ragged CSV row " + std::to_string(i) + " in " + csv_path.string() + ": " +
                             std::to_string(records[i].size()) + " fields, expected " +
                             std::to_string(rel.columns.size()));
        std::vector<Cell> row;
        for (auto &f : records[i]) row.emplace_back(std::move(f));
        rel.rows.push_back(std::move(row));
      }
      relations.push_back(std::move(rel));
    }
    if (relations.empty()) throw CatalogError("catalog '" + name + "' has no relations");

    // Resolve edges against a column-only view first so errors name the column.
    auto resolve = [&](const std::string &q) -> ColumnRef {
      const auto dot = q.find('.');
      if (dot != std::string::npos) {
        for (std::size_t ri = 0; ri < relations.size(); ++ri) {
          if (relations[ri].name != q.substr(0, dot)) continue;
          for (std::size_t ci = 0; ci < relations[ri].columns.size(); ++ci)
            if (relations[ri].columns[ci] == q.substr(dot + 1)) return {ri, ci};
        }
      }
      throw CatalogError("join edge references unknown column '" + q + "'");
    };
    std::vector<JoinEdge> edges;
    if (cfg.contains("join_edges"))
      for (const auto &e : cfg.at("join_edges"))
        edges.push_back({resolve(e.at("left").get<std::string>()), resolve(e.at("right").get<std::string>())});

    return Catalog(name, std::move(relations), std::move(edges), cfg.value("top_k", kDefaultTopK));
  } catch (const nlohmann::json::exception &e) {
    throw CatalogError("invalid schema config " + schema_config.string() + ": " + e.what());
  }
}

} // namespace schemamap
