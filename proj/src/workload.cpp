#include "schemamap/workload.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace schemamap {

namespace {

using Rng = std::mt19937_64;

std::size_t uniform(Rng &rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng &rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

const std::vector<std::string> kPlaces = {"Ann Arbor", "Boston", "Chicago", "Denver",
                                          "El Paso",   "Fresno", "Gary",    "Houston"};

std::string quote_literal(std::string_view text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "'";
}

} // namespace

Catalog make_micro_catalog(std::uint64_t seed, std::size_t max_relations) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 17);
  const std::size_t n = uniform(rng, 2, std::max<std::size_t>(2, max_relations));
  std::vector<Relation> relations;
  std::vector<std::vector<std::size_t>> key_columns(n);
  for (std::size_t r = 0; r < n; ++r) {
    Relation rel;
    rel.name = "r" + std::to_string(r);
    rel.columns.push_back("k0");
    key_columns[r].push_back(0);
    if (chance(rng, 0.5)) {
      rel.columns.push_back("k1");
      key_columns[r].push_back(1);
    }
    const bool text = chance(rng, 0.7);
    const bool num = !text || chance(rng, 0.6);
    if (text) rel.columns.push_back("place");
    if (num) rel.columns.push_back("amount");
    const std::size_t rows = uniform(rng, 4, 8);
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<Cell> row;
      for (const auto &c : rel.columns) {
        if (c == "place")
          row.emplace_back(kPlaces[uniform(rng, 0, kPlaces.size() - 1)]);
        else if (c == "amount")
          row.emplace_back(canonical_number(static_cast<double>(uniform(rng, 1, 40)) / 2.0));
        else
          row.emplace_back(std::to_string(uniform(rng, 0, 4)));
      }
      rel.rows.push_back(std::move(row));
    }
    relations.push_back(std::move(rel));
  }

  std::vector<JoinEdge> edges;
  std::set<std::pair<ColumnRef, ColumnRef>> used;
  auto add_edge = [&](std::size_t a, std::size_t b) {
    ColumnRef l{a, key_columns[a][uniform(rng, 0, key_columns[a].size() - 1)]};
    ColumnRef r{b, key_columns[b][uniform(rng, 0, key_columns[b].size() - 1)]};
    if (l == r || used.count({l, r}) || used.count({r, l})) return;
    used.insert({l, r});
    edges.push_back({l, r});
  };
  for (std::size_t r = 1; r < n; ++r) add_edge(uniform(rng, 0, r - 1), r);
  const std::size_t extra = uniform(rng, 0, 2);
  for (std::size_t i = 0; i < extra; ++i) add_edge(uniform(rng, 0, n - 1), uniform(rng, 0, n - 1));
  return Catalog("micro-" + std::to_string(seed), std::move(relations), std::move(edges));
}

Catalog make_oversized_catalog(std::uint64_t seed) {
  Rng rng(seed);
  constexpr std::size_t kRelations = 8, kRows = 3000;
  std::vector<Relation> relations;
  for (std::size_t r = 0; r < kRelations; ++r) {
    Relation rel;
    rel.name = "t" + std::to_string(r);
    rel.columns = {"id", "ref", "label", "amount"};
    for (std::size_t i = 0; i < kRows; ++i) {
      rel.rows.push_back({Cell(std::to_string(i)), Cell(std::to_string(uniform(rng, 0, 999))),
                          Cell("w" + std::to_string(uniform(rng, 0, 39))),
                          Cell(canonical_number(static_cast<double>(uniform(rng, 0, 100000)) / 100.0))});
    }
    relations.push_back(std::move(rel));
  }
  std::vector<JoinEdge> edges;
  for (std::size_t r = 0; r < kRelations; ++r) {
    edges.push_back({{r, 1}, {(r + 1) % kRelations, 0}});
    edges.push_back({{r, 1}, {(r + 3) % kRelations, 0}});
  }
  return Catalog("oversized", std::move(relations), std::move(edges));
}

std::optional<Workload> make_workload(const Catalog &catalog, std::uint64_t seed, std::size_t max_edges) {
  Rng rng(seed * 0xD1B54A32D192ED03ULL + 5);
  const SchemaGraph graph(catalog);
  for (int attempt = 0; attempt < 50; ++attempt) {
    JoinTree tree;
    tree.nodes.push_back({uniform(rng, 0, catalog.relations().size() - 1), 0});
    const std::size_t want_edges = uniform(rng, 0, max_edges);
    for (std::size_t step = 0; step < want_edges * 3 && tree.edges.size() < want_edges; ++step) {
      const std::size_t v = uniform(rng, 0, tree.nodes.size() - 1);
      const auto &inc = graph.incident(tree.nodes[v].relation);
      if (inc.empty()) break;
      const auto &pick = inc[uniform(rng, 0, inc.size() - 1)];
      const auto &je = catalog.join_edges()[pick.join_edge];
      const std::size_t other = pick.left_side ? je.right.relation : je.left.relation;
      const auto copies = static_cast<std::size_t>(std::count_if(
          tree.nodes.begin(), tree.nodes.end(), [&](const RelationInstance &n) { return n.relation == other; }));
      if (copies >= 2) continue;
      const std::size_t fresh = tree.nodes.size();
      tree.nodes.push_back({other, copies});
      tree.edges.push_back(pick.left_side ? TreeEdge{pick.join_edge, v, fresh} : TreeEdge{pick.join_edge, fresh, v});
    }

    const std::size_t arity = uniform(rng, 2, 3);
    std::vector<std::size_t> leaves;
    for (std::size_t v = 0; v < tree.nodes.size(); ++v)
      if (tree.nodes.size() == 1 || tree.degree(v) == 1) leaves.push_back(v);
    if (leaves.size() > arity) continue;

    std::vector<ProjectedColumn> projection;
    auto random_column = [&](std::size_t instance) {
      const auto &rel = catalog.relation(tree.nodes[instance].relation);
      return ProjectedColumn{instance, uniform(rng, 0, rel.columns.size() - 1)};
    };
    for (auto leaf : leaves) projection.push_back(random_column(leaf));
    while (projection.size() < arity) projection.push_back(random_column(uniform(rng, 0, tree.nodes.size() - 1)));
    std::shuffle(projection.begin(), projection.end(), rng);

    const auto result = execute_pj(tree, projection, catalog);
    if (result.rows.empty()) continue;

    const auto all_columns = catalog.all_columns();
    auto decoy = [&]() -> std::string {
      for (int tries = 0; tries < 10; ++tries) {
        const auto col = all_columns[uniform(rng, 0, all_columns.size() - 1)];
        const auto &rel = catalog.relation(col.relation);
        if (rel.rows.empty()) continue;
        const auto &cell = rel.rows[uniform(rng, 0, rel.rows.size() - 1)][col.column];
        if (!cell.empty()) return cell.number ? canonical_number(*cell.number) : quote_literal(cell.text);
      }
      return "'nowhere'";
    };

    TaskDocument doc;
    doc.catalog = catalog.name();
    doc.arity = arity;
    bool any = false;
    const std::size_t sample_rows = uniform(rng, 1, 2);
    for (std::size_t i = 0; i < sample_rows; ++i) {
      const auto &row = result.rows[uniform(rng, 0, result.rows.size() - 1)];
      std::vector<std::string> cells;
      for (const Cell *cell : row) {
        std::string text;
        const double roll = std::uniform_real_distribution<double>(0, 1)(rng);
        const std::string exact = cell->number ? canonical_number(*cell->number) : quote_literal(cell->text);
        if (cell->empty()) {
          text.clear();
        } else if (roll < 0.35) {
          text = exact;
        } else if (roll < 0.55) {
          text = chance(rng, 0.5) ? exact + " || " + decoy() : decoy() + " || " + exact;
        } else if (roll < 0.70 && cell->number) {
          const double d = static_cast<double>(uniform(rng, 1, 4)) / 2.0;
          text = ">= " + canonical_number(*cell->number - d) + " && <= " + canonical_number(*cell->number + d);
        } else if (roll < 0.70) {
          text = exact;
        }
        any = any || !text.empty();
        cells.push_back(std::move(text));
      }
      doc.rows.push_back(std::move(cells));
    }
    for (const auto &p : projection) {
      const auto &stats = catalog.stats({tree.nodes[p.instance].relation, p.column});
      std::string meta;
      if (chance(rng, 0.25)) {
        if (stats.inferred_type == DataType::Int || stats.inferred_type == DataType::Decimal)
          meta = chance(rng, 0.5) ? "DataType=='" + std::string(to_string(stats.inferred_type)) + "'"
                                  : "MinValue >= " + canonical_number(std::floor(*stats.min_value));
        else
          meta = "MaxLength <= " + std::to_string(stats.max_length);
      }
      any = any || !meta.empty();
      doc.metadata.push_back(std::move(meta));
    }
    if (!any) continue;
    return Workload{std::move(doc), make_candidate(tree, projection)};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

double median(std::vector<std::size_t> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? static_cast<double>(values[n / 2])
               : (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

std::vector<std::size_t> BenchSummary::validations(SchedulePolicy policy) const {
  std::vector<std::size_t> out;
  for (const auto &r : runs)
    if (r.policy == policy) out.push_back(r.validations);
  return out;
}

double BenchSummary::median_validations(SchedulePolicy policy) const { return median(validations(policy)); }

std::chrono::microseconds BenchSummary::total_time(SchedulePolicy policy) const {
  std::chrono::microseconds total{0};
  for (const auto &r : runs)
    if (r.policy == policy) total += r.elapsed;
  return total;
}

double BenchSummary::strictly_better_fraction(SchedulePolicy a, SchedulePolicy b) const {
  std::map<std::uint64_t, std::size_t> va, vb;
  for (const auto &r : runs) {
    if (r.policy == a) va[r.seed] = r.validations;
    if (r.policy == b) vb[r.seed] = r.validations;
  }
  std::size_t better = 0, total = 0;
  for (const auto &[seed, v] : va) {
    auto it = vb.find(seed);
    if (it == vb.end()) continue;
    ++total;
    better += v < it->second;
  }
  return total ? static_cast<double>(better) / static_cast<double>(total) : 0.0;
}

std::string BenchSummary::table() const {
  std::ostringstream out;
  out << std::left << std::setw(10) << "policy" << std::right << std::setw(20) << "median_validations"
      << std::setw(16) << "total_time_ms" << "  distribution\n";
  for (auto p : {SchedulePolicy::Random, SchedulePolicy::Baseline, SchedulePolicy::Bayes}) {
    auto v = validations(p);
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    out << std::left << std::setw(10) << to_string(p) << std::right << std::setw(20) << median_validations(p)
        << std::setw(16) << std::fixed << std::setprecision(1) << static_cast<double>(total_time(p).count()) / 1000.0
        << "  min=" << v.front() << " q1=" << v[v.size() / 4] << " q3=" << v[(3 * v.size()) / 4]
        << " max=" << v.back() << "\n";
  }
  out << "bayes strictly better than baseline on " << std::setprecision(1)
      << 100.0 * strictly_better_fraction(SchedulePolicy::Bayes, SchedulePolicy::Baseline) << "% of workloads\n";
  if (!mismatched.empty()) out << "query sets differed across policies on " << mismatched.size() << " workloads\n";
  return out.str();
}

BenchSummary run_bench(const BenchOptions &options) {
  BenchSummary summary;
  for (std::size_t i = 0; i < options.seeds; ++i) {
    const std::uint64_t seed = options.first_seed + i;
    const Catalog catalog = make_micro_catalog(seed);
    auto workload = make_workload(catalog, seed);
    if (!workload) continue;
    const auto task = workload->task.to_task();
    const Models models = train_models(catalog);
    std::optional<std::set<std::string>> reference;
    for (auto policy : {SchedulePolicy::Random, SchedulePolicy::Baseline, SchedulePolicy::Bayes}) {
      EngineConfig cfg = options.engine;
      cfg.policy = policy;
      cfg.seed = seed;
      const auto report = synthesize(task, catalog, models, cfg);
      std::set<std::string> keys;
      for (const auto &q : report.queries) keys.insert(q.key);
      if (!reference)
        reference = keys;
      else if (*reference != keys && (summary.mismatched.empty() || summary.mismatched.back() != seed))
        summary.mismatched.push_back(seed);
      summary.runs.push_back({seed, policy, report.filters_validated, report.queries.size(),
                              std::chrono::duration_cast<std::chrono::microseconds>(report.elapsed)});
    }
  }
  return summary;
}

} // namespace schemamap
