#include "schemamap/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace schemamap {

std::string join_key(const Cell &cell) {
  if (cell.empty()) return {};
  if (cell.number) return canonical_number(*cell.number);
  std::string_view t = cell.text;
  while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
  while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
  return std::string(t);
}

std::size_t ColumnModel::tracked_matches(const ValueExpr &expr, const MatchOptions &opts) const {
  std::size_t matched = 0;
  for (const auto &[value, count] : values)
    if (eval(expr, value, opts)) matched += count;
  return matched;
}

namespace {

// Tracked matches plus the untracked share matching at the tracked rate.
double estimated_matches(const ColumnModel &m, const ValueExpr &expr, const MatchOptions &opts) {
  std::size_t matched = 0, matched_distinct = 0;
  for (const auto &[value, count] : m.values)
    if (eval(expr, value, opts)) {
      matched += count;
      ++matched_distinct;
    }
  double estimate = static_cast<double>(matched);
  if (m.untracked_count > 0 && !m.values.empty())
    estimate += static_cast<double>(m.untracked_count) * static_cast<double>(matched_distinct) /
                static_cast<double>(m.values.size());
  return estimate;
}

} // namespace

double ColumnModel::match_probability(const ValueExpr &expr, const MatchOptions &opts) const {
  if (row_count == 0) return 0;
  const double estimate = estimated_matches(*this, expr, opts);
  if (estimate <= 0) return 1.0 / static_cast<double>(row_count + distinct_count + 1);
  return std::min(1.0, estimate / static_cast<double>(row_count));
}

double ColumnModel::expected_count(const ValueExpr &expr, const MatchOptions &opts) const {
  if (row_count == 0) return 0;
  const double estimate = estimated_matches(*this, expr, opts);
  if (estimate <= 0) return static_cast<double>(row_count) / static_cast<double>(row_count + distinct_count + 1);
  return std::min(static_cast<double>(row_count), estimate);
}

Models train_models(const Catalog &catalog) {
  Models m;
  for (std::size_t r = 0; r < catalog.relations().size(); ++r) {
    const auto &rel = catalog.relation(r);
    RelationModel rm;
    rm.row_count = rel.row_count();
    for (std::size_t c = 0; c < rel.columns.size(); ++c) {
      const auto &s = catalog.stats({r, c});
      ColumnModel cm;
      cm.row_count = s.row_count;
      cm.distinct_count = s.distinct_count;
      cm.untracked_count = s.untracked_count();
      cm.untracked_distinct = s.untracked_distinct();
      for (const auto &[value, count] : s.value_frequencies) cm.values.emplace_back(Cell(value), count);
      rm.columns.push_back(std::move(cm));
    }
    m.relations.push_back(std::move(rm));
  }

  for (std::size_t e = 0; e < catalog.join_edges().size(); ++e) {
    const auto &je = catalog.join_edges()[e];
    std::unordered_map<std::string, std::uint64_t> right_counts;
    const auto &right = catalog.relation(je.right.relation);
    for (const auto &row : right.rows) {
      auto k = join_key(row[je.right.column]);
      if (!k.empty()) ++right_counts[k];
    }
    JoinIndicator ji;
    ji.edge = e;
    const auto &left = catalog.relation(je.left.relation);
    for (const auto &row : left.rows) {
      auto k = join_key(row[je.left.column]);
      if (k.empty()) continue;
      auto it = right_counts.find(k);
      if (it != right_counts.end()) ji.matching_pairs += it->second;
    }
    const double pairs = static_cast<double>(left.row_count()) * static_cast<double>(right.row_count());
    ji.match_rate = pairs > 0 ? static_cast<double>(ji.matching_pairs) / pairs : 0.0;
    m.joins.push_back(ji);
  }
  return m;
}

std::string_view to_string(SchedulePolicy policy) {
  switch (policy) {
  case SchedulePolicy::Baseline: return "baseline";
  case SchedulePolicy::Bayes: return "bayes";
  case SchedulePolicy::Random: return "random";
  }
  return "?";
}

std::optional<SchedulePolicy> parse_policy(std::string_view name) {
  for (auto p : {SchedulePolicy::Baseline, SchedulePolicy::Bayes, SchedulePolicy::Random})
    if (name == to_string(p)) return p;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

Estimator::Estimator(const Models &models, const SynthesisTask &task, MatchOptions opts)
    : models_(models), task_(task), opts_(opts) {}

double Estimator::column_probability(ColumnRef col, std::size_t row, std::size_t target) const {
  const auto key = std::make_tuple(col.relation, col.column, row, target);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const auto &c = task_.samples()[row].cells[target];
  const double p = c.empty() ? 1.0 : models_.relations[col.relation].columns[col.column].match_probability(*c.expr, opts_);
  cache_.emplace(key, p);
  return p;
}

double Estimator::column_count(ColumnRef col, std::size_t row, std::size_t target) const {
  const auto key = std::make_tuple(col.relation, col.column, row, target);
  auto it = count_cache_.find(key);
  if (it != count_cache_.end()) return it->second;
  const auto &model = models_.relations[col.relation].columns[col.column];
  const auto &c = task_.samples()[row].cells[target];
  const double n = c.empty() ? static_cast<double>(model.row_count) : model.expected_count(*c.expr, opts_);
  count_cache_.emplace(key, n);
  return n;
}

// Per relation instance, the first induced column contributes its expected
// count and the rest their probabilities: the same product as rows * prod(p),
// but a single-column filter yields the tracked count without rounding.
double Estimator::expected_matches(const Filter &f, std::size_t row) const {
  double expected = 1;
  for (const auto &e : f.subtree.edges) expected *= models_.joins[e.join_edge].match_rate;
  for (std::size_t i = 0; i < f.subtree.nodes.size(); ++i) {
    const auto relation = f.subtree.nodes[i].relation;
    double factor = static_cast<double>(models_.relations[relation].row_count);
    bool first = true;
    for (const auto &p : f.induced) {
      if (p.instance != i) continue;
      if (first)
        factor = column_count({relation, p.column}, row, p.target);
      else
        factor *= column_probability({relation, p.column}, row, p.target);
      first = false;
    }
    expected *= factor;
  }
  return expected;
}

double Estimator::fail_prob(const Filter &f) const {
  bool constrained = false;
  for (const auto &s : task_.samples())
    for (const auto &p : f.induced) constrained = constrained || !s.cells[p.target].empty();
  if (!constrained) return 0;
  double all_rows_pass = 1;
  for (std::size_t row = 0; row < task_.samples().size(); ++row)
    all_rows_pass *= 1 - std::exp(-expected_matches(f, row));
  return std::clamp(1 - all_rows_pass, kMinProbability, kMaxProbability);
}

double Estimator::cost(const Filter &f) const { return estimate_cost(f, models_); }

double estimate_fail_prob(const Filter &f, const SynthesisTask &task, const Models &models, const MatchOptions &opts) {
  return Estimator(models, task, opts).fail_prob(f);
}

double estimate_cost(const Filter &f, const Models &models) {
  double cost = 0;
  for (const auto &node : f.subtree.nodes) cost += static_cast<double>(models.relations[node.relation].row_count);
  for (const auto &e : f.subtree.edges) {
    const auto l = models.relations[f.subtree.nodes[e.left].relation].row_count;
    const auto r = models.relations[f.subtree.nodes[e.right].relation].row_count;
    cost += models.joins[e.join_edge].match_rate * static_cast<double>(l) * static_cast<double>(r);
  }
  return std::max(cost, 1e-9);
}

double baseline_fail_prob(const Filter &f, std::size_t max_edges) {
  return std::clamp(static_cast<double>(f.edge_count()) / static_cast<double>(max_edges + 1), kMinProbability,
                    kMaxProbability);
}

// ---------------------------------------------------------------------------

Scheduler::Scheduler(SchedulePolicy policy, std::uint64_t seed, std::size_t max_edges)
    : policy_(policy), rng_(seed), max_edges_(max_edges) {}

void Scheduler::prepare(const FilterDAG &dag, const Estimator &estimator, double cost_scale) {
  dag_ = &dag;
  fail_.clear();
  cost_.clear();
  for (const auto &f : dag.filters) {
    cost_.push_back(estimator.cost(f) * cost_scale);
    fail_.push_back(policy_ == SchedulePolicy::Baseline ? baseline_fail_prob(f, max_edges_) : estimator.fail_prob(f));
  }
}

FilterScore Scheduler::score(std::size_t filter, const DagState &state) const {
  FilterScore s;
  s.fail_prob = fail_.at(filter);
  s.cost = cost_.at(filter);
  s.pruned_count = state.pruned_count(filter);
  s.priority = priority(s.fail_prob, s.pruned_count, s.cost);
  return s;
}

std::optional<std::size_t> Scheduler::next_filter(const FilterDAG &dag, const DagState &state) {
  const auto live = state.live_filters();
  if (live.empty()) return std::nullopt;
  if (policy_ == SchedulePolicy::Random) {
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    return live[pick(rng_)];
  }
  std::size_t best = live.front();
  FilterScore best_score = score(best, state);
  for (std::size_t i = 1; i < live.size(); ++i) {
    const auto f = live[i];
    const auto s = score(f, state);
    const bool better = s.priority > best_score.priority ||
                        (s.priority == best_score.priority &&
                         (s.cost < best_score.cost || (s.cost == best_score.cost && dag.filters[f].key < dag.filters[best].key)));
    if (better) {
      best = f;
      best_score = s;
    }
  }
  return best;
}

} // namespace schemamap
