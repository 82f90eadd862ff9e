#include "schemamap/engine.hpp"

#include <algorithm>
#include <map>
#include <thread>
#include <unordered_map>

namespace schemamap {

namespace {

using Clock = std::chrono::steady_clock;

class RelatedMatcher {
public:
  RelatedMatcher(const Catalog &catalog, const MatchOptions &opts) : catalog_(catalog), opts_(opts) {}

  bool may_match(const ValueExpr &e, ColumnRef col) {
    switch (e.kind) {
    case ValueExpr::Kind::And:
      return std::all_of(e.children.begin(), e.children.end(), [&](const auto &c) { return may_match(c, col); });
    case ValueExpr::Kind::Or:
      return std::any_of(e.children.begin(), e.children.end(), [&](const auto &c) { return may_match(c, col); });
    case ValueExpr::Kind::Leaf:
      break;
    }
    const auto &p = e.leaf;
    const auto &s = catalog_.stats(col);
    switch (p.op) {
    case CompareOp::Eq: return lookup(p).count(col) > 0;
    case CompareOp::Ne: return s.row_count > 0;
    case CompareOp::Gt: return s.numeric_max && *s.numeric_max > p.constant.number();
    case CompareOp::Ge: return s.numeric_max && *s.numeric_max >= p.constant.number();
    case CompareOp::Lt: return s.numeric_min && *s.numeric_min < p.constant.number();
    case CompareOp::Le: return s.numeric_min && *s.numeric_min <= p.constant.number();
    }
    return false;
  }

private:
  const std::set<ColumnRef> &lookup(const ValuePredicate &p) {
    auto it = cache_.find(p.constant.text());
    if (it == cache_.end()) it = cache_.emplace(p.constant.text(), catalog_.lookup_value(p, opts_)).first;
    return it->second;
  }

  const Catalog &catalog_;
  MatchOptions opts_;
  std::map<std::string, std::set<ColumnRef>> cache_;
};

bool row_satisfied(const ResultTable &table, const SampleConstraint &sample, const std::vector<std::size_t> &targets,
                   const MatchOptions &opts) {
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < targets.size(); ++k)
    if (!sample.cells[targets[k]].empty()) active.push_back(k);
  if (active.empty()) return !table.rows.empty();
  return std::any_of(table.rows.begin(), table.rows.end(), [&](const auto &row) {
    return std::all_of(active.begin(), active.end(), [&](std::size_t k) {
      return eval(*sample.cells[targets[k]].expr, *row[k], opts);
    });
  });
}

} // namespace

RelatedColumns related_columns(const Catalog &catalog, const SynthesisTask &task, const MatchOptions &opts) {
  RelatedMatcher matcher(catalog, opts);
  RelatedColumns related(task.arity());
  const auto columns = catalog.all_columns();
  for (std::size_t j = 0; j < task.arity(); ++j) {
    for (const auto &col : columns) {
      if (!eval_metadata_constraint(task.metadata()[j], catalog.stats(col))) continue;
      const bool all_rows = std::all_of(task.samples().begin(), task.samples().end(), [&](const SampleConstraint &s) {
        const auto &c = s.cells[j];
        return c.empty() || matcher.may_match(*c.expr, col);
      });
      if (all_rows) related[j].push_back(col);
    }
  }
  return related;
}

ResultTable execute_pj(const JoinTree &tree, const std::vector<ProjectedColumn> &projection, const Catalog &catalog) {
  const std::size_t n = tree.nodes.size();
  ResultTable out;
  out.width = projection.size();
  if (n == 0) return out;

  // Breadth-first edge order from node 0.
  struct Step {
    const TreeEdge *edge;
    std::size_t known;
    std::size_t fresh;
  };
  std::vector<Step> steps;
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> queue{0};
  seen[0] = true;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const auto u = queue[qi];
    for (const auto &e : tree.edges) {
      const std::size_t other = e.left == u ? e.right : e.right == u ? e.left : n;
      if (other == n || seen[other]) continue;
      seen[other] = true;
      queue.push_back(other);
      steps.push_back({&e, u, other});
    }
  }

  // Intermediate tuples as row ids, stride n.
  std::vector<std::uint32_t> tuples;
  const auto &root = catalog.relation(tree.nodes[0].relation);
  for (std::uint32_t r = 0; r < root.row_count(); ++r) {
    tuples.resize(tuples.size() + n, 0);
    tuples[tuples.size() - n] = r;
  }
  for (const auto &step : steps) {
    const auto &je = catalog.join_edges()[step.edge->join_edge];
    const bool known_is_left = step.edge->left == step.known;
    const ColumnRef known_col{tree.nodes[step.known].relation, known_is_left ? je.left.column : je.right.column};
    const ColumnRef fresh_col{tree.nodes[step.fresh].relation, known_is_left ? je.right.column : je.left.column};

    std::unordered_map<std::string, std::vector<std::uint32_t>> table;
    const auto &fresh_rel = catalog.relation(fresh_col.relation);
    for (std::uint32_t r = 0; r < fresh_rel.row_count(); ++r) {
      auto k = join_key(fresh_rel.rows[r][fresh_col.column]);
      if (!k.empty()) table[k].push_back(r);
    }
    std::vector<std::uint32_t> next;
    const std::size_t count = tuples.size() / n;
    for (std::size_t t = 0; t < count; ++t) {
      const std::uint32_t *tuple = &tuples[t * n];
      auto it = table.find(join_key(catalog.cell(known_col, tuple[step.known])));
      if (it == table.end()) continue;
      for (auto r : it->second) {
        next.insert(next.end(), tuple, tuple + n);
        next[next.size() - n + step.fresh] = r;
      }
    }
    tuples = std::move(next);
    if (tuples.empty()) break;
  }

  const std::size_t count = tuples.size() / n;
  out.rows.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<const Cell *> row;
    row.reserve(projection.size());
    for (const auto &p : projection)
      row.push_back(&catalog.cell({tree.nodes[p.instance].relation, p.column}, tuples[t * n + p.instance]));
    out.rows.push_back(std::move(row));
  }
  return out;
}

bool validate_filter(const Filter &f, const Catalog &catalog, const SynthesisTask &task, const MatchOptions &opts) {
  std::vector<ProjectedColumn> projection;
  std::vector<std::size_t> targets;
  for (const auto &p : f.induced) {
    projection.push_back({p.instance, p.column});
    targets.push_back(p.target);
  }
  const auto table = execute_pj(f.subtree, projection, catalog);
  return std::all_of(task.samples().begin(), task.samples().end(),
                     [&](const SampleConstraint &s) { return row_satisfied(table, s, targets, opts); });
}

bool verify_query(const CandidateQuery &q, const SynthesisTask &task, const Catalog &catalog, const MatchOptions &opts) {
  if (q.projection.size() != task.arity()) return false;
  for (std::size_t j = 0; j < q.projection.size(); ++j) {
    const ColumnRef col{q.tree.nodes.at(q.projection[j].instance).relation, q.projection[j].column};
    if (!eval_metadata_constraint(task.metadata()[j], catalog.stats(col))) return false;
  }
  const auto table = execute_pj(q.tree, q.projection, catalog);
  std::vector<std::size_t> targets(task.arity());
  for (std::size_t j = 0; j < targets.size(); ++j) targets[j] = j;
  return std::all_of(task.samples().begin(), task.samples().end(),
                     [&](const SampleConstraint &s) { return row_satisfied(table, s, targets, opts); });
}

SynthesisReport synthesize(const SynthesisTask &task, const Catalog &catalog, const EngineConfig &config) {
  const Models models = train_models(catalog);
  return synthesize(task, catalog, models, config);
}

SynthesisReport synthesize(const SynthesisTask &task, const Catalog &catalog, const Models &models,
                           const EngineConfig &config) {
  const auto start = Clock::now();
  const auto deadline = start + config.budget;
  auto expired = [&] { return Clock::now() >= deadline; };
  SynthesisReport report;
  auto finish = [&] {
    report.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return report;
  };

  const auto related = related_columns(catalog, task, config.match);
  if (std::any_of(related.begin(), related.end(), [](const auto &r) { return r.empty(); })) return finish();

  const SchemaGraph graph(catalog);
  CandidateEnumerator enumerator(graph, related, config.limits);
  const Estimator estimator(models, task, config.match);
  Scheduler scheduler(config.policy, config.seed, config.limits.max_edges);
  std::unordered_map<std::string, bool> memo;
  const std::size_t workers = std::max<std::size_t>(1, config.workers);

  bool exhausted = false;
  while (!exhausted && !report.timed_out) {
    std::vector<CandidateQuery> batch;
    while (batch.size() < std::max<std::size_t>(1, config.batch_size)) {
      if (expired()) {
        report.timed_out = true;
        break;
      }
      auto q = enumerator.next();
      if (!q) {
        exhausted = true;
        break;
      }
      batch.push_back(std::move(*q));
    }
    if (batch.empty()) break;
    report.candidates += batch.size();

    const FilterDAG dag = decompose_filters(batch);
    report.filters_generated += dag.filters.size();
    DagState state(dag);
    std::vector<char> settled(dag.filters.size(), 0); // validated now or known from an earlier batch
    for (const auto &f : dag.filters) {
      auto it = memo.find(f.key);
      if (it == memo.end()) continue;
      settled[f.id] = 1;
      if (it->second)
        state.apply_pass(f.id);
      else
        state.apply_fail(f.id);
    }
    // accepted[c]: 1 verified, 2 rejected by re-verification. Queries are
    // reported in enumeration order whatever order they were accepted in.
    std::vector<char> accepted(batch.size(), 0);
    auto accept_new = [&] {
      for (std::size_t c = 0; c < batch.size(); ++c) {
        if (accepted[c] || state.candidate(c) != CandidateStatus::Accepted) continue;
        accepted[c] = verify_query(batch[c], task, catalog, config.match) ? 1 : 2;
        if (accepted[c] == 2) ++report.verification_failures;
      }
    };
    accept_new();

    scheduler.prepare(dag, estimator, config.cost_scale);
    while (!state.all_resolved()) {
      if (expired()) {
        report.timed_out = true;
        break;
      }
      std::vector<std::size_t> picks;
      std::vector<FilterScore> scores;
      for (std::size_t w = 0; w < workers; ++w) {
        auto f = scheduler.next_filter(dag, state);
        if (!f) break;
        scores.push_back(scheduler.score(*f, state));
        state.set_in_flight(*f);
        picks.push_back(*f);
      }
      if (picks.empty()) break;

      std::vector<char> results(picks.size(), 0);
      auto run = [&](std::size_t k) {
        results[k] = validate_filter(dag.filters[picks[k]], catalog, task, config.match) ? 1 : 0;
      };
      if (picks.size() == 1) {
        run(0);
      } else {
        std::vector<std::thread> threads;
        for (std::size_t k = 1; k < picks.size(); ++k) threads.emplace_back(run, k);
        run(0);
        for (auto &t : threads) t.join();
      }

      for (std::size_t k = 0; k < picks.size(); ++k) {
        const auto &f = dag.filters[picks[k]];
        settled[f.id] = 1;
        ++report.filters_validated;
        memo[f.key] = results[k] != 0;
        if (config.record_trace) report.trace.push_back({f.key, f.edge_count(), scores[k], results[k] != 0});
        if (results[k])
          state.apply_pass(f.id);
        else
          state.apply_fail(f.id);
      }
      accept_new();
    }

    for (std::size_t c = 0; c < batch.size(); ++c) {
      if (accepted[c] == 1) report.queries.push_back(batch[c]);
      if (state.candidate(c) == CandidateStatus::Pruned) report.pruned.push_back(batch[c]);
    }
    for (std::size_t f = 0; f < dag.filters.size(); ++f) {
      if (settled[f]) continue;
      if (state.status(f) == FilterStatus::Failed) ++report.filters_pruned;
      if (state.status(f) == FilterStatus::Passed) ++report.filters_inferred;
    }
  }
  return finish();
}

} // namespace schemamap
